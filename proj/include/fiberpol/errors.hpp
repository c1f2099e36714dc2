// Copyright 2026 The fiberpol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace fiberpol {

// Base of all library errors. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied a value outside the documented domain.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// Inputs are valid in general but outside the regime an operation handles
// (e.g. the closed-form Mueller matrix with c or beta nonzero).
class UnsupportedConfiguration : public Error {
public:
    using Error::Error;
};

// A measured quantity has a vanishing denominator at the requested time.
class SingularConfiguration : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    NumericalFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace fiberpol
