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

// Evolution of Stokes vectors: s(t) = M(t) s(0), M(t) = exp(-2 H t).
//
// mueller_exact works for any generator. mueller_closed_form covers the
// block-diagonal family c = beta = 0 with H = omega sigma_3, where
//
//   M = | e^{-(a+alpha)t} A+   e^{-(a+alpha)t} B+   0           |
//       | e^{-(a+alpha)t} B-   e^{-(a+alpha)t} A-   0           |
//       | 0                    0                    e^{-2 gamma t} |
//
//   A+- = cos(2 Omega t) +- (alpha - a)/(2 Omega) sin(2 Omega t)
//   B+- = -(b +- omega)/Omega sin(2 Omega t)
//   Omega^2 = omega^2 - b^2 - (a - alpha)^2 / 4
//
// Omega^2 < 0 turns the trigonometric functions hyperbolic.

#pragma once

#include <Eigen/Dense>

#include "fiberpol/generator.hpp"
#include "fiberpol/stokes.hpp"

namespace fiberpol {

struct MuellerMatrix {
    Eigen::Matrix3d m{Eigen::Matrix3d::Identity()};
    double t{0.0};

    StokesVector apply(const StokesVector& s) const { return StokesVector::from(m * s.vec()); }
};

enum class Branch { oscillatory, overdamped, degenerate };

const char* to_string(Branch b);

struct ClosedFormContext {
    // |Omega^2| <= kDegenerateOmega^2 is the degenerate branch.
    static constexpr double kDegenerateOmega = 1e-9;

    double omega_squared{0.0};
    Branch branch{Branch::degenerate};

    static ClosedFormContext from(const DissipativeParams& p, double omega);
};

// Dense matrix exponential; throws InvalidInput for t < 0.
MuellerMatrix mueller_exact(const GeneratorMatrix& g, double t);

// Throws UnsupportedConfiguration if |c| or |beta| > 1e-12, InvalidInput for t < 0.
MuellerMatrix mueller_closed_form(const DissipativeParams& p, double omega, double t);

// Return pass through the fiber after a Faraday mirror: omega -> -omega, b -> -b.
MuellerMatrix backward_mueller(const DissipativeParams& p, double omega, double t);

// M~(t) M(t) s0. Throws InvalidInput for an unphysical s0.
StokesVector double_pass(const DissipativeParams& p, double omega, double t, const StokesVector& s0);

} // namespace fiberpol
