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

// Run configuration for the fiberpol command-line tool. The on-disk format is
// a JSON object; see README.md for the schema.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fiberpol/errors.hpp"
#include "fiberpol/generator.hpp"
#include "fiberpol/noise_model.hpp"
#include "fiberpol/stochastic.hpp"
#include "fiberpol/stokes.hpp"

namespace fiberpol::cli {

enum class Mode { evolve, mueller, cp_check, experiment, montecarlo, compare };
enum class Format { csv, json };

const char* to_string(Mode m);
const char* to_string(Format f);
// Throw InvalidInput for unknown names.
Mode parse_mode(std::string_view name);
Format parse_format(std::string_view name);

// Malformed JSON. line and column are 1-based.
class ParseError : public InvalidInput {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : InvalidInput(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

struct ExplicitParams {
    DissipativeParams params;
    Eigen::Vector3d omega{Eigen::Vector3d::Zero()};
};

struct RunConfig {
    Mode mode{Mode::evolve};
    std::optional<NoiseSpec> noise;
    FreePrecession precession;
    std::optional<ExplicitParams> params;
    std::vector<double> times;
    StokesVector initial{1.0, 0.0, 0.0};
    std::optional<TrajectoryConfig> trajectory;
    unsigned workers{0};
    std::string output_path;  // empty: standard output
    Format format{Format::csv};

    // Canonical JSON of everything except the output block; the digest
    // identifies the computation, not where it is written.
    std::string canonical;

    // Re-checks cross-field rules after command-line overrides and refreshes
    // `canonical`. Throws InvalidInput naming the field.
    void validate();

    // FNV-1a 64 of `canonical`, as 16 hex digits.
    std::string digest() const;

    std::uint64_t seed() const { return trajectory ? trajectory->seed : 0; }
};

// Parses and validates. Throws ParseError for malformed JSON and
// InvalidInput for schema or invariant violations.
RunConfig parse_config(std::string_view text);

} // namespace fiberpol::cli
