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

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fiberpol/cli/config.hpp"

namespace fiberpol::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumerical = 3;

// Empty cells (std::monostate) mark values that do not exist for a row,
// e.g. R(t) at a singular time.
using Cell = std::variant<std::monostate, double, bool, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    // Extra key/value pairs carried in the metadata record.
    std::vector<std::pair<std::string, Cell>> summary;
};

// Computes the table for cfg.mode. Throws library errors unchanged.
Table execute(const RunConfig& cfg);

// CSV: a "# key=value ..." metadata line, the header row, then data rows.
// JSON: an array whose first element is {"metadata": {...}}, then one object
// per row. Doubles use 17 significant digits in both.
std::string render(const Table& table, const RunConfig& cfg, Format format);

// Full command line: parse flags, load the config, run, write output.
// Diagnostics go to `diag` as one JSON object per line. Returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& diag);

} // namespace fiberpol::cli
