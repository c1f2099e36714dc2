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

#include "fiberpol/cli/run.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fiberpol/experiment.hpp"
#include "fiberpol/propagator.hpp"
#include "fiberpol/stochastic.hpp"

#ifndef FIBERPOL_VERSION
#define FIBERPOL_VERSION "unknown"
#endif

namespace fiberpol::cli {

namespace {

using nlohmann::json;

GeneratorMatrix resolve_generator(const RunConfig& cfg)
{
    if (cfg.params) {
        return build_generator(cfg.params->params, cfg.params->omega);
    }
    return generator_from_noise(*cfg.noise, cfg.precession);
}

DissipativeParams resolve_params(const RunConfig& cfg)
{
    if (cfg.params) {
        return cfg.params->params;
    }
    return params_from_kossakowski(kossakowski_from_noise(*cfg.noise, cfg.precession));
}

SimplifiedParams resolve_simplified(const RunConfig& cfg)
{
    if (cfg.noise) {
        return simplified_params(*cfg.noise, cfg.precession);
    }
    const Eigen::Vector3d& w = cfg.params->omega;
    if (std::abs(w(0)) > 1e-12 || std::abs(w(1)) > 1e-12) {
        throw UnsupportedConfiguration("experiment mode needs omega along the third axis");
    }
    return {cfg.params->params, w(2)};
}

std::vector<std::string> numbered(const std::string& stem, int n)
{
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) {
        out.push_back(stem + std::to_string(i));
    }
    return out;
}

void append(std::vector<Cell>& row, const Eigen::Vector3d& v)
{
    row.insert(row.end(), {v(0), v(1), v(2)});
}

Table run_evolve(const RunConfig& cfg)
{
    const GeneratorMatrix g = resolve_generator(cfg);
    Table t;
    t.columns = {"t", "rho1", "rho2", "rho3"};
    for (double time : cfg.times) {
        std::vector<Cell> row{time};
        append(row, mueller_exact(g, time).m * cfg.initial.vec());
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table run_mueller(const RunConfig& cfg)
{
    const GeneratorMatrix g = resolve_generator(cfg);
    Table t;
    t.columns = {"t"};
    for (int i = 1; i <= 3; ++i) {
        for (int j = 1; j <= 3; ++j) {
            t.columns.push_back("m" + std::to_string(i) + std::to_string(j));
        }
    }
    for (double time : cfg.times) {
        const Eigen::Matrix3d m = mueller_exact(g, time).m;
        std::vector<Cell> row{time};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                row.emplace_back(m(i, j));
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

Table run_cp_check(const RunConfig& cfg)
{
    const DissipativeParams p = resolve_params(cfg);
    const CpResiduals r = cp_inequalities(p);
    Table t;
    t.columns = {"quantity", "value"};
    const auto values = r.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        t.rows.push_back({std::string(CpResiduals::names[i]), values[i]});
    }
    t.rows.push_back({std::string("min_residual"), r.min()});
    t.rows.push_back({std::string("min_eigenvalue"), kossakowski_from_params(p).min_eigenvalue()});
    t.rows.push_back({std::string("verdict"), r.all_nonnegative()});
    if (cfg.noise) {
        try {
            t.rows.push_back({std::string("noise_cp_condition"),
                              noise_cp_condition(*cfg.noise, cfg.precession)});
        } catch (const UnsupportedConfiguration&) {
            // Only defined for n = z and zero-mean noise.
        }
    }
    return t;
}

Table run_experiment(const RunConfig& cfg)
{
    const SimplifiedParams sp = resolve_simplified(cfg);
    const auto scan = r_scan(sp.params, sp.omega, cfg.times);
    Table t;
    t.columns = {"t", "r_value", "r_closed", "verdict", "status"};
    for (const auto& point : scan) {
        if (point.result) {
            t.rows.push_back({point.t, point.result->r_value, point.result->r_closed,
                              point.result->cp_verdict, std::string("ok")});
        } else {
            t.rows.push_back({point.t, std::monostate{}, std::monostate{}, std::monostate{},
                              point.error});
        }
    }
    t.summary.emplace_back("verdicts_agree", scan_verdicts_agree(scan));
    return t;
}

Table run_montecarlo(const RunConfig& cfg)
{
    const EnsembleTrajectory e = ensemble_average(*cfg.noise, cfg.precession, *cfg.trajectory, cfg.workers);
    Table t;
    t.columns = {"t"};
    for (const auto& c : {numbered("mean", 3), numbered("stderr", 3)}) {
        t.columns.insert(t.columns.end(), c.begin(), c.end());
    }
    for (std::size_t r = 0; r < e.times.size(); ++r) {
        std::vector<Cell> row{e.times[r]};
        append(row, e.mean_stokes[r].vec());
        append(row, e.stderr_of_mean[r]);
        t.rows.push_back(std::move(row));
    }
    t.summary.emplace_back("n_traj", static_cast<double>(e.n_traj));
    return t;
}

Table run_compare(const RunConfig& cfg)
{
    const MasterComparison c = mc_vs_master_report(*cfg.noise, cfg.precession, *cfg.trajectory, cfg.workers);
    Table t;
    t.columns = {"t"};
    for (const auto& cols : {numbered("mc", 3), numbered("master", 3), numbered("stderr", 3), numbered("z", 3)}) {
        t.columns.insert(t.columns.end(), cols.begin(), cols.end());
    }
    for (std::size_t r = 0; r < c.times.size(); ++r) {
        std::vector<Cell> row{c.times[r]};
        append(row, c.mc_mean[r]);
        append(row, c.master[r]);
        append(row, c.stderr_of_mean[r]);
        append(row, c.z[r]);
        t.rows.push_back(std::move(row));
    }
    t.summary.emplace_back("max_abs_z", c.max_abs_z);
    t.summary.emplace_back("fraction_above_3", c.fraction_above_3);
    t.summary.emplace_back("systematic_deviation", c.systematic_deviation);
    return t;
}

std::string format_double(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Cell text shared by both encodings.
std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "";
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return v;
            }
        },
        c);
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    return out + "\"";
}

std::string json_cell(const Cell& c)
{
    if (std::holds_alternative<std::monostate>(c)) {
        return "null";
    }
    if (const double* d = std::get_if<double>(&c)) {
        // JSON has no literal for non-finite numbers; keep the CSV spelling.
        return std::isfinite(*d) ? format_double(*d) : json(format_double(*d)).dump();
    }
    if (const bool* b = std::get_if<bool>(&c)) {
        return *b ? "true" : "false";
    }
    return json(std::get<std::string>(c)).dump();
}

std::string render_csv(const Table& table, const RunConfig& cfg)
{
    std::ostringstream os;
    os << "# fiberpol version=" << FIBERPOL_VERSION << " mode=" << to_string(cfg.mode)
       << " config_digest=" << cfg.digest() << " seed=" << cfg.seed();
    for (const auto& [key, value] : table.summary) {
        os << ' ' << key << '=' << cell_text(value);
    }
    os << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        os << (i ? "," : "") << csv_field(table.columns[i]);
    }
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << csv_field(cell_text(row[i]));
        }
        os << '\n';
    }
    return os.str();
}

std::string render_json(const Table& table, const RunConfig& cfg)
{
    std::ostringstream os;
    os << "[\n{\"metadata\":{\"version\":" << json(FIBERPOL_VERSION).dump()
       << ",\"mode\":" << json(to_string(cfg.mode)).dump()
       << ",\"config_digest\":" << json(cfg.digest()).dump() << ",\"seed\":" << cfg.seed()
       << ",\"columns\":" << json(table.columns).dump();
    for (const auto& [key, value] : table.summary) {
        os << ',' << json(key).dump() << ':' << json_cell(value);
    }
    os << "}}";
    for (const auto& row : table.rows) {
        os << ",\n{";
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << json(table.columns[i]).dump() << ':' << json_cell(row[i]);
        }
        os << '}';
    }
    os << "\n]\n";
    return os.str();
}

void emit(std::ostream& diag, json record)
{
    diag << record.dump() << '\n';
}

int report_error(std::ostream& diag, const char* kind, const std::string& message, int code,
                 json extra = json::object())
{
    json record = {{"level", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}};
    record.update(extra);
    emit(diag, std::move(record));
    return code;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InvalidInput("cannot read config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

Table execute(const RunConfig& cfg)
{
    switch (cfg.mode) {
    case Mode::evolve: return run_evolve(cfg);
    case Mode::mueller: return run_mueller(cfg);
    case Mode::cp_check: return run_cp_check(cfg);
    case Mode::experiment: return run_experiment(cfg);
    case Mode::montecarlo: return run_montecarlo(cfg);
    case Mode::compare: return run_compare(cfg);
    }
    throw InvalidInput("unknown mode");
}

std::string render(const Table& table, const RunConfig& cfg, Format format)
{
    return format == Format::csv ? render_csv(table, cfg) : render_json(table, cfg);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& diag)
{
    CLI::App app{"Polarization dynamics of photons in a noisy optical fiber", "fiberpol"};
    app.set_version_flag("--version", FIBERPOL_VERSION);
    std::string config_path;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--mode", mode, "override the config mode");
    app.add_option("--seed", seed, "override trajectory.seed");
    app.add_option("--out", out_path, "output file ('-' for standard output)");
    app.add_option("--format", format, "csv or json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(FIBERPOL_VERSION) + "\n"
                                                                  : app.help());
            return kExitOk;
        }
        return report_error(diag, "usage_error", e.what(), kExitInvalid);
    }

    try {
        RunConfig cfg = parse_config(read_file(config_path));
        if (mode) {
            cfg.mode = parse_mode(*mode);
        }
        if (seed) {
            if (cfg.trajectory) {
                cfg.trajectory->seed = *seed;
            } else {
                emit(diag, {{"level", "warning"}, {"message", "--seed ignored: no trajectory block"}});
            }
        }
        if (out_path) {
            cfg.output_path = *out_path;
        }
        if (format) {
            cfg.format = parse_format(*format);
        }
        cfg.validate();

        const Table table = execute(cfg);
        const std::string text = render(table, cfg, cfg.format);
        if (cfg.output_path.empty() || cfg.output_path == "-") {
            out << text;
            out.flush();
        } else {
            std::ofstream file(cfg.output_path, std::ios::binary | std::ios::trunc);
            file << text;
            file.close();
            if (!file) {
                return report_error(diag, "io_error", "cannot write '" + cfg.output_path + "'", kExitInvalid);
            }
        }
        emit(diag, {{"level", "info"},
                    {"event", "done"},
                    {"mode", to_string(cfg.mode)},
                    {"rows", table.rows.size()},
                    {"config_digest", cfg.digest()}});
        return kExitOk;
    } catch (const ParseError& e) {
        return report_error(diag, "parse_error", e.what(), kExitInvalid,
                            {{"line", e.line()}, {"column", e.column()}});
    } catch (const UnsupportedConfiguration& e) {
        return report_error(diag, "unsupported_configuration", e.what(), kExitInvalid);
    } catch (const SingularConfiguration& e) {
        return report_error(diag, "singular_configuration", e.what(), kExitInvalid);
    } catch (const InvalidInput& e) {
        return report_error(diag, "invalid_input", e.what(), kExitInvalid);
    } catch (const NumericalFailure& e) {
        return report_error(diag, "numerical_failure", e.what(), kExitNumerical, {{"residual", e.residual()}});
    } catch (const std::exception& e) {
        return report_error(diag, "internal_error", e.what(), kExitNumerical);
    }
}

} // namespace fiberpol::cli
