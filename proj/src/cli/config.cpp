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

#include "fiberpol/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <limits>
#include <set>

#include <json.hpp>

namespace fiberpol::cli {

namespace {

using nlohmann::json;

void fail(const std::string& field, const std::string& constraint)
{
    throw InvalidInput(field + " " + constraint);
}

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed)
{
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!known.contains(item.key())) {
            const std::string path = where.empty() ? item.key() : where + "." + item.key();
            throw InvalidInput("unknown key '" + path + "'");
        }
    }
}

const json& require_object(const json& v, const std::string& field)
{
    if (!v.is_object()) {
        fail(field, "must be an object");
    }
    return v;
}

double number(const json& v, const std::string& field)
{
    if (!v.is_number()) {
        fail(field, "must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        fail(field, "must be finite");
    }
    return x;
}

std::uint64_t count(const json& v, const std::string& field)
{
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        return v.get<std::uint64_t>();
    }
    fail(field, "must be a non-negative integer");
    return 0;
}

std::array<double, 3> triple(const json& v, const std::string& field)
{
    if (!v.is_array() || v.size() != 3) {
        fail(field, "must be an array of 3 numbers");
    }
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = number(v[i], field + "[" + std::to_string(i) + "]");
    }
    return out;
}

Eigen::Vector3d to_vector(const std::array<double, 3>& a)
{
    return {a[0], a[1], a[2]};
}

NoiseSpec parse_noise(const json& v)
{
    require_object(v, "noise");
    check_keys(v, "noise", {"g", "lam", "mean"});
    if (!v.contains("g") || !v.contains("lam")) {
        fail("noise", "requires both 'g' and 'lam'");
    }
    NoiseSpec spec;
    spec.g = triple(v["g"], "noise.g");
    spec.lam = triple(v["lam"], "noise.lam");
    if (v.contains("mean")) {
        spec.mean = triple(v["mean"], "noise.mean");
    }
    return spec;
}

FreePrecession parse_precession(const json& v)
{
    require_object(v, "precession");
    check_keys(v, "precession", {"omega0", "n"});
    FreePrecession fp;
    if (v.contains("omega0")) {
        fp.omega0 = number(v["omega0"], "precession.omega0");
    }
    if (v.contains("n")) {
        fp.n = to_vector(triple(v["n"], "precession.n"));
    }
    return fp;
}

ExplicitParams parse_params(const json& v)
{
    require_object(v, "params");
    check_keys(v, "params", {"a", "b", "c", "alpha", "beta", "gamma", "omega"});
    ExplicitParams out;
    auto get = [&](const char* key, double& dst) {
        if (v.contains(key)) {
            dst = number(v[key], std::string("params.") + key);
        }
    };
    get("a", out.params.a);
    get("b", out.params.b);
    get("c", out.params.c);
    get("alpha", out.params.alpha);
    get("beta", out.params.beta);
    get("gamma", out.params.gamma);
    if (v.contains("omega")) {
        const json& w = v["omega"];
        if (w.is_number()) {
            out.omega = {0.0, 0.0, number(w, "params.omega")};
        } else {
            out.omega = to_vector(triple(w, "params.omega"));
        }
    }
    return out;
}

std::vector<double> parse_times(const json& v)
{
    std::vector<double> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(number(v[i], "times[" + std::to_string(i) + "]"));
        }
        return out;
    }
    if (!v.is_object()) {
        fail("times", "must be an array or a {start, stop, count} object");
    }
    check_keys(v, "times", {"start", "stop", "count"});
    if (!v.contains("start") || !v.contains("stop") || !v.contains("count")) {
        fail("times", "grid requires 'start', 'stop' and 'count'");
    }
    const double start = number(v["start"], "times.start");
    const double stop = number(v["stop"], "times.stop");
    const std::uint64_t n = count(v["count"], "times.count");
    if (n == 0) {
        fail("times.count", "must be positive");
    }
    if (n == 1) {
        return {start};
    }
    out.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        // Exact endpoints; interior points by linear interpolation.
        const double f = static_cast<double>(k) / static_cast<double>(n - 1);
        out.push_back(k + 1 == n ? stop : start + (stop - start) * f);
    }
    return out;
}

TrajectoryConfig parse_trajectory(const json& v, unsigned& workers)
{
    require_object(v, "trajectory");
    check_keys(v, "trajectory", {"dt", "n_steps", "n_traj", "seed", "record_every", "workers"});
    TrajectoryConfig cfg;
    if (v.contains("dt")) {
        cfg.dt = number(v["dt"], "trajectory.dt");
    }
    if (v.contains("n_steps")) {
        cfg.n_steps = count(v["n_steps"], "trajectory.n_steps");
    }
    if (v.contains("n_traj")) {
        cfg.n_traj = count(v["n_traj"], "trajectory.n_traj");
    }
    if (v.contains("seed")) {
        cfg.seed = count(v["seed"], "trajectory.seed");
    }
    if (v.contains("record_every")) {
        cfg.record_every = count(v["record_every"], "trajectory.record_every");
    }
    if (v.contains("workers")) {
        const std::uint64_t w = count(v["workers"], "trajectory.workers");
        if (w > 1024) {
            fail("trajectory.workers", "must not exceed 1024");
        }
        workers = static_cast<unsigned>(w);
    }
    return cfg;
}

bool mode_needs_generator(Mode m)
{
    return m == Mode::evolve || m == Mode::mueller || m == Mode::cp_check || m == Mode::experiment;
}

bool mode_is_stochastic(Mode m)
{
    return m == Mode::montecarlo || m == Mode::compare;
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> locate(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

json array_of(const Eigen::Vector3d& v)
{
    return json::array({v(0), v(1), v(2)});
}

} // namespace

const char* to_string(Mode m)
{
    switch (m) {
    case Mode::evolve: return "evolve";
    case Mode::mueller: return "mueller";
    case Mode::cp_check: return "cp-check";
    case Mode::experiment: return "experiment";
    case Mode::montecarlo: return "montecarlo";
    case Mode::compare: return "compare";
    }
    return "unknown";
}

const char* to_string(Format f)
{
    return f == Format::csv ? "csv" : "json";
}

Mode parse_mode(std::string_view name)
{
    for (Mode m : {Mode::evolve, Mode::mueller, Mode::cp_check, Mode::experiment, Mode::montecarlo,
                   Mode::compare}) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw InvalidInput("mode must be one of evolve, mueller, cp-check, experiment, montecarlo, compare");
}

Format parse_format(std::string_view name)
{
    if (name == "csv") {
        return Format::csv;
    }
    if (name == "json") {
        return Format::json;
    }
    throw InvalidInput("output.format must be csv or json");
}

void RunConfig::validate()
{
    if (noise) {
        noise->validate();
    }
    precession.validate();
    if (!is_physical(initial)) {
        fail("initial", "must lie in the unit ball");
    }

    if (mode_needs_generator(mode)) {
        if (noise.has_value() == params.has_value()) {
            fail("config", "must contain exactly one of 'noise' and 'params' for mode " +
                               std::string(to_string(mode)));
        }
    }
    if (mode_is_stochastic(mode)) {
        if (!noise) {
            fail("noise", "is required for mode " + std::string(to_string(mode)));
        }
        if (params) {
            fail("params", "cannot be combined with mode " + std::string(to_string(mode)));
        }
        if (!trajectory) {
            fail("trajectory", "is required for mode " + std::string(to_string(mode)));
        }
        trajectory->initial = initial;
        trajectory->validate(*noise, precession);
    }
    if (mode != Mode::cp_check && !mode_is_stochastic(mode)) {
        if (times.empty()) {
            fail("times", "must contain at least one time for mode " + std::string(to_string(mode)));
        }
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (times[i] < 0.0) {
                fail("times[" + std::to_string(i) + "]", "must be non-negative");
            }
            if (i > 0 && !(times[i] > times[i - 1])) {
                fail("times", "must be strictly increasing");
            }
        }
        if (mode == Mode::experiment && times.front() <= 0.0) {
            fail("times", "must be positive for mode experiment");
        }
    }

    json c = json::object();
    c["mode"] = to_string(mode);
    if (noise) {
        c["noise"] = {{"g", noise->g}, {"lam", noise->lam}, {"mean", noise->mean}};
    }
    c["precession"] = {{"omega0", precession.omega0}, {"n", array_of(precession.n)}};
    if (params) {
        const auto& p = params->params;
        c["params"] = {{"a", p.a},         {"b", p.b},         {"c", p.c},
                       {"alpha", p.alpha}, {"beta", p.beta},   {"gamma", p.gamma},
                       {"omega", array_of(params->omega)}};
    }
    c["times"] = times;
    c["initial"] = array_of(initial.vec());
    if (trajectory) {
        // workers is deliberately absent: it never changes the numbers.
        c["trajectory"] = {{"dt", trajectory->dt},
                           {"n_steps", trajectory->n_steps},
                           {"n_traj", trajectory->n_traj},
                           {"seed", trajectory->seed},
                           {"record_every", trajectory->record_every}};
    }
    canonical = c.dump();
}

std::string RunConfig::digest() const
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig parse_config(std::string_view text)
{
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // e.byte is one past the offending character.
        const auto [line, column] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + e.what(),
                         line, column);
    }

    require_object(root, "config");
    check_keys(root, "", {"mode", "noise", "precession", "params", "times", "initial", "trajectory", "output"});

    RunConfig cfg;
    if (!root.contains("mode") || !root["mode"].is_string()) {
        fail("mode", "must be a string");
    }
    cfg.mode = parse_mode(root["mode"].get<std::string>());
    if (root.contains("noise")) {
        cfg.noise = parse_noise(root["noise"]);
    }
    if (root.contains("precession")) {
        cfg.precession = parse_precession(root["precession"]);
    }
    if (root.contains("params")) {
        cfg.params = parse_params(root["params"]);
    }
    if (root.contains("times")) {
        cfg.times = parse_times(root["times"]);
    }
    if (root.contains("initial")) {
        const auto s = triple(root["initial"], "initial");
        cfg.initial = {s[0], s[1], s[2]};
    }
    if (root.contains("trajectory")) {
        cfg.trajectory = parse_trajectory(root["trajectory"], cfg.workers);
    }
    if (root.contains("output")) {
        const json& out = require_object(root["output"], "output");
        check_keys(out, "output", {"path", "format"});
        if (out.contains("path")) {
            if (!out["path"].is_string()) {
                fail("output.path", "must be a string");
            }
            cfg.output_path = out["path"].get<std::string>();
        }
        if (out.contains("format")) {
            if (!out["format"].is_string()) {
                fail("output.format", "must be a string");
            }
            cfg.format = parse_format(out["format"].get<std::string>());
        }
    }
    cfg.validate();
    return cfg;
}

} // namespace fiberpol::cli
