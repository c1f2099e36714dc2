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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "fiberpol/errors.hpp"
#include "fiberpol/philox.hpp"
#include "fiberpol/propagator.hpp"
#include "fiberpol/stochastic.hpp"

using namespace fiberpol;

namespace {

bool bit_equal(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

NoiseSpec weak_noise()
{
    NoiseSpec s;
    s.lam = {10.0, 10.0, 10.0};
    s.g = {0.0101, 0.0202, 0.01515};
    return s;
}

} // namespace

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    using P = Philox4x32;
    CHECK(P::generate({0, 0, 0, 0}, {0, 0}) == P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(P::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(P::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream moments and independence of substreams")
{
    NormalStream a(9, 0, 0);
    NormalStream b(9, 0, 1);
    const int n = 200000;
    double sum = 0, sum2 = 0, sum4 = 0, cross = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.next();
        const double y = b.next();
        sum += x;
        sum2 += x * x;
        sum4 += x * x * x * x;
        cross += x * y;
    }
    CHECK(std::abs(sum / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sum2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(sum4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
    CHECK(std::abs(cross / n) < 5.0 / std::sqrt(n));

    NormalStream again(9, 0, 0);
    NormalStream first(9, 0, 0);
    for (int i = 0; i < 10; ++i) {
        CHECK(bit_equal(again.next(), first.next()));
    }
}

TEST_CASE("ou_step without forcing decays deterministically")
{
    CHECK(ou_step(2.0, 0.0, 3.0, 0.1, 5.0) == doctest::Approx(2.0 * std::exp(-0.3)).epsilon(1e-15));
}

TEST_CASE("ou_step stationary moments")
{
    // 1e6 pairs (x, x') with x ~ N(0, G) and x' one lag later.
    const double g = 2.5;
    const double lam = 4.0;
    const double tau = 0.1;
    const double rho = std::exp(-lam * tau);
    NormalStream rng(123, 0, 0);
    const int n = 1000000;
    double sx2 = 0, sy2 = 0, sxy = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = std::sqrt(g) * rng.next();
        const double y = ou_step(x, g, lam, tau, rng.next());
        sx2 += x * x;
        sy2 += y * y;
        sxy += x * y;
        sy += y;
    }
    // Var(X^2) = 2 G^2; Var(XY) = G^2 (1 + rho^2).
    CHECK(std::abs(sy / n) < 5.0 * std::sqrt(g / n));
    CHECK(std::abs(sy2 / n - g) < 5.0 * std::sqrt(2.0 * g * g / n));
    CHECK(std::abs(sx2 / n - g) < 5.0 * std::sqrt(2.0 * g * g / n));
    CHECK(std::abs(sxy / n - g * rho) < 5.0 * std::sqrt(g * g * (1 + rho * rho) / n));
}

TEST_CASE("ou_step chained autocovariance")
{
    // Lag tau = 20 dt along one long chain; batch means handle the correlation.
    const double g = 1.0;
    const double lam = 10.0;
    const double dt = 1e-3;
    const int lag = 20;
    const int batches = 50;
    const int per_batch = 40000;
    NormalStream rng(77, 0, 0);
    double x = rng.next();
    std::vector<double> batch_means;
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (int i = 0; i < per_batch; ++i) {
            const double prev = x;
            for (int k = 0; k < lag; ++k) {
                x = ou_step(x, g, lam, dt, rng.next());
            }
            acc += prev * x;
        }
        batch_means.push_back(acc / per_batch);
    }
    double mean = 0, var = 0;
    for (double m : batch_means) mean += m;
    mean /= batches;
    for (double m : batch_means) var += (m - mean) * (m - mean);
    const double se = std::sqrt(var / (batches - 1) / batches);
    CHECK(std::abs(mean - g * std::exp(-lam * lag * dt)) < 5.0 * se);
}

TEST_CASE("config validation")
{
    const NoiseSpec spec = weak_noise();
    const FreePrecession fp{1.0, {0, 0, 1}};
    TrajectoryConfig cfg;
    CHECK_NOTHROW(cfg.validate(spec, fp));

    TrajectoryConfig coarse = cfg;
    coarse.dt = 0.01;
    CHECK_THROWS_AS(coarse.validate(spec, fp), InvalidInput);

    TrajectoryConfig few = cfg;
    few.n_traj = 99;
    CHECK_THROWS_AS(few.validate(spec, fp), InvalidInput);

    TrajectoryConfig uneven = cfg;
    uneven.record_every = 300;
    CHECK_THROWS_AS(uneven.validate(spec, fp), InvalidInput);

    TrajectoryConfig bad_state = cfg;
    bad_state.initial = {1, 1, 0};
    CHECK_THROWS_AS(bad_state.validate(spec, fp), InvalidInput);

    CHECK_THROWS_AS(evolve_trajectory(spec, fp, cfg, cfg.n_traj), InvalidInput);
}

TEST_CASE("zero noise trajectories rotate about the precession axis")
{
    NoiseSpec quiet;
    const double w0 = 2.0;
    TrajectoryConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 1500;
    cfg.n_traj = 100;
    cfg.initial = {0.6, 0.0, 0.8};
    const auto traj = evolve_trajectory(quiet, {w0, {0, 0, 1}}, cfg, 3);
    REQUIRE(traj.size() == cfg.n_records());
    for (std::size_t k = 0; k < traj.size(); k += 100) {
        const double t = static_cast<double>(k) * cfg.dt;
        CHECK(std::abs(traj[k].rho1 - 0.6 * std::cos(w0 * t)) < 1e-12);
        CHECK(std::abs(traj[k].rho2 - 0.6 * std::sin(w0 * t)) < 1e-12);
        CHECK(std::abs(traj[k].rho3 - 0.8) < 1e-12);
    }

    const auto still = evolve_trajectory(quiet, {0.0, {0, 0, 1}}, cfg, 0);
    for (const auto& s : still) {
        CHECK(s == cfg.initial);
    }
}

TEST_CASE("single trajectories stay pure")
{
    NoiseSpec strong;
    strong.g = {4.0, 9.0, 1.0};
    strong.lam = {5.0, 2.0, 8.0};
    strong.mean = {0.3, 0.0, -0.2};
    TrajectoryConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 5000;
    cfg.initial = {0.0, 0.6, 0.8};
    Eigen::Vector3d n(1.0, 2.0, 2.0);
    const auto traj = evolve_trajectory(strong, {1.5, n / 3.0}, cfg, 17);
    for (const auto& s : traj) {
        CHECK(std::abs(s.norm() - 1.0) < 1e-10);
    }
}

TEST_CASE("zero noise ensemble matches the master equation exactly")
{
    NoiseSpec quiet;
    const FreePrecession fp{1.2, {0, 0, 1}};
    TrajectoryConfig cfg;
    cfg.n_steps = 400;
    cfg.n_traj = 100;
    cfg.record_every = 40;
    cfg.initial = {0.0, 0.6, 0.8};
    const EnsembleTrajectory e = ensemble_average(quiet, fp, cfg, 2);
    const auto single = evolve_trajectory(quiet, fp, cfg, 0);
    for (std::size_t r = 0; r < e.times.size(); ++r) {
        CHECK(e.stderr_of_mean[r].norm() == 0.0);
        CHECK((e.mean_stokes[r].vec() - single[r].vec()).norm() < 1e-14);
    }
    const MasterComparison c = compare_with_master(e, quiet, fp, cfg.initial);
    CHECK(c.max_abs_z == 0.0);
    CHECK(c.fraction_above_3 == 0.0);
    CHECK_FALSE(c.systematic_deviation);
}

TEST_CASE("ensemble results do not depend on the worker count")
{
    const NoiseSpec spec = weak_noise();
    const FreePrecession fp{1.0, {0, 0, 1}};
    TrajectoryConfig cfg;
    cfg.n_steps = 200;
    cfg.n_traj = 300;
    cfg.seed = 42;
    cfg.record_every = 50;
    const EnsembleTrajectory one = ensemble_average(spec, fp, cfg, 1);
    for (unsigned workers : {2u, 3u, 8u}) {
        const EnsembleTrajectory many = ensemble_average(spec, fp, cfg, workers);
        for (std::size_t r = 0; r < one.times.size(); ++r) {
            for (int i = 0; i < 3; ++i) {
                CHECK(bit_equal(one.mean_stokes[r].vec()(i), many.mean_stokes[r].vec()(i)));
                CHECK(bit_equal(one.stderr_of_mean[r](i), many.stderr_of_mean[r](i)));
            }
        }
    }
    cfg.seed = 43;
    const EnsembleTrajectory other = ensemble_average(spec, fp, cfg, 1);
    CHECK(other.mean_stokes.back().rho1 != one.mean_stokes.back().rho1);
}

TEST_CASE("double pass without noise undoes the rotation")
{
    NoiseSpec quiet;
    TrajectoryConfig cfg;
    cfg.n_steps = 700;
    cfg.n_traj = 100;
    cfg.record_every = 100;
    cfg.initial = {0.6, 0.0, 0.8};
    const EnsembleTrajectory e = mc_double_pass(quiet, {2.5, {0, 0, 1}}, cfg, 1);
    REQUIRE(e.times.size() == 15);
    CHECK(e.times.back() == doctest::Approx(1.4));
    CHECK((e.mean_stokes.back().vec() - cfg.initial.vec()).norm() < 1e-12);

    CHECK_THROWS_AS(mc_double_pass(quiet, {2.5, {1, 0, 0}}, cfg, 1), UnsupportedConfiguration);
}

TEST_CASE("double pass of circular light decays as exp(-4 gamma t)")
{
    // Short correlation time: the non-Markovian transient at the start of
    // each pass scales as G / lam^2 while the decay rate scales as G / lam.
    NoiseSpec spec;
    spec.lam = {100.0, 100.0, 100.0};
    spec.g = {0.10001, 0.20002, 0.15};
    const FreePrecession fp{1.0, {0, 0, 1}};
    TrajectoryConfig cfg;
    cfg.dt = 5e-4;
    cfg.n_steps = 1000;
    cfg.n_traj = 2000;
    cfg.record_every = 1000;
    cfg.initial = {0.0, 0.0, 1.0};
    cfg.seed = 5;
    const EnsembleTrajectory e = mc_double_pass(spec, fp, cfg, 0);
    const double gamma = simplified_params(spec, fp).params.gamma;
    const double t = cfg.dt * cfg.n_steps;
    CHECK(std::abs(e.mean_stokes.back().rho3 - std::exp(-4.0 * gamma * t)) < 5.0 * e.stderr_of_mean.back()(2));
}

TEST_CASE("strong coupling is reported as a systematic deviation")
{
    NoiseSpec spec;
    spec.lam = {10.0, 10.0, 10.0};
    spec.g = {101.0, 101.0, 101.0};  // Lambda_i = 1
    TrajectoryConfig cfg;
    cfg.dt = 1e-3;
    cfg.n_steps = 200;
    cfg.n_traj = 2000;
    cfg.record_every = 10;
    cfg.initial = {1.0, 0.0, 0.0};
    const MasterComparison c = mc_vs_master_report(spec, {1.0, {0, 0, 1}}, cfg, 0);
    CHECK(c.systematic_deviation);
    CHECK(c.max_abs_z > 5.0);
}
