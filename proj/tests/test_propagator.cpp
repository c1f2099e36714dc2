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

#include <algorithm>
#include <cmath>
#include <random>

#include "fiberpol/errors.hpp"
#include "fiberpol/noise_model.hpp"
#include "fiberpol/propagator.hpp"

using namespace fiberpol;

namespace {

double max_abs(const Eigen::Matrix3d& m)
{
    return m.cwiseAbs().maxCoeff();
}

struct BlockDraw {
    DissipativeParams p;
    double omega;
};

// CP-valid parameters with c = beta = 0.
BlockDraw random_block(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> rate(0.0, 3.0);
    std::uniform_real_distribution<double> coupling(-1.0, 1.0);
    std::uniform_real_distribution<double> freq(-2.0, 2.0);
    for (;;) {
        BlockDraw d{{rate(rng), coupling(rng), 0.0, rate(rng), 0.0, rate(rng)}, freq(rng)};
        if (is_completely_positive(d.p)) {
            return d;
        }
    }
}

Eigen::Vector3d random_state(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> r(0.0, 1.0);
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    return std::cbrt(r(rng)) * v / v.norm();
}

} // namespace

TEST_CASE("mueller_exact basics")
{
    const GeneratorMatrix g = build_generator({1, 0.3, 0.2, 2, 0.1, 1.5}, {0.4, -0.2, 1.0});
    CHECK(max_abs(mueller_exact(g, 0.0).m - Eigen::Matrix3d::Identity()) == 0.0);
    CHECK_THROWS_AS(mueller_exact(g, -1e-3), InvalidInput);

    // d s1/dt = -2 w s2, d s2/dt = 2 w s1: rotation by 2 w t.
    const double w = 0.8;
    const double t = 1.7;
    Eigen::Matrix3d rot;
    rot << std::cos(2 * w * t), -std::sin(2 * w * t), 0, std::sin(2 * w * t), std::cos(2 * w * t), 0, 0, 0, 1;
    CHECK(max_abs(mueller_exact(build_generator({}, {0, 0, w}), t).m - rot) < 1e-14);

    const Eigen::Matrix3d diag = mueller_exact(build_generator({0.5, 0, 0, 1.0, 0, 2.0}, Eigen::Vector3d::Zero()), t).m;
    const Eigen::Vector3d expected(std::exp(-2 * 0.5 * t), std::exp(-2 * 1.0 * t), std::exp(-2 * 2.0 * t));
    CHECK(max_abs(diag - Eigen::Matrix3d(expected.asDiagonal())) < 1e-15);
}

TEST_CASE("semigroup property")
{
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1.0, 2.0);
    std::uniform_real_distribution<double> tt(0.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const GeneratorMatrix g = build_generator({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)},
                                                  {u(rng), u(rng), u(rng)});
        const double t = tt(rng);
        const double s = tt(rng);
        const Eigen::Matrix3d lhs = mueller_exact(g, t + s).m;
        const Eigen::Matrix3d rhs = mueller_exact(g, t).m * mueller_exact(g, s).m;
        CHECK(max_abs(lhs - rhs) <= 1e-12 * std::max(1.0, max_abs(lhs)));
    }
}

TEST_CASE("closed form reproduces pure rotation and population decay")
{
    const double w = 1.3;
    for (double t : {0.0, 0.1, 0.9, 4.0}) {
        const Eigen::Matrix3d m = mueller_closed_form({}, w, t).m;
        Eigen::Matrix3d rot;
        rot << std::cos(2 * w * t), -std::sin(2 * w * t), 0, std::sin(2 * w * t), std::cos(2 * w * t), 0, 0, 0, 1;
        CHECK(max_abs(m - rot) < 1e-15);
    }
    std::mt19937_64 rng(67);
    for (int k = 0; k < 100; ++k) {
        const BlockDraw d = random_block(rng);
        CHECK(mueller_closed_form(d.p, d.omega, 0.7).m(2, 2) == std::exp(-2 * d.p.gamma * 0.7));
    }
}

TEST_CASE("closed form equals the matrix exponential on both branches")
{
    std::mt19937_64 rng(71);
    const std::array<double, 10> times{0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.5, 5.0, 8.0};
    int oscillatory = 0;
    int overdamped = 0;
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
        const BlockDraw d = random_block(rng);
        const auto branch = ClosedFormContext::from(d.p, d.omega).branch;
        oscillatory += branch == Branch::oscillatory;
        overdamped += branch == Branch::overdamped;
        const GeneratorMatrix g = build_generator(d.p, {0, 0, d.omega});
        for (double t : times) {
            worst = std::max(worst, max_abs(mueller_closed_form(d.p, d.omega, t).m - mueller_exact(g, t).m));
        }
    }
    CHECK(oscillatory > 50);
    CHECK(overdamped > 50);
    CHECK(worst < 1e-10);
}

TEST_CASE("closed form is continuous across the degenerate point")
{
    // b^2 + (a - alpha)^2 / 4 = 1.5625 = 1.25^2, all exact in binary.
    const DissipativeParams p{2.5, 0.75, 0.0, 0.5, 0.0, 0.9};
    const double base = p.b * p.b + 0.25 * (p.a - p.alpha) * (p.a - p.alpha);
    const GeneratorMatrix ref = build_generator(p, {0, 0, std::sqrt(base)});
    for (double target : {-1e-6, -1e-12, 0.0, 1e-12, 1e-6}) {
        const double omega = std::sqrt(base + target);
        for (double t : {1e-3, 0.5, 2.0, 10.0}) {
            const Eigen::Matrix3d closed = mueller_closed_form(p, omega, t).m;
            const Eigen::Matrix3d exact = mueller_exact(build_generator(p, {0, 0, omega}), t).m;
            CHECK(max_abs(closed - exact) < 1e-12);
            CHECK(max_abs(closed - mueller_exact(ref, t).m) < 1e-4);
        }
    }
    CHECK(ClosedFormContext::from(p, std::sqrt(base)).branch == Branch::degenerate);
}

TEST_CASE("closed form requires the block structure")
{
    CHECK_THROWS_AS(mueller_closed_form({1, 0, 0.1, 1, 0, 1}, 1.0, 1.0), UnsupportedConfiguration);
    CHECK_THROWS_AS(mueller_closed_form({1, 0, 0, 1, 0.1, 1}, 1.0, 1.0), UnsupportedConfiguration);
    CHECK_THROWS_AS(mueller_closed_form({1, 0, 0, 1, 0, 1}, 1.0, -1.0), InvalidInput);
}

TEST_CASE("large times on the overdamped branch stay finite")
{
    const DissipativeParams p{4.0, 0.0, 0.0, 0.1, 0.0, 4.0};
    REQUIRE(ClosedFormContext::from(p, 0.1).branch == Branch::overdamped);
    const Eigen::Matrix3d m = mueller_closed_form(p, 0.1, 400.0).m;
    CHECK(m.allFinite());
    CHECK(max_abs(m - mueller_exact(build_generator(p, {0, 0, 0.1}), 400.0).m) < 1e-12);
}

TEST_CASE("backward pass")
{
    const double w = 0.9;
    const double t = 1.1;
    CHECK(max_abs(backward_mueller({}, w, t).m * mueller_closed_form({}, w, t).m - Eigen::Matrix3d::Identity()) < 1e-15);

    const DissipativeParams sym{0.7, 0.0, 0.0, 0.7, 0.0, 0.5};
    CHECK(max_abs(backward_mueller(sym, w, t).m - mueller_closed_form(sym, w, t).m.transpose()) < 1e-15);

    const DissipativeParams p{0.4, 0.3, 0.0, 1.2, 0.0, 0.9};
    CHECK(ClosedFormContext::from(p, w).omega_squared ==
          ClosedFormContext::from({0.4, -0.3, 0.0, 1.2, 0.0, 0.9}, -w).omega_squared);
    const Eigen::Matrix3d exact = mueller_exact(build_generator({0.4, -0.3, 0, 1.2, 0, 0.9}, {0, 0, -w}), t).m;
    CHECK(max_abs(backward_mueller(p, w, t).m - exact) < 1e-14);
}

TEST_CASE("double pass")
{
    for (double w : {-2.0, 0.3, 5.0}) {
        const StokesVector out = double_pass({}, w, 0.8, {1, 0, 0});
        CHECK((out.vec() - Eigen::Vector3d(1, 0, 0)).norm() < 1e-14);
    }
    const DissipativeParams p{0.4, 0.3, 0.0, 1.2, 0.0, 0.9};
    const StokesVector circ = double_pass(p, 1.0, 0.6, {0, 0, 1});
    CHECK(circ.rho1 == 0.0);
    CHECK(circ.rho2 == 0.0);
    CHECK(circ.rho3 == doctest::Approx(std::exp(-4 * 0.9 * 0.6)).epsilon(1e-15));
    CHECK_THROWS_AS(double_pass(p, 1.0, 0.6, {1, 1, 0}), InvalidInput);

    std::mt19937_64 rng(73);
    for (int k = 0; k < 200; ++k) {
        const BlockDraw d = random_block(rng);
        const Eigen::Vector3d s = random_state(rng);
        const double t = 0.3 + k * 0.01;
        const StokesVector out = double_pass(d.p, d.omega, t, StokesVector::from(s));
        CHECK(out.norm() <= s.norm() + 1e-12);
        DissipativeParams back = d.p;
        back.b = -back.b;
        const Eigen::Vector3d composed = mueller_exact(build_generator(back, {0, 0, -d.omega}), t).m *
                                         (mueller_exact(build_generator(d.p, {0, 0, d.omega}), t).m * s);
        CHECK((out.vec() - composed).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("noise-derived parameters depolarize completely")
{
    // Slowest decay rate of the simplified family is at least 2 min(a, alpha, gamma).
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> g(0.05, 3.0);
    std::uniform_real_distribution<double> lam(0.2, 5.0);
    std::uniform_real_distribution<double> om(-4.0, 4.0);
    int tested = 0;
    while (tested < 50) {
        NoiseSpec spec;
        spec.g = {g(rng), g(rng), g(rng)};
        spec.lam = {lam(rng), lam(rng), lam(rng)};
        const FreePrecession fp{om(rng), {0, 0, 1}};
        const SimplifiedParams sp = simplified_params(spec, fp);
        if (!is_completely_positive(sp.params)) {
            continue;
        }
        ++tested;
        const double r = std::min({sp.params.a, sp.params.alpha, sp.params.gamma});
        const Eigen::Matrix3d m = mueller_closed_form(sp.params, sp.omega, 50.0 / (2.0 * r)).m;
        for (int k = 0; k < 10; ++k) {
            CHECK((m * random_state(rng)).norm() < 1e-8);
        }
    }
}
