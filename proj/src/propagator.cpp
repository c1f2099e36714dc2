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

#include "fiberpol/propagator.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "fiberpol/errors.hpp"

namespace fiberpol {

namespace {

constexpr double kBlockTolerance = 1e-12;
// Below this |Omega| t the trigonometric forms are replaced by their series.
constexpr double kSeriesThreshold = 1e-4;
// Above this 2|Omega|t cosh/sinh are folded into the damping exponential.
constexpr double kHyperbolicFold = 50.0;

void require_forward_time(double t)
{
    if (!(t >= 0.0)) {
        throw InvalidInput("propagation time must be non-negative");
    }
}

// The upper 2x2 block of M(t) for signed Omega^2.
Eigen::Matrix2d planar_block(const DissipativeParams& p, double omega, double omega_sq, double t)
{
    const double damping = p.a + p.alpha;
    const double skew = 0.5 * (p.alpha - p.a);

    // m = e^{-damping t} * [ C + skew S,  -(b+w) S ;  -(b-w) S,  C - skew S ]
    // with C = cos(2 Omega t), S = sin(2 Omega t) / Omega.
    double c_part = 0.0;
    double s_part = 0.0;
    double scale = std::exp(-damping * t);

    const double x = 4.0 * omega_sq * t * t; // (2 Omega t)^2, signed
    if (std::abs(omega_sq) * t * t < kSeriesThreshold * kSeriesThreshold) {
        c_part = 1.0 - x / 2.0 + x * x / 24.0 - x * x * x / 720.0;
        s_part = 2.0 * t * (1.0 - x / 6.0 + x * x / 120.0 - x * x * x / 5040.0);
    } else if (omega_sq > 0.0) {
        const double big_omega = std::sqrt(omega_sq);
        c_part = std::cos(2.0 * big_omega * t);
        s_part = std::sin(2.0 * big_omega * t) / big_omega;
    } else {
        const double kappa = std::sqrt(-omega_sq);
        const double u = 2.0 * kappa * t;
        if (u < kHyperbolicFold) {
            c_part = std::cosh(u);
            s_part = std::sinh(u) / kappa;
        } else {
            // e^{-damping t} cosh(u) = (e^{u - damping t} + e^{-u - damping t}) / 2
            const double grow = std::exp(u - damping * t);
            const double shrink = std::exp(-u - damping * t);
            c_part = 0.5 * (grow + shrink);
            s_part = 0.5 * (grow - shrink) / kappa;
            scale = 1.0;
        }
    }

    Eigen::Matrix2d block;
    block << c_part + skew * s_part, -(p.b + omega) * s_part,
             -(p.b - omega) * s_part, c_part - skew * s_part;
    return scale * block;
}

} // namespace

const char* to_string(Branch b)
{
    switch (b) {
    case Branch::oscillatory: return "oscillatory";
    case Branch::overdamped: return "overdamped";
    case Branch::degenerate: return "degenerate";
    }
    return "unknown";
}

ClosedFormContext ClosedFormContext::from(const DissipativeParams& p, double omega)
{
    const double half_diff = 0.5 * (p.a - p.alpha);
    ClosedFormContext ctx;
    ctx.omega_squared = omega * omega - p.b * p.b - half_diff * half_diff;
    const double eps2 = kDegenerateOmega * kDegenerateOmega;
    if (ctx.omega_squared > eps2) {
        ctx.branch = Branch::oscillatory;
    } else if (ctx.omega_squared < -eps2) {
        ctx.branch = Branch::overdamped;
    } else {
        ctx.branch = Branch::degenerate;
    }
    return ctx;
}

MuellerMatrix mueller_exact(const GeneratorMatrix& g, double t)
{
    require_forward_time(t);
    const Eigen::Matrix3d exponent = -2.0 * t * g.h;
    return MuellerMatrix{exponent.exp(), t};
}

MuellerMatrix mueller_closed_form(const DissipativeParams& p, double omega, double t)
{
    if (std::abs(p.c) > kBlockTolerance || std::abs(p.beta) > kBlockTolerance) {
        throw UnsupportedConfiguration(
            "closed-form Mueller matrix requires c = beta = 0; use mueller_exact");
    }
    require_forward_time(t);

    // In the degenerate branch |Omega| t is tiny for any realistic t and the
    // series in planar_block reduces to cos -> 1, sin(2 Omega t)/Omega -> 2t.
    const ClosedFormContext ctx = ClosedFormContext::from(p, omega);

    MuellerMatrix out;
    out.t = t;
    out.m.setZero();
    out.m.topLeftCorner<2, 2>() = planar_block(p, omega, ctx.omega_squared, t);
    out.m(2, 2) = std::exp(-2.0 * p.gamma * t);
    return out;
}

MuellerMatrix backward_mueller(const DissipativeParams& p, double omega, double t)
{
    DissipativeParams reversed = p;
    reversed.b = -p.b;
    return mueller_closed_form(reversed, -omega, t);
}

StokesVector double_pass(const DissipativeParams& p, double omega, double t, const StokesVector& s0)
{
    if (!is_physical(s0)) {
        throw InvalidInput("initial Stokes vector lies outside the unit ball");
    }
    const MuellerMatrix forward = mueller_closed_form(p, omega, t);
    const MuellerMatrix backward = backward_mueller(p, omega, t);
    return StokesVector::from(backward.m * (forward.m * s0.vec()));
}

} // namespace fiberpol
