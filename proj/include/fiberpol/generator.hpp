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

// Bloch-space generator of the polarization master equation
//
//     d rho/dt = -i [omega . sigma, rho]
//              + 1/2 sum_ij K_ij (2 sigma_j rho sigma_i - {sigma_i sigma_j, rho})
//
// which acts on the Stokes vector as ds/dt = -2 H s with
//
//         | a          b + w3     c - w2 |
//     H = | b - w3     alpha      beta + w1 |
//         | c + w2     beta - w1  gamma |
//
// a = K22 + K33, alpha = K11 + K33, gamma = K11 + K22,
// b = -K12, c = -K13, beta = -K23.
//
// The dynamics is completely positive iff the Kossakowski matrix K is
// positive semidefinite. Parameter sets violating this are ordinary values
// here; only the predicates below classify them.

#pragma once

#include <array>
#include <string_view>

#include <Eigen/Dense>

#include "fiberpol/stokes.hpp"

namespace fiberpol {

// Absolute tolerance used when classifying residuals and eigenvalues.
inline constexpr double kCpTolerance = 1e-10;

struct DissipativeParams {
    double a{0.0};
    double b{0.0};
    double c{0.0};
    double alpha{0.0};
    double beta{0.0};
    double gamma{0.0};

    friend bool operator==(const DissipativeParams&, const DissipativeParams&) = default;
};

struct KossakowskiMatrix {
    Eigen::Matrix3d m{Eigen::Matrix3d::Zero()};

    bool is_symmetric(double tol = 1e-12) const;
    double min_eigenvalue() const;
};

struct GeneratorMatrix {
    Eigen::Matrix3d h{Eigen::Matrix3d::Zero()};
    Eigen::Vector3d omega{Eigen::Vector3d::Zero()};

    // Symmetric (dissipative) and antisymmetric (Hamiltonian) parts.
    Eigen::Matrix3d dissipative_part() const { return 0.5 * (h + h.transpose()); }
    Eigen::Matrix3d hamiltonian_part() const { return 0.5 * (h - h.transpose()); }
};

KossakowskiMatrix kossakowski_from_params(const DissipativeParams& p);

// Throws InvalidInput when k is asymmetric beyond 1e-12.
DissipativeParams params_from_kossakowski(const KossakowskiMatrix& k);

GeneratorMatrix build_generator(const DissipativeParams& p, const Eigen::Vector3d& omega);

// The principal minors of K written in terms of (a, b, c, alpha, beta, gamma),
// with 2R = alpha + gamma - a, 2S = a + gamma - alpha, 2T = a + alpha - gamma.
struct CpResiduals {
    double two_r{0.0};
    double two_s{0.0};
    double two_t{0.0};
    double rs_minus_b2{0.0};
    double rt_minus_c2{0.0};
    double st_minus_beta2{0.0};
    double determinant{0.0};

    static constexpr std::array<std::string_view, 7> names{
        "2R", "2S", "2T", "RS-b^2", "RT-c^2", "ST-beta^2", "det"};

    std::array<double, 7> values() const
    {
        return {two_r, two_s, two_t, rs_minus_b2, rt_minus_c2, st_minus_beta2, determinant};
    }
    double min() const;
    bool all_nonnegative(double tol = kCpTolerance) const { return min() >= -tol; }
};

CpResiduals cp_inequalities(const DissipativeParams& p);

// Eigenvalue test on the Kossakowski matrix: min eigenvalue >= -tol.
bool is_completely_positive(const DissipativeParams& p, double tol = kCpTolerance);

// d rho/dt of the master equation, evaluated with explicit 2x2 Pauli algebra.
// Only used to cross-check the Bloch-space generator.
Eigen::Matrix2cd lindblad_apply(const KossakowskiMatrix& k,
                                const Eigen::Vector3d& omega,
                                const DensityMatrix& d);

} // namespace fiberpol
