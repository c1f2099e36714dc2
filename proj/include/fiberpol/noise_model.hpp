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

// Stochastic birefringence field F(t) acting on the photon polarization as
// -i [F(t) . sigma, rho], and the Markovian coefficients it induces.
//
// Units: one arbitrary time unit throughout. omega0, lambda_i and <F_i> are
// inverse times, G_i is an inverse time squared. Nothing enforces this.

#pragma once

#include <array>

#include <Eigen/Dense>

#include "fiberpol/generator.hpp"

namespace fiberpol {

// Diagonal, exponentially damped noise: <dF_i(t) dF_j(0)> = G_i e^{-lambda_i |t|} delta_ij.
struct NoiseSpec {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    std::array<double, 3> lam{1.0, 1.0, 1.0};
    std::array<double, 3> mean{0.0, 0.0, 0.0};

    // Throws InvalidInput naming the offending component.
    void validate() const;
};

// Noise-free Hamiltonian H0 = (omega0 / 2) n . sigma.
struct FreePrecession {
    double omega0{0.0};
    Eigen::Vector3d n{0.0, 0.0, 1.0};

    void validate() const;
};

// C_ij = sum_k int_0^inf G_ik(t) U_kj(-t) dt. Not symmetric in general.
using CMatrix = Eigen::Matrix3d;

// G_i e^{-lambda_i |t|} delta_ij; axes are 0-based.
double correlation(const NoiseSpec& spec, int i, int j, double t);

// e^{i t H0} sigma_i e^{-i t H0} = sum_j U_ij(t) sigma_j.
Eigen::Matrix3d pauli_rotation(const FreePrecession& fp, double t);

// Lambda_i = G_i / (lambda_i^2 + omega0^2).
std::array<double, 3> lambda_weights(const NoiseSpec& spec, const FreePrecession& fp);

CMatrix c_matrix_closed(const NoiseSpec& spec, const FreePrecession& fp);

// Direct adaptive Gauss-Kronrod evaluation of the defining integral,
// truncated at 40 / min(lambda). Throws NumericalFailure when the error
// estimate of any entry exceeds 1e-9.
CMatrix c_matrix_quadrature(const NoiseSpec& spec, const FreePrecession& fp);

// omega = (omega0/2) n + <F> + h, h_k = sum_ij eps_ijk C_ij.
Eigen::Vector3d effective_hamiltonian(const NoiseSpec& spec, const FreePrecession& fp);

// Kossakowski matrix C + C^T of the closed-form C.
KossakowskiMatrix kossakowski_from_noise(const NoiseSpec& spec, const FreePrecession& fp);

// Full master-equation generator for arbitrary axis and noise means.
GeneratorMatrix generator_from_noise(const NoiseSpec& spec, const FreePrecession& fp);

struct SimplifiedParams {
    DissipativeParams params;
    double omega{0.0};
};

// Closed-form (a, b, alpha, gamma, omega) for n = z and zero-mean noise;
// c = beta = 0. Throws UnsupportedConfiguration otherwise.
SimplifiedParams simplified_params(const NoiseSpec& spec, const FreePrecession& fp);

// 4 l1 l2 L1 L2 - omega0^2 (L2 - L1)^2; non-negative iff the simplified
// parameters describe a completely positive dynamics. Same preconditions as
// simplified_params.
double noise_cp_condition(const NoiseSpec& spec, const FreePrecession& fp);

} // namespace fiberpol
