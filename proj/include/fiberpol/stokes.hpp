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

// Polarization states of a single photon as a two-level system.
//
// Conventions used throughout the library:
//   * the sigma_3-diagonal basis is {|R>, |L>} (circular polarization), so
//     |R><R| has Stokes vector (0, 0, 1);
//   * rho = (sigma_0 + s . sigma) / 2 with s the (reduced) Stokes vector.

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace fiberpol {

inline constexpr double kPhysicalTolerance = 1e-12;

// Angles of |theta, phi> = cos(theta)|+> + e^{i phi} sin(theta)|->, where
// |+>, |-> are the linear polarization states. Any real angles are accepted;
// only the projector is observable so equivalent angles give equal output.
struct PureStateAngles {
    double theta{0.0};
    double phi{0.0};
};

struct StokesVector {
    double rho1{0.0};
    double rho2{0.0};
    double rho3{0.0};

    Eigen::Vector3d vec() const { return {rho1, rho2, rho3}; }
    static StokesVector from(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }

    double norm() const { return vec().norm(); }

    friend bool operator==(const StokesVector&, const StokesVector&) = default;
};

// Unphysical vectors (norm > 1) are representable; this is the guard.
bool is_physical(const StokesVector& s, double tol = kPhysicalTolerance);

// 2x2 density matrix in the {|R>, |L>} basis. Not validated on construction;
// see is_hermitian / trace / is_physical.
struct DensityMatrix {
    Eigen::Matrix2cd m{Eigen::Matrix2cd::Zero()};

    std::complex<double> trace() const { return m.trace(); }
    bool is_hermitian(double tol = kPhysicalTolerance) const;
    bool is_physical(double tol = kPhysicalTolerance) const;
};

// Pauli matrices, index 1..3 (0 gives the identity).
const Eigen::Matrix2cd& pauli(int index);

DensityMatrix density_from_stokes(const StokesVector& s);

// Throws InvalidInput if d is not Hermitian or not unit trace (tol 1e-12).
StokesVector stokes_from_density(const DensityMatrix& d);

// Bloch components tr(m sigma_i) without any validation; used for the
// traceless derivatives returned by the Lindblad action.
Eigen::Vector3d bloch_components(const Eigen::Matrix2cd& m);

StokesVector stokes_from_angles(const PureStateAngles& p);

// tr(rho^2) = (1 + |s|^2) / 2.
double purity(const StokesVector& s);

} // namespace fiberpol
