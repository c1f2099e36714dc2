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

#include "fiberpol/stokes.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "fiberpol/errors.hpp"

namespace fiberpol {

namespace {

using cd = std::complex<double>;

std::array<Eigen::Matrix2cd, 4> make_pauli()
{
    const cd i(0.0, 1.0);
    std::array<Eigen::Matrix2cd, 4> s;
    s[0] << 1.0, 0.0, 0.0, 1.0;
    s[1] << 0.0, 1.0, 1.0, 0.0;
    s[2] << 0.0, -i, i, 0.0;
    s[3] << 1.0, 0.0, 0.0, -1.0;
    return s;
}

} // namespace

const Eigen::Matrix2cd& pauli(int index)
{
    static const std::array<Eigen::Matrix2cd, 4> matrices = make_pauli();
    if (index < 0 || index > 3) {
        throw InvalidInput("pauli index must be in 0..3");
    }
    return matrices[static_cast<std::size_t>(index)];
}

bool is_physical(const StokesVector& s, double tol)
{
    return s.vec().squaredNorm() <= 1.0 + tol;
}

bool DensityMatrix::is_hermitian(double tol) const
{
    return std::abs(m(0, 1) - std::conj(m(1, 0))) <= tol
        && std::abs(m(0, 0).imag()) <= tol
        && std::abs(m(1, 1).imag()) <= tol;
}

bool DensityMatrix::is_physical(double tol) const
{
    if (!is_hermitian(tol) || std::abs(trace() - 1.0) > tol) {
        return false;
    }
    // Eigenvalues of a unit-trace Hermitian 2x2 matrix are (1 +- |s|) / 2.
    const Eigen::Vector3d s = bloch_components(m);
    return (1.0 - s.norm()) / 2.0 >= -tol;
}

DensityMatrix density_from_stokes(const StokesVector& s)
{
    const cd i(0.0, 1.0);
    DensityMatrix d;
    d.m(0, 0) = 0.5 * (1.0 + s.rho3);
    d.m(1, 1) = 0.5 * (1.0 - s.rho3);
    d.m(0, 1) = 0.5 * (s.rho1 - i * s.rho2);
    d.m(1, 0) = 0.5 * (s.rho1 + i * s.rho2);
    return d;
}

Eigen::Vector3d bloch_components(const Eigen::Matrix2cd& m)
{
    // tr(m sigma_1) = m01 + m10, tr(m sigma_2) = i (m01 - m10),
    // tr(m sigma_3) = m00 - m11; real parts only.
    return {(m(0, 1) + m(1, 0)).real(),
            (cd(0.0, 1.0) * (m(0, 1) - m(1, 0))).real(),
            (m(0, 0) - m(1, 1)).real()};
}

StokesVector stokes_from_density(const DensityMatrix& d)
{
    if (!d.is_hermitian()) {
        throw InvalidInput("density matrix is not Hermitian");
    }
    const cd tr = d.trace();
    if (std::abs(tr - 1.0) > kPhysicalTolerance) {
        std::ostringstream msg;
        msg << "density matrix trace " << tr.real() << " differs from 1";
        throw InvalidInput(msg.str());
    }
    return StokesVector::from(bloch_components(d.m));
}

StokesVector stokes_from_angles(const PureStateAngles& p)
{
    const cd i(0.0, 1.0);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

    // Amplitudes on the linear basis.
    const cd plus = std::cos(p.theta);
    const cd minus = std::polar(1.0, p.phi) * std::sin(p.theta);

    // |+> = (|R> + |L>)/sqrt2,  |-> = -i (|R> - |L>)/sqrt2.
    const cd r = inv_sqrt2 * (plus - i * minus);
    const cd l = inv_sqrt2 * (plus + i * minus);

    // Bloch vector of |psi><psi|; |r|^2 + |l|^2 = 1 analytically.
    const cd coherence = r * std::conj(l);
    return {2.0 * coherence.real(), -2.0 * coherence.imag(), std::norm(r) - std::norm(l)};
}

double purity(const StokesVector& s)
{
    return 0.5 * (1.0 + s.vec().squaredNorm());
}

} // namespace fiberpol
