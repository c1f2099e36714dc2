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

#include "fiberpol/generator.hpp"

#include <algorithm>
#include <complex>

#include "fiberpol/errors.hpp"

namespace fiberpol {

bool KossakowskiMatrix::is_symmetric(double tol) const
{
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double KossakowskiMatrix::min_eigenvalue() const
{
    const Eigen::Matrix3d sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(sym, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

KossakowskiMatrix kossakowski_from_params(const DissipativeParams& p)
{
    const double r = 0.5 * (p.alpha + p.gamma - p.a);
    const double s = 0.5 * (p.a + p.gamma - p.alpha);
    const double t = 0.5 * (p.a + p.alpha - p.gamma);

    KossakowskiMatrix k;
    k.m << r, -p.b, -p.c,
           -p.b, s, -p.beta,
           -p.c, -p.beta, t;
    return k;
}

DissipativeParams params_from_kossakowski(const KossakowskiMatrix& k)
{
    if (!k.is_symmetric()) {
        throw InvalidInput("Kossakowski matrix must be symmetric");
    }
    const auto& m = k.m;
    DissipativeParams p;
    p.a = m(1, 1) + m(2, 2);
    p.alpha = m(0, 0) + m(2, 2);
    p.gamma = m(0, 0) + m(1, 1);
    p.b = -m(0, 1);
    p.c = -m(0, 2);
    p.beta = -m(1, 2);
    return p;
}

GeneratorMatrix build_generator(const DissipativeParams& p, const Eigen::Vector3d& omega)
{
    const double w1 = omega(0);
    const double w2 = omega(1);
    const double w3 = omega(2);

    GeneratorMatrix g;
    g.omega = omega;
    g.h << p.a,        p.b + w3,     p.c - w2,
           p.b - w3,   p.alpha,      p.beta + w1,
           p.c + w2,   p.beta - w1,  p.gamma;
    return g;
}

double CpResiduals::min() const
{
    const auto v = values();
    return *std::min_element(v.begin(), v.end());
}

CpResiduals cp_inequalities(const DissipativeParams& p)
{
    const double r = 0.5 * (p.alpha + p.gamma - p.a);
    const double s = 0.5 * (p.a + p.gamma - p.alpha);
    const double t = 0.5 * (p.a + p.alpha - p.gamma);

    CpResiduals out;
    out.two_r = 2.0 * r;
    out.two_s = 2.0 * s;
    out.two_t = 2.0 * t;
    out.rs_minus_b2 = r * s - p.b * p.b;
    out.rt_minus_c2 = r * t - p.c * p.c;
    out.st_minus_beta2 = s * t - p.beta * p.beta;
    out.determinant = r * s * t - 2.0 * p.b * p.c * p.beta
                    - r * p.beta * p.beta - s * p.c * p.c - t * p.b * p.b;
    return out;
}

bool is_completely_positive(const DissipativeParams& p, double tol)
{
    return kossakowski_from_params(p).min_eigenvalue() >= -tol;
}

Eigen::Matrix2cd lindblad_apply(const KossakowskiMatrix& k,
                                const Eigen::Vector3d& omega,
                                const DensityMatrix& d)
{
    const std::complex<double> i(0.0, 1.0);
    const Eigen::Matrix2cd& rho = d.m;

    Eigen::Matrix2cd hamiltonian = Eigen::Matrix2cd::Zero();
    for (int n = 0; n < 3; ++n) {
        hamiltonian += omega(n) * pauli(n + 1);
    }
    Eigen::Matrix2cd out = -i * (hamiltonian * rho - rho * hamiltonian);

    for (int a = 0; a < 3; ++a) {
        const Eigen::Matrix2cd& sa = pauli(a + 1);
        for (int b = 0; b < 3; ++b) {
            const double coeff = k.m(a, b);
            if (coeff == 0.0) {
                continue;
            }
            const Eigen::Matrix2cd& sb = pauli(b + 1);
            const Eigen::Matrix2cd prod = sa * sb;
            out += 0.5 * coeff * (2.0 * sb * rho * sa - (prod * rho + rho * prod));
        }
    }
    return out;
}

} // namespace fiberpol
