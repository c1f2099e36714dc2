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

#include "fiberpol/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "fiberpol/errors.hpp"

namespace fiberpol {

namespace {

constexpr double kQuadratureTolerance = 1e-9;
constexpr double kTruncation = 40.0;
constexpr std::size_t kQuadratureIntervals = 20000;
constexpr double kAssumptionTolerance = 1e-12;

double levi_civita(int i, int j, int k)
{
    // Indices 0..2.
    return 0.5 * static_cast<double>((i - j) * (j - k) * (k - i));
}

void check_axis(int i)
{
    if (i < 0 || i > 2) {
        throw InvalidInput("axis index must be 0, 1 or 2");
    }
}

struct GslWorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

struct IntegrandData {
    const NoiseSpec* spec;
    const FreePrecession* fp;
    int i;
    int j;
};

double c_integrand(double t, void* raw)
{
    const auto* d = static_cast<const IntegrandData*>(raw);
    const Eigen::Matrix3d u = pauli_rotation(*d->fp, -t);
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
        sum += correlation(*d->spec, d->i, k, t) * u(k, d->j);
    }
    return sum;
}

void require_simplified_regime(const NoiseSpec& spec, const FreePrecession& fp)
{
    const Eigen::Vector3d z(0.0, 0.0, 1.0);
    if ((fp.n - z).cwiseAbs().maxCoeff() > kAssumptionTolerance) {
        throw UnsupportedConfiguration(
            "closed-form parameters require the precession axis n = (0, 0, 1)");
    }
    for (double m : spec.mean) {
        if (std::abs(m) > kAssumptionTolerance) {
            throw UnsupportedConfiguration("closed-form parameters require zero-mean noise");
        }
    }
}

} // namespace

void NoiseSpec::validate() const
{
    for (std::size_t i = 0; i < 3; ++i) {
        if (!std::isfinite(g[i]) || g[i] < 0.0) {
            throw InvalidInput("g[" + std::to_string(i) + "] must be non-negative");
        }
        if (!std::isfinite(lam[i]) || lam[i] <= 0.0) {
            throw InvalidInput("lam[" + std::to_string(i) + "] must be positive");
        }
        if (!std::isfinite(mean[i])) {
            throw InvalidInput("mean[" + std::to_string(i) + "] must be finite");
        }
    }
}

void FreePrecession::validate() const
{
    if (!std::isfinite(omega0)) {
        throw InvalidInput("omega0 must be finite");
    }
    if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-12) {
        throw InvalidInput("n must be a unit vector");
    }
}

double correlation(const NoiseSpec& spec, int i, int j, double t)
{
    check_axis(i);
    check_axis(j);
    if (i != j) {
        return 0.0;
    }
    const auto k = static_cast<std::size_t>(i);
    return spec.g[k] * std::exp(-spec.lam[k] * std::abs(t));
}

Eigen::Matrix3d pauli_rotation(const FreePrecession& fp, double t)
{
    const double c = std::cos(fp.omega0 * t);
    const double s = std::sin(fp.omega0 * t);
    const Eigen::Vector3d& n = fp.n;

    Eigen::Matrix3d u;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double cross = 0.0;
            for (int k = 0; k < 3; ++k) {
                cross += levi_civita(i, j, k) * n(k);
            }
            const double nn = n(i) * n(j);
            u(i, j) = nn + ((i == j ? 1.0 : 0.0) - nn) * c - cross * s;
        }
    }
    return u;
}

std::array<double, 3> lambda_weights(const NoiseSpec& spec, const FreePrecession& fp)
{
    std::array<double, 3> out{};
    const double w2 = fp.omega0 * fp.omega0;
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = spec.g[i] / (spec.lam[i] * spec.lam[i] + w2);
    }
    return out;
}

CMatrix c_matrix_closed(const NoiseSpec& spec, const FreePrecession& fp)
{
    const auto weights = lambda_weights(spec, fp);
    const double w = fp.omega0;
    const Eigen::Vector3d& n = fp.n;

    CMatrix c;
    for (int i = 0; i < 3; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double li = spec.lam[ui];
        for (int j = 0; j < 3; ++j) {
            double cross = 0.0;
            for (int k = 0; k < 3; ++k) {
                cross += levi_civita(i, j, k) * n(k);
            }
            // lambda Lambda [delta + (w/lambda)^2 n_i n_j + (w/lambda) eps n],
            // multiplied through by lambda to stay finite for any lambda > 0.
            c(i, j) = weights[ui] * ((i == j ? li : 0.0) + (w * w / li) * n(i) * n(j) + w * cross);
        }
    }
    return c;
}

CMatrix c_matrix_quadrature(const NoiseSpec& spec, const FreePrecession& fp)
{
    spec.validate();
    const double t_max = kTruncation / *std::min_element(spec.lam.begin(), spec.lam.end());

    std::unique_ptr<gsl_integration_workspace, GslWorkspaceDeleter> workspace(
        gsl_integration_workspace_alloc(kQuadratureIntervals));
    gsl_error_handler_t* previous = gsl_set_error_handler_off();

    CMatrix c = CMatrix::Zero();
    for (int i = 0; i < 3; ++i) {
        if (spec.g[static_cast<std::size_t>(i)] == 0.0) {
            continue;
        }
        for (int j = 0; j < 3; ++j) {
            IntegrandData data{&spec, &fp, i, j};
            gsl_function f{&c_integrand, &data};
            double result = 0.0;
            double abserr = 0.0;
            const int status = gsl_integration_qag(&f, 0.0, t_max, kQuadratureTolerance, 0.0,
                                                   kQuadratureIntervals, GSL_INTEG_GAUSS61,
                                                   workspace.get(), &result, &abserr);
            if (status != GSL_SUCCESS || abserr > kQuadratureTolerance) {
                gsl_set_error_handler(previous);
                std::ostringstream msg;
                msg << "quadrature for C(" << i << "," << j << ") did not converge: "
                    << gsl_strerror(status) << ", error estimate " << abserr;
                throw NumericalFailure(msg.str(), abserr);
            }
            c(i, j) = result;
        }
    }
    gsl_set_error_handler(previous);
    return c;
}

Eigen::Vector3d effective_hamiltonian(const NoiseSpec& spec, const FreePrecession& fp)
{
    const CMatrix c = c_matrix_closed(spec, fp);
    Eigen::Vector3d h = Eigen::Vector3d::Zero();
    for (int k = 0; k < 3; ++k) {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                h(k) += levi_civita(i, j, k) * c(i, j);
            }
        }
    }
    const Eigen::Vector3d mean(spec.mean[0], spec.mean[1], spec.mean[2]);
    return 0.5 * fp.omega0 * fp.n + mean + h;
}

KossakowskiMatrix kossakowski_from_noise(const NoiseSpec& spec, const FreePrecession& fp)
{
    const CMatrix c = c_matrix_closed(spec, fp);
    return KossakowskiMatrix{c + c.transpose()};
}

GeneratorMatrix generator_from_noise(const NoiseSpec& spec, const FreePrecession& fp)
{
    return build_generator(params_from_kossakowski(kossakowski_from_noise(spec, fp)),
                           effective_hamiltonian(spec, fp));
}

SimplifiedParams simplified_params(const NoiseSpec& spec, const FreePrecession& fp)
{
    require_simplified_regime(spec, fp);
    const auto w = lambda_weights(spec, fp);
    const auto& l = spec.lam;
    const double dephasing = 2.0 * spec.g[2] / l[2];

    SimplifiedParams out;
    out.params.a = 2.0 * l[1] * w[1] + dephasing;
    out.params.b = fp.omega0 * (w[1] - w[0]);
    out.params.alpha = 2.0 * l[0] * w[0] + dephasing;
    out.params.gamma = 2.0 * l[0] * w[0] + 2.0 * l[1] * w[1];
    out.omega = 0.5 * fp.omega0 + fp.omega0 * (w[0] + w[1]);
    return out;
}

double noise_cp_condition(const NoiseSpec& spec, const FreePrecession& fp)
{
    require_simplified_regime(spec, fp);
    const auto w = lambda_weights(spec, fp);
    const double diff = w[1] - w[0];
    return 4.0 * spec.lam[0] * spec.lam[1] * w[0] * w[1] - fp.omega0 * fp.omega0 * diff * diff;
}

} // namespace fiberpol
