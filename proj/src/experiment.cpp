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

#include "fiberpol/experiment.hpp"

#include <cmath>
#include <sstream>

#include "fiberpol/errors.hpp"
#include "fiberpol/propagator.hpp"

namespace fiberpol {

namespace {

constexpr double kVerdictTolerance = 1e-10;
constexpr double kCoherenceFloor = 1e-12;
constexpr double kPopulationFloor = 1e-300;

} // namespace

ExperimentResult r_observable(const DissipativeParams& p, double omega, double t)
{
    if (!(t > 0.0)) {
        throw InvalidInput("experiment time must be positive");
    }
    const StokesVector linear{1.0, 0.0, 0.0};
    const StokesVector circular{0.0, 0.0, 1.0};

    const MuellerMatrix forward = mueller_closed_form(p, omega, t);

    ExperimentResult out;
    out.t = t;
    out.stokes_plus_single = forward.apply(linear);
    out.stokes_plus_double = double_pass(p, omega, t, linear);
    out.stokes_R_single = forward.apply(circular);

    const double coherence = out.stokes_plus_single.rho2;
    const double population = out.stokes_R_single.rho3;
    if (std::abs(coherence) < kCoherenceFloor || std::abs(population) < kPopulationFloor) {
        std::ostringstream msg;
        msg << "R(t) is singular at t = " << t << " (s+_2(t) = " << coherence
            << ", sR_3(t) = " << population << "); choose a different time";
        throw SingularConfiguration(msg.str());
    }

    const StokesVector& twice = out.stokes_plus_double;
    out.r_value = (twice.rho1 + twice.rho2 * out.stokes_plus_single.rho1 / coherence) / population;
    out.r_closed = std::exp(-2.0 * (p.a + p.alpha - p.gamma) * t);
    out.cp_verdict = cp_test(out);
    return out;
}

bool cp_test(const ExperimentResult& result)
{
    return result.r_value <= 1.0 + kVerdictTolerance;
}

RelaxationTimes relaxation_times(const DissipativeParams& p)
{
    if (std::abs(p.b) > 1e-12 || std::abs(p.a - p.alpha) > 1e-12) {
        throw UnsupportedConfiguration("relaxation times are defined only for b = 0 and a = alpha");
    }
    if (!(p.alpha > 0.0) || !(p.gamma > 0.0)) {
        throw UnsupportedConfiguration("relaxation times need alpha > 0 and gamma > 0");
    }
    RelaxationTimes out;
    out.t1 = 1.0 / p.gamma;
    out.t2 = 1.0 / p.alpha;
    out.two_t1_geq_t2 = 2.0 * out.t1 >= out.t2;
    return out;
}

std::vector<ScanPoint> r_scan(const DissipativeParams& p, double omega, const std::vector<double>& times)
{
    std::vector<ScanPoint> out;
    out.reserve(times.size());
    for (double t : times) {
        ScanPoint point;
        point.t = t;
        try {
            point.result = r_observable(p, omega, t);
        } catch (const SingularConfiguration& e) {
            point.error = e.what();
        }
        out.push_back(std::move(point));
    }
    return out;
}

bool scan_verdicts_agree(const std::vector<ScanPoint>& scan)
{
    std::optional<bool> verdict;
    for (const auto& point : scan) {
        if (!point.result) {
            continue;
        }
        if (!verdict) {
            verdict = point.result->cp_verdict;
        } else if (*verdict != point.result->cp_verdict) {
            return false;
        }
    }
    return true;
}

} // namespace fiberpol
