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

// Double-pass Faraday-mirror experiment.
//
// A linearly polarized photon s+ = (1, 0, 0) is sent through the fiber once
// (time t) and, in a second run, there and back (time 2t). A circularly
// polarized photon sR = (0, 0, 1) is sent through once. From the measured
// Stokes components
//
//     R(t) = [ s+_1(2t) + s+_2(2t) s+_1(t) / s+_2(t) ] / sR_3(t)
//
// equals exp(-2 (a + alpha - gamma) t), so R(t) <= 1 is necessary for
// complete positivity, and sufficient when b = 0 and a = alpha.
//
// Relaxation times follow the usual two-level naming: T1 = 1/gamma for the
// populations and T2 = 1/alpha for the coherences. Note that s3 itself decays
// as exp(-2 gamma t), i.e. with rate 2/T1 in this convention.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fiberpol/generator.hpp"
#include "fiberpol/stokes.hpp"

namespace fiberpol {

struct ExperimentResult {
    double t{0.0};
    double r_value{0.0};   // assembled from Stokes components
    double r_closed{0.0};  // exp(-2 (a + alpha - gamma) t)
    StokesVector stokes_plus_single;
    StokesVector stokes_plus_double;
    StokesVector stokes_R_single;
    bool cp_verdict{false};
};

// Throws SingularConfiguration when |s+_2(t)| < 1e-12 or |sR_3(t)| < 1e-300,
// InvalidInput for t <= 0, UnsupportedConfiguration if c or beta != 0.
ExperimentResult r_observable(const DissipativeParams& p, double omega, double t);

// r_value <= 1 + 1e-10.
bool cp_test(const ExperimentResult& result);

struct RelaxationTimes {
    double t1{0.0};
    double t2{0.0};
    bool two_t1_geq_t2{false};
};

// Requires b = 0, a = alpha (1e-12), alpha > 0, gamma > 0.
RelaxationTimes relaxation_times(const DissipativeParams& p);

struct ScanPoint {
    double t{0.0};
    std::optional<ExperimentResult> result;
    std::string error; // set when result is empty
};

// Singular times are flagged per point instead of aborting the scan.
std::vector<ScanPoint> r_scan(const DissipativeParams& p, double omega, const std::vector<double>& times);

// True when every valid point of the scan gives the same verdict.
bool scan_verdicts_agree(const std::vector<ScanPoint>& scan);

} // namespace fiberpol
