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

// Brute-force reference for the master equation: integrate
//
//     d Sigma/dt = -i [H0 + F(t) . sigma, Sigma]
//
// for individual Ornstein-Uhlenbeck realizations of F(t) and average the
// Stokes vectors over an ensemble.
//
// Each step holds F constant (sampled at the step start) and applies the
// exact unitary exp(-i h . sigma dt) = cos(|h| dt) - i sin(|h| dt) h^ . sigma.
// Noise for trajectory k comes from its own Philox substreams keyed by the
// seed, so ensemble results depend only on (seed, config, noise, precession).
// Partial sums are formed over a fixed partition of the trajectories and
// merged in a fixed order, which keeps the output bit-identical for any
// worker count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fiberpol/noise_model.hpp"
#include "fiberpol/stokes.hpp"

namespace fiberpol {

struct TrajectoryConfig {
    double dt{1e-3};
    std::size_t n_steps{1000};
    std::size_t n_traj{1000};
    std::uint64_t seed{0};
    StokesVector initial{1.0, 0.0, 0.0};
    // Keep every k-th step in the recorded output.
    std::size_t record_every{1};

    // dt * max(lambda_i, |omega0|, sqrt(G_i)) must not exceed this.
    static constexpr double kMaxStepProduct = 0.05;
    static constexpr std::size_t kMinTrajectories = 100;

    // Throws InvalidInput naming the violated constraint.
    void validate(const NoiseSpec& spec, const FreePrecession& fp) const;

    std::size_t n_records() const { return n_steps / record_every + 1; }
};

struct EnsembleTrajectory {
    std::vector<double> times;
    std::vector<StokesVector> mean_stokes;
    std::vector<Eigen::Vector3d> stderr_of_mean;
    std::size_t n_traj{0};
};

// Exact-in-distribution OU update with stationary variance g and
// correlation time 1/lam; `noise` is a standard normal draw. The process is
// zero-mean; constant means are added by the caller.
double ou_step(double f_prev, double g, double lam, double dt, double noise);

// Recorded Stokes vectors of one noise realization (n_records() entries).
std::vector<StokesVector> evolve_trajectory(const NoiseSpec& spec, const FreePrecession& fp,
                                            const TrajectoryConfig& cfg, std::size_t traj_index);

// workers = 0 uses std::thread::hardware_concurrency().
EnsembleTrajectory ensemble_average(const NoiseSpec& spec, const FreePrecession& fp,
                                    const TrajectoryConfig& cfg, unsigned workers = 0);

// Forward pass with omega0 for n_steps, then a return pass with -omega0 and an
// independent noise realization. Requires n = z and zero-mean noise.
// Records cover [0, 2 n_steps dt].
EnsembleTrajectory mc_double_pass(const NoiseSpec& spec, const FreePrecession& fp,
                                  const TrajectoryConfig& cfg, unsigned workers = 0);

// Double-pass observable R assembled from ensemble means at t = n_steps dt,
// with a delta-method standard error from the per-trajectory covariance.
// cfg.initial is ignored: the linear and circular probe states are fixed.
struct McRObservable {
    double t{0.0};
    double r_value{0.0};
    double r_stderr{0.0};
    double r_predicted{0.0};  // exp(-2 (a + alpha - gamma) t) from the noise model
    double z{0.0};
    StokesVector plus_single;
    StokesVector plus_double;
    StokesVector circular_single;
    std::size_t n_traj{0};
};

McRObservable mc_r_observable(const NoiseSpec& spec, const FreePrecession& fp,
                              const TrajectoryConfig& cfg, unsigned workers = 0);

struct MasterComparison {
    std::vector<double> times;
    std::vector<Eigen::Vector3d> mc_mean;
    std::vector<Eigen::Vector3d> master;
    std::vector<Eigen::Vector3d> stderr_of_mean;
    // (mc - master) / stderr; zero when both paths agree to 1e-9 with zero stderr.
    std::vector<Eigen::Vector3d> z;
    double max_abs_z{0.0};
    double fraction_above_3{0.0};
    // max |z| > 5: the Markovian master equation misses the ensemble at this
    // coupling (informative, not an error).
    bool systematic_deviation{false};
};

MasterComparison mc_vs_master_report(const NoiseSpec& spec, const FreePrecession& fp,
                                     const TrajectoryConfig& cfg, unsigned workers = 0);

// Compare an existing ensemble against the master equation.
MasterComparison compare_with_master(const EnsembleTrajectory& mc, const NoiseSpec& spec,
                                     const FreePrecession& fp, const StokesVector& initial);

} // namespace fiberpol
