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

#include "fiberpol/stochastic.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>

#include "fiberpol/errors.hpp"
#include "fiberpol/philox.hpp"
#include "fiberpol/propagator.hpp"

namespace fiberpol {

namespace {

using cd = std::complex<double>;

// Trajectories are split into at most this many fixed blocks; the partition
// depends only on n_traj.
constexpr std::size_t kMaxBlocks = 64;

enum Substream : std::uint32_t {
    kForward = 0,
    kBackward = 1,
    kCircularProbe = 2,
};

// Running mean and co-moment (Welford / Chan et al. pairwise merge).
template <int N>
struct Moments {
    using Vec = Eigen::Matrix<double, N, 1>;
    using Mat = Eigen::Matrix<double, N, N>;

    double count{0.0};
    Vec mean{Vec::Zero()};
    Mat comoment{Mat::Zero()};

    void add(const Vec& x)
    {
        count += 1.0;
        const Vec delta = x - mean;
        mean += delta / count;
        comoment += delta * (x - mean).transpose();
    }

    void merge(const Moments& other)
    {
        if (other.count == 0.0) {
            return;
        }
        if (count == 0.0) {
            *this = other;
            return;
        }
        const double total = count + other.count;
        const Vec delta = other.mean - mean;
        mean += delta * (other.count / total);
        comoment += other.comoment + delta * delta.transpose() * (count * other.count / total);
        count = total;
    }

    // Covariance matrix of the sample mean.
    Mat mean_covariance() const
    {
        if (count < 2.0) {
            return Mat::Zero();
        }
        return comoment / ((count - 1.0) * count);
    }
};

struct OuCoefficients {
    double decay{1.0};
    double amplitude{0.0};
    double stationary_sd{0.0};
};

inline double ou_update(double f_prev, const OuCoefficients& c, double noise)
{
    return f_prev * c.decay + c.amplitude * noise;
}

OuCoefficients ou_coefficients(double g, double lam, double dt)
{
    OuCoefficients c;
    c.decay = std::exp(-lam * dt);
    // 1 - e^{-2 lam dt} without cancellation for small lam dt.
    c.amplitude = std::sqrt(g * -std::expm1(-2.0 * lam * dt));
    c.stationary_sd = std::sqrt(g);
    return c;
}

// One stretch of fiber traversed with fixed H0 and a fresh stationary noise
// realization.
struct Segment {
    Eigen::Vector3d h_static;  // (omega0/2) n + <F>
    std::array<OuCoefficients, 3> ou;
    double dt{0.0};

    Segment(const NoiseSpec& spec, double omega0, const Eigen::Vector3d& n, double step)
        : h_static(0.5 * omega0 * n + Eigen::Vector3d(spec.mean[0], spec.mean[1], spec.mean[2])),
          dt(step)
    {
        for (std::size_t i = 0; i < 3; ++i) {
            ou[i] = ou_coefficients(spec.g[i], spec.lam[i], dt);
        }
    }

    // Evolves sigma through n_steps, calling on_record(k, sigma) after every
    // record_every-th step (k = 1, 2, ...).
    template <class OnRecord>
    void run(Eigen::Matrix2cd& sigma, NormalStream& rng, std::size_t n_steps,
             std::size_t record_every, OnRecord&& on_record) const
    {
        std::array<double, 3> f{};
        for (std::size_t i = 0; i < 3; ++i) {
            f[i] = ou[i].stationary_sd * rng.next();
        }
        for (std::size_t step = 1; step <= n_steps; ++step) {
            const Eigen::Vector3d h = h_static + Eigen::Vector3d(f[0], f[1], f[2]);
            apply_step_unitary(sigma, h);
            for (std::size_t i = 0; i < 3; ++i) {
                f[i] = ou_update(f[i], ou[i], rng.next());
            }
            if (step % record_every == 0) {
                on_record(step / record_every, sigma);
            }
        }
    }

    // sigma -> U sigma U^dagger, U = cos(|h| dt) - i sin(|h| dt)/|h| (h . sigma).
    void apply_step_unitary(Eigen::Matrix2cd& sigma, const Eigen::Vector3d& h) const
    {
        const double norm = h.norm();
        const double c = std::cos(norm * dt);
        const double s = norm > 0.0 ? std::sin(norm * dt) / norm : dt;

        Eigen::Matrix2cd u;
        u(0, 0) = cd(c, -s * h(2));
        u(0, 1) = cd(-s * h(1), -s * h(0));
        u(1, 0) = cd(s * h(1), -s * h(0));
        u(1, 1) = cd(c, s * h(2));
        sigma = (u * sigma * u.adjoint()).eval();
    }
};

unsigned resolve_workers(unsigned workers)
{
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    return workers;
}

// Calls fn(block) for every block, spreading blocks over worker threads.
template <class Fn>
void run_blocks(std::size_t n_blocks, unsigned workers, Fn&& fn)
{
    const auto n_workers = static_cast<std::size_t>(resolve_workers(workers));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto body = [&]() {
        for (;;) {
            const std::size_t block = next.fetch_add(1);
            if (block >= n_blocks) {
                return;
            }
            try {
                fn(block);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };

    const std::size_t n_threads = std::min(n_workers, n_blocks);
    if (n_threads <= 1) {
        body();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) {
            pool.emplace_back(body);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

// Runs simulate(traj_index, accumulator) over all trajectories, block by
// block, and merges block accumulators in block order.
template <class Acc, class Simulate, class Merge>
Acc reduce_trajectories(std::size_t n_traj, unsigned workers, const Acc& empty,
                        Simulate&& simulate, Merge&& merge)
{
    const std::size_t n_blocks = std::min(n_traj, kMaxBlocks);
    std::vector<Acc> partial(n_blocks, empty);
    run_blocks(n_blocks, workers, [&](std::size_t block) {
        const std::size_t begin = block * n_traj / n_blocks;
        const std::size_t end = (block + 1) * n_traj / n_blocks;
        for (std::size_t k = begin; k < end; ++k) {
            simulate(k, partial[block]);
        }
    });
    Acc total = empty;
    for (const Acc& acc : partial) {
        merge(total, acc);
    }
    return total;
}

using RecordMoments = std::vector<Moments<3>>;

void merge_records(RecordMoments& into, const RecordMoments& from)
{
    for (std::size_t r = 0; r < into.size(); ++r) {
        into[r].merge(from[r]);
    }
}

EnsembleTrajectory summarize(const RecordMoments& records, double record_dt, std::size_t n_traj)
{
    EnsembleTrajectory out;
    out.n_traj = n_traj;
    out.times.reserve(records.size());
    out.mean_stokes.reserve(records.size());
    out.stderr_of_mean.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        out.times.push_back(static_cast<double>(r) * record_dt);
        out.mean_stokes.push_back(StokesVector::from(records[r].mean));
        out.stderr_of_mean.push_back(records[r].mean_covariance().diagonal().cwiseSqrt());
    }
    return out;
}

void require_mirror_regime(const NoiseSpec& spec, const FreePrecession& fp)
{
    if ((fp.n - Eigen::Vector3d(0.0, 0.0, 1.0)).cwiseAbs().maxCoeff() > 1e-12) {
        throw UnsupportedConfiguration("double-pass simulation requires n = (0, 0, 1)");
    }
    for (double m : spec.mean) {
        if (std::abs(m) > 1e-12) {
            throw UnsupportedConfiguration("double-pass simulation requires zero-mean noise");
        }
    }
}

std::uint32_t trajectory_id(std::size_t k)
{
    return static_cast<std::uint32_t>(k);
}

} // namespace

void TrajectoryConfig::validate(const NoiseSpec& spec, const FreePrecession& fp) const
{
    spec.validate();
    fp.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidInput("trajectory.dt must be positive");
    }
    double fastest = std::abs(fp.omega0);
    for (std::size_t i = 0; i < 3; ++i) {
        fastest = std::max({fastest, spec.lam[i], std::sqrt(spec.g[i])});
    }
    if (dt * fastest > kMaxStepProduct) {
        std::ostringstream msg;
        msg << "trajectory.dt too large: dt * max(lambda, omega0, sqrt(G)) = " << dt * fastest
            << " exceeds " << kMaxStepProduct;
        throw InvalidInput(msg.str());
    }
    if (n_steps == 0) {
        throw InvalidInput("trajectory.n_steps must be positive");
    }
    if (n_traj < kMinTrajectories) {
        throw InvalidInput("trajectory.n_traj must be at least 100");
    }
    if (n_traj > 0xFFFFFFFFull) {
        throw InvalidInput("trajectory.n_traj exceeds the 32-bit trajectory counter");
    }
    if (record_every == 0 || n_steps % record_every != 0) {
        throw InvalidInput("trajectory.record_every must be positive and divide n_steps");
    }
    if (!is_physical(initial)) {
        throw InvalidInput("trajectory.initial must lie in the unit ball");
    }
}

double ou_step(double f_prev, double g, double lam, double dt, double noise)
{
    return ou_update(f_prev, ou_coefficients(g, lam, dt), noise);
}

std::vector<StokesVector> evolve_trajectory(const NoiseSpec& spec, const FreePrecession& fp,
                                            const TrajectoryConfig& cfg, std::size_t traj_index)
{
    cfg.validate(spec, fp);
    if (traj_index >= cfg.n_traj) {
        throw InvalidInput("trajectory index out of range");
    }

    const Segment segment(spec, fp.omega0, fp.n, cfg.dt);
    NormalStream rng(cfg.seed, trajectory_id(traj_index), kForward);
    Eigen::Matrix2cd sigma = density_from_stokes(cfg.initial).m;

    std::vector<StokesVector> out;
    out.reserve(cfg.n_records());
    out.push_back(cfg.initial);
    segment.run(sigma, rng, cfg.n_steps, cfg.record_every,
                [&](std::size_t, const Eigen::Matrix2cd& s) {
                    out.push_back(StokesVector::from(bloch_components(s)));
                });
    return out;
}

EnsembleTrajectory ensemble_average(const NoiseSpec& spec, const FreePrecession& fp,
                                    const TrajectoryConfig& cfg, unsigned workers)
{
    cfg.validate(spec, fp);
    const Segment segment(spec, fp.omega0, fp.n, cfg.dt);
    const Eigen::Matrix2cd start = density_from_stokes(cfg.initial).m;
    const Eigen::Vector3d initial = cfg.initial.vec();

    auto simulate = [&](std::size_t k, RecordMoments& acc) {
        NormalStream rng(cfg.seed, trajectory_id(k), kForward);
        Eigen::Matrix2cd sigma = start;
        acc[0].add(initial);
        segment.run(sigma, rng, cfg.n_steps, cfg.record_every,
                    [&](std::size_t r, const Eigen::Matrix2cd& s) { acc[r].add(bloch_components(s)); });
    };

    const RecordMoments total = reduce_trajectories(
        cfg.n_traj, workers, RecordMoments(cfg.n_records()), simulate, merge_records);
    return summarize(total, cfg.dt * static_cast<double>(cfg.record_every), cfg.n_traj);
}

EnsembleTrajectory mc_double_pass(const NoiseSpec& spec, const FreePrecession& fp,
                                  const TrajectoryConfig& cfg, unsigned workers)
{
    cfg.validate(spec, fp);
    require_mirror_regime(spec, fp);

    const Segment forward(spec, fp.omega0, fp.n, cfg.dt);
    const Segment backward(spec, -fp.omega0, fp.n, cfg.dt);
    const Eigen::Matrix2cd start = density_from_stokes(cfg.initial).m;
    const Eigen::Vector3d initial = cfg.initial.vec();
    const std::size_t per_pass = cfg.n_records() - 1;

    auto simulate = [&](std::size_t k, RecordMoments& acc) {
        Eigen::Matrix2cd sigma = start;
        acc[0].add(initial);
        NormalStream out_rng(cfg.seed, trajectory_id(k), kForward);
        forward.run(sigma, out_rng, cfg.n_steps, cfg.record_every,
                    [&](std::size_t r, const Eigen::Matrix2cd& s) { acc[r].add(bloch_components(s)); });
        NormalStream back_rng(cfg.seed, trajectory_id(k), kBackward);
        backward.run(sigma, back_rng, cfg.n_steps, cfg.record_every,
                     [&](std::size_t r, const Eigen::Matrix2cd& s) {
                         acc[per_pass + r].add(bloch_components(s));
                     });
    };

    const RecordMoments total = reduce_trajectories(
        cfg.n_traj, workers, RecordMoments(2 * per_pass + 1), simulate, merge_records);
    return summarize(total, cfg.dt * static_cast<double>(cfg.record_every), cfg.n_traj);
}

McRObservable mc_r_observable(const NoiseSpec& spec, const FreePrecession& fp,
                              const TrajectoryConfig& cfg, unsigned workers)
{
    cfg.validate(spec, fp);
    require_mirror_regime(spec, fp);

    const Segment forward(spec, fp.omega0, fp.n, cfg.dt);
    const Segment backward(spec, -fp.omega0, fp.n, cfg.dt);
    const Eigen::Matrix2cd linear = density_from_stokes({1.0, 0.0, 0.0}).m;
    const Eigen::Matrix2cd circular = density_from_stokes({0.0, 0.0, 1.0}).m;
    auto keep_last = [](std::size_t, const Eigen::Matrix2cd&) {};

    // Per trajectory: (s+(t), s+(2t), sR(t)).
    using Sample = Moments<9>;
    auto simulate = [&](std::size_t k, Sample& acc) {
        Sample::Vec v;
        Eigen::Matrix2cd sigma = linear;
        NormalStream out_rng(cfg.seed, trajectory_id(k), kForward);
        forward.run(sigma, out_rng, cfg.n_steps, cfg.n_steps, keep_last);
        v.segment<3>(0) = bloch_components(sigma);
        NormalStream back_rng(cfg.seed, trajectory_id(k), kBackward);
        backward.run(sigma, back_rng, cfg.n_steps, cfg.n_steps, keep_last);
        v.segment<3>(3) = bloch_components(sigma);

        Eigen::Matrix2cd probe = circular;
        NormalStream probe_rng(cfg.seed, trajectory_id(k), kCircularProbe);
        forward.run(probe, probe_rng, cfg.n_steps, cfg.n_steps, keep_last);
        v.segment<3>(6) = bloch_components(probe);
        acc.add(v);
    };

    const Sample total = reduce_trajectories(
        cfg.n_traj, workers, Sample{}, simulate,
        [](Sample& into, const Sample& from) { into.merge(from); });

    const auto& m = total.mean;
    const double y1 = m(0);
    const double y2 = m(1);
    const double x1 = m(3);
    const double x2 = m(4);
    const double z = m(8);
    if (std::abs(y2) < 1e-12 || std::abs(z) < 1e-300) {
        throw SingularConfiguration("ensemble-mean R(t) is singular at this time; choose a different n_steps");
    }

    McRObservable out;
    out.t = cfg.dt * static_cast<double>(cfg.n_steps);
    out.n_traj = cfg.n_traj;
    out.plus_single = StokesVector::from(m.segment<3>(0));
    out.plus_double = StokesVector::from(m.segment<3>(3));
    out.circular_single = StokesVector::from(m.segment<3>(6));
    out.r_value = (x1 + x2 * y1 / y2) / z;

    Sample::Vec grad = Sample::Vec::Zero();
    grad(0) = x2 / (y2 * z);
    grad(1) = -x2 * y1 / (y2 * y2 * z);
    grad(3) = 1.0 / z;
    grad(4) = y1 / (y2 * z);
    grad(8) = -out.r_value / z;
    out.r_stderr = std::sqrt(std::max(0.0, grad.dot(total.mean_covariance() * grad)));

    const DissipativeParams p = simplified_params(spec, fp).params;
    out.r_predicted = std::exp(-2.0 * (p.a + p.alpha - p.gamma) * out.t);
    out.z = out.r_stderr > 0.0 ? (out.r_value - out.r_predicted) / out.r_stderr : 0.0;
    return out;
}

MasterComparison compare_with_master(const EnsembleTrajectory& mc, const NoiseSpec& spec,
                                     const FreePrecession& fp, const StokesVector& initial)
{
    const GeneratorMatrix g = generator_from_noise(spec, fp);
    const Eigen::Vector3d s0 = initial.vec();

    MasterComparison out;
    out.times = mc.times;
    std::size_t above = 0;
    std::size_t total = 0;
    for (std::size_t r = 0; r < mc.times.size(); ++r) {
        const Eigen::Vector3d master = mueller_exact(g, mc.times[r]).m * s0;
        const Eigen::Vector3d mean = mc.mean_stokes[r].vec();
        const Eigen::Vector3d& se = mc.stderr_of_mean[r];
        Eigen::Vector3d z;
        for (int i = 0; i < 3; ++i) {
            const double diff = mean(i) - master(i);
            if (se(i) > 0.0) {
                z(i) = diff / se(i);
            } else if (std::abs(diff) <= 1e-9) {
                z(i) = 0.0;
            } else {
                z(i) = std::copysign(std::numeric_limits<double>::infinity(), diff);
            }
            out.max_abs_z = std::max(out.max_abs_z, std::abs(z(i)));
            above += std::abs(z(i)) > 3.0 ? 1 : 0;
            ++total;
        }
        out.mc_mean.push_back(mean);
        out.master.push_back(master);
        out.stderr_of_mean.push_back(se);
        out.z.push_back(z);
    }
    out.fraction_above_3 = total > 0 ? static_cast<double>(above) / static_cast<double>(total) : 0.0;
    out.systematic_deviation = out.max_abs_z > 5.0;
    return out;
}

MasterComparison mc_vs_master_report(const NoiseSpec& spec, const FreePrecession& fp,
                                     const TrajectoryConfig& cfg, unsigned workers)
{
    const EnsembleTrajectory mc = ensemble_average(spec, fp, cfg, workers);
    return compare_with_master(mc, spec, fp, cfg.initial);
}

} // namespace fiberpol
