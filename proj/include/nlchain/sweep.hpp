#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "nlchain/energy.hpp"
#include "nlchain/errors.hpp"
#include "nlchain/integrator.hpp"
#include "nlchain/model.hpp"

namespace nlchain {

/// Cartesian experiment grid: every (damping, frequency, amplitude) triple is
/// one simulation. Amplitudes vary fastest, dampings slowest.
struct SweepSpec {
    std::vector<double> amplitudes;
    std::vector<double> frequencies;
    std::vector<double> dampings;
    ChainParams base;         ///< damping field is overridden per point
    TimeGrid grid;
    double ramp_time = 50.0;
    double newton_tol = 1e-4;
    int max_newton_iters = 50;

    void validate() const {
        base.validate();
        grid.validate();
        auto check_axis = [](const std::vector<double>& v, const char* key) {
            if (v.empty()) throw ValidationError(key, "list must be nonempty");
            for (std::size_t i = 1; i < v.size(); ++i)
                if (!(v[i] > v[i - 1]))
                    throw ValidationError(key, "list must be strictly increasing");
        };
        check_axis(amplitudes, "sweep.amplitudes");
        check_axis(frequencies, "sweep.frequencies");
        check_axis(dampings, "sweep.dampings");
        for (double a : amplitudes)
            if (!(a >= 0.0)) throw ValidationError("sweep.amplitudes", "must be >= 0");
        for (double f : frequencies)
            if (!(f > 0.0)) throw ValidationError("sweep.frequencies", "must be > 0");
        for (double g : dampings)
            if (!(g >= 0.0)) throw ValidationError("sweep.dampings", "must be >= 0");
        if (!(ramp_time >= 0.0)) throw ValidationError("ramp_time", "must be >= 0");
        if (!(newton_tol > 0.0)) throw ValidationError("newton_tol", "must be > 0");
        if (max_newton_iters < 1) throw ValidationError("max_newton_iters", "must be >= 1");
    }

    /// Frequencies outside the forbidden band gap; permitted, but callers
    /// should label them since supratransmission is a gap phenomenon.
    std::vector<double> out_of_gap_frequencies() const {
        std::vector<double> out;
        for (double f : frequencies)
            if (!in_band_gap(f)) out.push_back(f);
        return out;
    }
};

/// One completed (or failed) simulation of a sweep. Failed runs keep their
/// slot with converged = false and NaN observables.
struct SweepPoint {
    double frequency = 0.0;
    double amplitude = 0.0;
    double damping = 0.0;
    double integrated_energy = 0.0;     ///< E_T'
    bool converged = true;
    double max_node_amplitude = 0.0;    ///< max |u_n^k| over interior nodes, all times
    double min_local_energy = 0.0;      ///< diagnostics: smallest H_n^k seen
    double min_total_energy = 0.0;      ///< diagnostics: smallest E^k seen
};

struct ThresholdPoint {
    double frequency = 0.0;
    double damping = 0.0;
    double amplitude = 0.0; ///< detected A_s
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<ThresholdPoint> threshold_curve;
};

namespace detail {

/// Runs fn(0..count-1) on up to `workers` threads. Each index writes only its
/// own slot, so results are identical for any worker count.
inline void parallel_for_index(std::size_t count, int workers,
                               const std::function<void(std::size_t)>& fn) {
    if (workers <= 0)
        workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    const int n_threads = static_cast<int>(
        std::min<std::size_t>(count, static_cast<std::size_t>(workers)));
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline SweepPoint run_sweep_point(const SweepSpec& spec, double frequency,
                                  double amplitude, double damping) {
    SweepPoint pt;
    pt.frequency = frequency;
    pt.amplitude = amplitude;
    pt.damping = damping;

    ChainParams params = spec.base;
    params.damping = damping;
    const Driving driving{amplitude, frequency, spec.ramp_time};
    try {
        const Trajectory traj = run_simulation(params, driving, spec.grid,
                                               spec.newton_tol, spec.max_newton_iters);
        const EnergyRecord rec = compute_energy_record(traj, /*keep_local=*/false);
        pt.integrated_energy = rec.integrated;
        pt.min_local_energy = rec.min_local;
        pt.min_total_energy = rec.min_total;
        double max_amp = 0.0;
        for (int k = 0; k <= traj.grid.n_steps; ++k) {
            const auto row = traj.state(k);
            for (int n = 1; n < params.n_nodes; ++n)
                max_amp = std::max(max_amp, std::abs(row[n]));
        }
        pt.max_node_amplitude = max_amp;
    } catch (const NewtonDivergedError&) {
        pt.converged = false;
    } catch (const SingularMatrixError&) {
        pt.converged = false;
    }
    if (!pt.converged) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        pt.integrated_energy = nan;
        pt.max_node_amplitude = nan;
        pt.min_local_energy = nan;
        pt.min_total_energy = nan;
    }
    return pt;
}

struct Job {
    double frequency, amplitude, damping;
};

inline std::vector<SweepPoint> run_jobs(const SweepSpec& spec,
                                        const std::vector<Job>& jobs, int workers) {
    std::vector<SweepPoint> points(jobs.size());
    parallel_for_index(jobs.size(), workers, [&](std::size_t i) {
        points[i] = run_sweep_point(spec, jobs[i].frequency, jobs[i].amplitude,
                                    jobs[i].damping);
    });
    return points;
}

} // namespace detail

/// Locates the supratransmission threshold on an (amplitude, E_T') curve: the
/// midpoint of the consecutive pair with the largest energy ratio, provided
/// that ratio reaches jump_factor. Returns nullopt when no pair jumps enough.
/// Requires >= 3 points with strictly increasing amplitudes.
struct AmplitudeEnergy {
    double amplitude;
    double integrated_energy;
};

inline std::optional<double> detect_threshold(std::span<const AmplitudeEnergy> points,
                                              double jump_factor = 3.0) {
    if (points.size() < 3)
        throw ValidationError("points", "threshold detection needs >= 3 points");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i].amplitude > points[i - 1].amplitude))
            throw ValidationError("points", "amplitudes must be strictly increasing");

    constexpr double energy_floor = 1e-12;
    double best_ratio = -1.0;
    std::size_t best_index = 0;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double ratio = points[i + 1].integrated_energy /
                             std::max(points[i].integrated_energy, energy_floor);
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_index = i;
        }
    }
    if (best_ratio < jump_factor) return std::nullopt;
    return 0.5 * (points[best_index].amplitude + points[best_index + 1].amplitude);
}

namespace detail {

/// Converged points only, as (A, E_T') pairs for threshold detection.
inline std::vector<AmplitudeEnergy> converged_curve(std::span<const SweepPoint> points) {
    std::vector<AmplitudeEnergy> curve;
    curve.reserve(points.size());
    for (const auto& pt : points)
        if (pt.converged) curve.push_back({pt.amplitude, pt.integrated_energy});
    return curve;
}

inline std::optional<double> detect_on_points(std::span<const SweepPoint> points,
                                              double jump_factor) {
    const auto curve = converged_curve(points);
    if (curve.size() < 3) return std::nullopt;
    return detect_threshold(curve, jump_factor);
}

} // namespace detail

/// One amplitude sweep at a single frequency and damping. Each amplitude is an
/// independent simulation; points come back in amplitude order regardless of
/// how many workers ran them.
inline SweepResult amplitude_sweep(const SweepSpec& spec, double jump_factor = 3.0,
                                   int workers = 0) {
    spec.validate();
    if (spec.frequencies.size() != 1)
        throw ValidationError("sweep.frequencies", "amplitude sweep needs exactly one frequency");
    if (spec.dampings.size() != 1)
        throw ValidationError("sweep.dampings", "amplitude sweep needs exactly one damping");

    std::vector<detail::Job> jobs;
    jobs.reserve(spec.amplitudes.size());
    for (double a : spec.amplitudes)
        jobs.push_back({spec.frequencies[0], a, spec.dampings[0]});

    SweepResult result;
    result.points = detail::run_jobs(spec, jobs, workers);
    if (const auto a_s = detail::detect_on_points(result.points, jump_factor))
        result.threshold_curve.push_back({spec.frequencies[0], spec.dampings[0], *a_s});
    return result;
}

/// Amplitude sweeps across a frequency grid at one damping; the threshold
/// curve collects (frequency, A_s) wherever detection succeeds.
inline SweepResult bifurcation_surface(const SweepSpec& spec, double jump_factor = 3.0,
                                       int workers = 0) {
    spec.validate();
    if (spec.dampings.size() != 1)
        throw ValidationError("sweep.dampings", "bifurcation surface needs exactly one damping");

    std::vector<detail::Job> jobs;
    jobs.reserve(spec.frequencies.size() * spec.amplitudes.size());
    for (double f : spec.frequencies)
        for (double a : spec.amplitudes)
            jobs.push_back({f, a, spec.dampings[0]});

    SweepResult result;
    result.points = detail::run_jobs(spec, jobs, workers);
    const std::size_t stride = spec.amplitudes.size();
    for (std::size_t fi = 0; fi < spec.frequencies.size(); ++fi) {
        const std::span<const SweepPoint> group{result.points.data() + fi * stride, stride};
        if (const auto a_s = detail::detect_on_points(group, jump_factor))
            result.threshold_curve.push_back(
                {spec.frequencies[fi], spec.dampings[0], *a_s});
    }
    return result;
}

/// Amplitude sweeps across a damping grid at one frequency; the threshold
/// curve collects (damping, A_s) per damping value.
inline SweepResult damping_study(const SweepSpec& spec, double jump_factor = 3.0,
                                 int workers = 0) {
    spec.validate();
    if (spec.frequencies.size() != 1)
        throw ValidationError("sweep.frequencies", "damping study needs exactly one frequency");

    std::vector<detail::Job> jobs;
    jobs.reserve(spec.dampings.size() * spec.amplitudes.size());
    for (double g : spec.dampings)
        for (double a : spec.amplitudes)
            jobs.push_back({spec.frequencies[0], a, g});

    SweepResult result;
    result.points = detail::run_jobs(spec, jobs, workers);
    const std::size_t stride = spec.amplitudes.size();
    for (std::size_t gi = 0; gi < spec.dampings.size(); ++gi) {
        const std::span<const SweepPoint> group{result.points.data() + gi * stride, stride};
        if (const auto a_s = detail::detect_on_points(group, jump_factor))
            result.threshold_curve.push_back(
                {spec.frequencies[0], spec.dampings[gi], *a_s});
    }
    return result;
}

} // namespace nlchain
