#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nlchain/errors.hpp"
#include "nlchain/integrator.hpp"
#include "nlchain/model.hpp"

namespace nlchain {

namespace detail {

inline void check_energy_indices(const Trajectory& traj, int n, int k,
                                 bool check_node = true) {
    const int n_nodes = traj.params.n_nodes;
    const int n_steps = traj.grid.n_steps;
    if (check_node && (n < 1 || n > n_nodes - 1))
        throw IndexError("node index " + std::to_string(n) + " outside [1, " +
                         std::to_string(n_nodes - 1) + "]");
    if (k < 1 || k > n_steps - 1)
        throw IndexError("time index " + std::to_string(k) + " outside [1, " +
                         std::to_string(n_steps - 1) + "]");
}

} // namespace detail

/// Discrete local energy of node n at time index k:
///   H_n^k = 1/2 [ (delta_t u_n^k)^2
///               + sum_{j=n-1}^{n} sum_{l=k}^{k+1} (delta_x u_j^l)^2 / 4 ]
///         + [V(u_n^{k+1}) + V(u_n^k)] / 2,
/// with delta_t u_n^k = (u_n^{k+1} - u_n^k)/dt and delta_x u_j^l = c (u_{j+1}^l - u_j^l).
/// Nonnegative for every potential with V >= 0. Defined for 1 <= n <= N-1,
/// 1 <= k <= M-1.
inline double local_energy(const Trajectory& traj, int n, int k) {
    detail::check_energy_indices(traj, n, k);
    const double c = traj.params.coupling;
    const auto curr = traj.state(k);
    const auto next = traj.state(k + 1);

    const double rate = (next[n] - curr[n]) / traj.grid.dt;
    double grad = 0.0;
    for (int j = n - 1; j <= n; ++j) {
        const double gx_curr = c * (curr[j + 1] - curr[j]);
        const double gx_next = c * (next[j + 1] - next[j]);
        grad += (gx_curr * gx_curr + gx_next * gx_next) / 4.0;
    }
    const double pot = 0.5 * (eval_potential(traj.params.potential, next[n]) +
                              eval_potential(traj.params.potential, curr[n]));
    return 0.5 * (rate * rate + grad) + pot;
}

/// Discrete total energy at time index k: the interior local energies plus the
/// coupling term of the driven boundary,
///   E^k = sum_{n=1}^{N-1} H_n^k + 1/2 sum_{l=k}^{k+1} (delta_x u_0^l)^2 / 4.
inline double total_energy(const Trajectory& traj, int k) {
    detail::check_energy_indices(traj, 1, k, /*check_node=*/false);
    const int n_nodes = traj.params.n_nodes;
    double sum = 0.0;
    for (int n = 1; n < n_nodes; ++n) sum += local_energy(traj, n, k);

    const double c = traj.params.coupling;
    const auto curr = traj.state(k);
    const auto next = traj.state(k + 1);
    const double gx_curr = c * (curr[1] - curr[0]);
    const double gx_next = c * (next[1] - next[0]);
    return sum + 0.5 * (gx_curr * gx_curr + gx_next * gx_next) / 4.0;
}

/// Total energy accumulated over the run, E_T' = sum_{k=1}^{M-1} E^k dt.
inline double integrated_energy(const Trajectory& traj) {
    double sum = 0.0;
    for (int k = 1; k < traj.grid.n_steps; ++k) sum += total_energy(traj, k);
    return sum * traj.grid.dt;
}

/// Which velocity multiplies the boundary flux in the discrete power balance.
enum class BoundaryVelocity {
    DrivenNode,  ///< delta_t^(1) u_0^k — the algebraically exact form
    EdgeAverage, ///< mu_x delta_t^(1) u_0^k = average over nodes 0 and 1
};

/// Residual of the discrete power balance at time t_{k-1}:
///   delta_t E^{k-1} - [ -c (mu_t^(1) delta_x u_0^k)(boundary velocity)
///                       - gamma sum_{n=1}^{N-1} (delta_t^(1) u_n^k)^2 ].
/// Vanishes (up to Newton tolerance) for the DrivenNode variant on every
/// trajectory of the scheme. Defined for 2 <= k <= M-1.
inline double power_balance_residual(const Trajectory& traj, int k,
                                     BoundaryVelocity variant = BoundaryVelocity::DrivenNode) {
    const int n_steps = traj.grid.n_steps;
    if (k < 2 || k > n_steps - 1)
        throw IndexError("time index " + std::to_string(k) + " outside [2, " +
                         std::to_string(n_steps - 1) + "]");

    const double dt = traj.grid.dt;
    const double c = traj.params.coupling;
    const int n_nodes = traj.params.n_nodes;
    const auto prev = traj.state(k - 1);
    const auto next = traj.state(k + 1);

    const double rate = (total_energy(traj, k) - total_energy(traj, k - 1)) / dt;

    auto centered_velocity = [&](int n) { return (next[n] - prev[n]) / (2.0 * dt); };
    const double flux_gradient = 0.5 * (c * (next[1] - next[0]) + c * (prev[1] - prev[0]));
    const double boundary_velocity =
        (variant == BoundaryVelocity::DrivenNode)
            ? centered_velocity(0)
            : 0.5 * (centered_velocity(0) + centered_velocity(1));

    double dissipation = 0.0;
    for (int n = 1; n < n_nodes; ++n) {
        const double v = centered_velocity(n);
        dissipation += v * v;
    }
    const double rhs = -c * flux_gradient * boundary_velocity -
                       traj.params.damping * dissipation;
    return rate - rhs;
}

/// Energy diagnostics of a whole trajectory. `local` is row-major with
/// (n_steps-1) rows of (n_nodes-1) interior nodes and is empty unless
/// requested; k and n keep their 1-based meaning through the accessors.
struct EnergyRecord {
    int n_nodes = 0;
    int n_steps = 0;
    double dt = 0.0;
    std::vector<double> total;  ///< total[k-1] = E^k for k = 1..M-1
    std::vector<double> local;  ///< local[(k-1)(N-1) + (n-1)] = H_n^k
    double integrated = 0.0;
    double min_local = 0.0;
    double min_total = 0.0;

    double total_at(int k) const { return total.at(static_cast<std::size_t>(k) - 1); }
    double local_at(int n, int k) const {
        return local.at(static_cast<std::size_t>(k - 1) * (n_nodes - 1) + (n - 1));
    }
};

inline EnergyRecord compute_energy_record(const Trajectory& traj, bool keep_local = false) {
    EnergyRecord rec;
    rec.n_nodes = traj.params.n_nodes;
    rec.n_steps = traj.grid.n_steps;
    rec.dt = traj.grid.dt;
    rec.total.reserve(rec.n_steps - 1);
    if (keep_local)
        rec.local.reserve(static_cast<std::size_t>(rec.n_steps - 1) * (rec.n_nodes - 1));

    rec.min_local = std::numeric_limits<double>::infinity();
    rec.min_total = std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (int k = 1; k < rec.n_steps; ++k) {
        double sum = 0.0;
        for (int n = 1; n < rec.n_nodes; ++n) {
            const double h = local_energy(traj, n, k);
            sum += h;
            rec.min_local = std::min(rec.min_local, h);
            if (keep_local) rec.local.push_back(h);
        }
        const double c = traj.params.coupling;
        const auto curr = traj.state(k);
        const auto next = traj.state(k + 1);
        const double gx_curr = c * (curr[1] - curr[0]);
        const double gx_next = c * (next[1] - next[0]);
        const double e = sum + 0.5 * (gx_curr * gx_curr + gx_next * gx_next) / 4.0;
        rec.total.push_back(e);
        rec.min_total = std::min(rec.min_total, e);
        acc += e;
    }
    rec.integrated = acc * rec.dt;
    return rec;
}

} // namespace nlchain
