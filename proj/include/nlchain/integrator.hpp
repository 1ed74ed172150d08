#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nlchain/errors.hpp"
#include "nlchain/model.hpp"
#include "nlchain/tridiagonal.hpp"

namespace nlchain {

/// Two time levels (k-1, k) plus the Newton controls needed to advance to k+1.
struct SchemeState {
    std::vector<double> u_prev;  ///< u at level k-1, length N+1
    std::vector<double> u_curr;  ///< u at level k, length N+1
    int step_index = 1;          ///< k
    double newton_tol = 1e-4;    ///< stopping bound on ||y||_2
    int max_newton_iters = 50;
};

/// Chord slope [V(w) - V(v)] / (w - v). The removable singularity at w = v is
/// filled with V'((w+v)/2); levels closer than 1e-8 take that branch.
inline double potential_chord_slope(PotentialKind kind, double w, double v) {
    if (std::abs(w - v) < 1e-8)
        return eval_potential_deriv(kind, 0.5 * (w + v));
    return (eval_potential(kind, w) - eval_potential(kind, v)) / (w - v);
}

/// Derivative of the chord slope with respect to w; the w = v limit is V''/2
/// at the midpoint.
inline double potential_chord_slope_deriv(PotentialKind kind, double w, double v) {
    const double d = w - v;
    if (std::abs(d) < 1e-8)
        return 0.5 * eval_potential_second_deriv(kind, 0.5 * (w + v));
    return (d * eval_potential_deriv(kind, w) + eval_potential(kind, v) -
            eval_potential(kind, w)) /
           (d * d);
}

namespace detail {

inline void check_state(const SchemeState& state, const ChainParams& params,
                        const TimeGrid& grid) {
    const auto len = static_cast<std::size_t>(params.n_nodes) + 1;
    if (state.u_prev.size() != len || state.u_curr.size() != len)
        throw ValidationError("state", "level vectors must have length n_nodes + 1");
    if (state.step_index < 1 || state.step_index > grid.n_steps - 1)
        throw IndexError("step index " + std::to_string(state.step_index) +
                         " outside [1, " + std::to_string(grid.n_steps - 1) + "]");
}

/// v_prev_cache, when nonempty, holds V(u_prev[n]) for every node.
inline void residual_into(std::span<const double> u_next, const SchemeState& state,
                          const ChainParams& params, double phi_next,
                          const TimeGrid& grid, std::span<const double> v_prev_cache,
                          std::vector<double>& out) {
    const int n_nodes = params.n_nodes;
    const double dt = grid.dt;
    const double inv_dt2 = 1.0 / (dt * dt);
    const double half_c2 = 0.5 * params.coupling * params.coupling;
    const double damp = params.damping / (2.0 * dt);
    const auto& up = state.u_prev;

    out.resize(static_cast<std::size_t>(n_nodes) + 1);
    out[0] = u_next[0] - phi_next;
    for (int n = 1; n < n_nodes; ++n) {
        const double accel = (u_next[n] - 2.0 * state.u_curr[n] + up[n]) * inv_dt2;
        const double lap_avg =
            half_c2 * ((u_next[n + 1] - 2.0 * u_next[n] + u_next[n - 1]) +
                       (up[n + 1] - 2.0 * up[n] + up[n - 1]));
        const double drag = damp * (u_next[n] - up[n]);
        double force;
        if (std::abs(u_next[n] - up[n]) < 1e-8) {
            force = eval_potential_deriv(params.potential, 0.5 * (u_next[n] + up[n]));
        } else {
            const double v_prev = v_prev_cache.empty()
                                      ? eval_potential(params.potential, up[n])
                                      : v_prev_cache[n];
            force = (eval_potential(params.potential, u_next[n]) - v_prev) /
                    (u_next[n] - up[n]);
        }
        out[n] = accel - lap_avg + drag + force;
    }
    out[n_nodes] = u_next[n_nodes] - u_next[n_nodes - 1];
}

inline void jacobian_into(std::span<const double> u_next, const SchemeState& state,
                          const ChainParams& params, const TimeGrid& grid,
                          std::span<const double> v_prev_cache,
                          TridiagonalSystem& sys) {
    const int n_nodes = params.n_nodes;
    const double dt = grid.dt;
    const double off = -0.5 * params.coupling * params.coupling;
    const double diag_base = 1.0 / (dt * dt) + params.coupling * params.coupling +
                             params.damping / (2.0 * dt);
    const auto& up = state.u_prev;

    sys.sub.assign(n_nodes, off);
    sys.sup.assign(n_nodes, off);
    sys.diag.assign(static_cast<std::size_t>(n_nodes) + 1, 0.0);

    sys.diag[0] = 1.0;
    sys.sup[0] = 0.0;
    for (int n = 1; n < n_nodes; ++n) {
        const double d = u_next[n] - up[n];
        double slope_deriv;
        if (std::abs(d) < 1e-8) {
            slope_deriv = 0.5 * eval_potential_second_deriv(params.potential,
                                                            0.5 * (u_next[n] + up[n]));
        } else {
            const double v_prev = v_prev_cache.empty()
                                      ? eval_potential(params.potential, up[n])
                                      : v_prev_cache[n];
            slope_deriv = (d * eval_potential_deriv(params.potential, u_next[n]) +
                           v_prev - eval_potential(params.potential, u_next[n])) /
                          (d * d);
        }
        sys.diag[n] = diag_base + slope_deriv;
    }
    sys.sub[n_nodes - 1] = -1.0;
    sys.diag[n_nodes] = 1.0;
}

} // namespace detail

/// Residual of the implicit step equations at candidate level u_next = u^{k+1}.
///
/// Interior component n:
///   (u^{k+1}_n - 2u^k_n + u^{k-1}_n)/dt^2
///   - (c^2/2) [ (u^{k+1}_{n+1} - 2u^{k+1}_n + u^{k+1}_{n-1})
///             + (u^{k-1}_{n+1} - 2u^{k-1}_n + u^{k-1}_{n-1}) ]
///   + gamma (u^{k+1}_n - u^{k-1}_n)/(2 dt)
///   + [V(u^{k+1}_n) - V(u^{k-1}_n)] / (u^{k+1}_n - u^{k-1}_n).
/// Component 0 is u^{k+1}_0 - phi(t_{k+1}); component N is u^{k+1}_N - u^{k+1}_{N-1}.
inline std::vector<double> residual(std::span<const double> u_next,
                                    const SchemeState& state, const ChainParams& params,
                                    const Driving& driving, const TimeGrid& grid) {
    detail::check_state(state, params, grid);
    if (u_next.size() != state.u_curr.size())
        throw ValidationError("u_next", "must have length n_nodes + 1");
    std::vector<double> out;
    const double phi_next = driving_value(driving, grid.time(state.step_index + 1));
    detail::residual_into(u_next, state, params, phi_next, grid, {}, out);
    return out;
}

/// Jacobian of the residual with respect to u_next, as a tridiagonal system
/// whose right-hand side is the negated residual. Row 0 is [1, 0]; row N is
/// [-1, 1]; interior rows have off-diagonal -c^2/2 and diagonal
///   1/dt^2 + c^2 + gamma/(2 dt) + d/dw [V(w) - V(v)]/(w - v)  at w = u_next_n.
inline TridiagonalSystem assemble_jacobian(std::span<const double> u_next,
                                           std::span<const double> residual_vec,
                                           const SchemeState& state,
                                           const ChainParams& params,
                                           const TimeGrid& grid) {
    detail::check_state(state, params, grid);
    TridiagonalSystem sys;
    detail::jacobian_into(u_next, state, params, grid, {}, sys);
    sys.rhs.resize(residual_vec.size());
    for (std::size_t i = 0; i < residual_vec.size(); ++i) sys.rhs[i] = -residual_vec[i];
    return sys;
}

struct NewtonStepResult {
    std::vector<double> u_next;
    int iterations = 0;
};

/// Advances one time level by Newton iteration on the implicit equations.
///
/// The initial iterate is the linear extrapolation 2u^k - u^{k-1}; each
/// iteration solves J y = -f and applies u <- u + y, stopping once
/// ||y||_2 < newton_tol. Throws NewtonDivergedError when the iteration budget
/// is exhausted and propagates SingularMatrixError from the solver.
inline NewtonStepResult newton_solve_step(const SchemeState& state,
                                          const ChainParams& params,
                                          const Driving& driving, const TimeGrid& grid) {
    detail::check_state(state, params, grid);
    const int n_nodes = params.n_nodes;
    const double phi_next = driving_value(driving, grid.time(state.step_index + 1));

    std::vector<double> u(state.u_curr.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = 2.0 * state.u_curr[i] - state.u_prev[i];

    std::vector<double> v_prev(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        v_prev[i] = eval_potential(params.potential, state.u_prev[i]);

    std::vector<double> f;
    TridiagonalSystem sys;
    for (int iter = 1; iter <= state.max_newton_iters; ++iter) {
        detail::residual_into(u, state, params, phi_next, grid, v_prev, f);
        detail::jacobian_into(u, state, params, grid, v_prev, sys);
        sys.rhs.resize(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) sys.rhs[i] = -f[i];

        const std::vector<double> y = crout_solve(sys);
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            u[i] += y[i];
            norm_sq += y[i] * y[i];
        }
        if (std::sqrt(norm_sq) < state.newton_tol) {
            // Boundary rows are linear and already solved to round-off; pin
            // them so the Dirichlet/Neumann identities hold exactly.
            u[0] = phi_next;
            u[n_nodes] = u[n_nodes - 1];
            return {std::move(u), iter};
        }
    }
    throw NewtonDivergedError("Newton iteration exceeded " +
                                  std::to_string(state.max_newton_iters) +
                                  " iterations at step " +
                                  std::to_string(state.step_index),
                              state.step_index);
}

/// Full solution history of one simulation, stored row-major: state k occupies
/// indices [k*(N+1), (k+1)*(N+1)).
struct Trajectory {
    ChainParams params;
    Driving driving;
    TimeGrid grid;
    std::vector<double> states;
    std::vector<int> newton_iteration_counts; ///< one entry per step k = 1..M-1

    std::span<const double> state(int k) const {
        const std::size_t width = static_cast<std::size_t>(params.n_nodes) + 1;
        return {states.data() + static_cast<std::size_t>(k) * width, width};
    }
    std::span<double> state_mut(int k) {
        const std::size_t width = static_cast<std::size_t>(params.n_nodes) + 1;
        return {states.data() + static_cast<std::size_t>(k) * width, width};
    }
    double displacement(int k, int n) const { return state(k)[n]; }
};

/// Runs the implicit scheme from the rest state: u^0 = 0, u^1 = 0 on the
/// interior with boundary rows enforced, then Newton steps up to t_M = T.
inline Trajectory run_simulation(const ChainParams& params, const Driving& driving,
                                 const TimeGrid& grid, double newton_tol = 1e-4,
                                 int max_newton_iters = 50) {
    params.validate();
    driving.validate();
    grid.validate();

    const int n_nodes = params.n_nodes;
    const int n_steps = grid.n_steps;
    Trajectory traj{params, driving, grid, {}, {}};
    traj.states.assign(static_cast<std::size_t>(n_steps + 1) * (n_nodes + 1), 0.0);

    auto first = traj.state_mut(1);
    first[0] = driving_value(driving, grid.time(1));
    first[n_nodes] = first[n_nodes - 1];

    traj.newton_iteration_counts.reserve(n_steps - 1);
    SchemeState st;
    st.newton_tol = newton_tol;
    st.max_newton_iters = max_newton_iters;
    for (int k = 1; k < n_steps; ++k) {
        const auto prev = traj.state(k - 1);
        const auto curr = traj.state(k);
        st.u_prev.assign(prev.begin(), prev.end());
        st.u_curr.assign(curr.begin(), curr.end());
        st.step_index = k;
        NewtonStepResult step;
        try {
            step = newton_solve_step(st, params, driving, grid);
        } catch (const SingularMatrixError& e) {
            throw SingularMatrixError("step " + std::to_string(k) + ": " + e.what());
        }
        auto next = traj.state_mut(k + 1);
        std::copy(step.u_next.begin(), step.u_next.end(), next.begin());
        traj.newton_iteration_counts.push_back(step.iterations);
    }
    return traj;
}

} // namespace nlchain
