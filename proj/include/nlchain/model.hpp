#pragma once

#include <cmath>
#include <string>

#include "nlchain/errors.hpp"

namespace nlchain {

/// On-site potential of the oscillator chain. Each variant defines V, V' and
/// V'' in closed form; V(0) = 0 and V >= 0 for all three.
enum class PotentialKind {
    SineGordon,       ///< V(u) = 1 - cos u
    DoubleSineGordon, ///< V(u) = 1/2 - (2 cos u + cos 2u)/6
    Phi6KleinGordon,  ///< V(u) = u^2/2! - u^4/4! + u^6/6!
};

inline double eval_potential(PotentialKind kind, double u) {
    switch (kind) {
    case PotentialKind::SineGordon:
        return 1.0 - std::cos(u);
    case PotentialKind::DoubleSineGordon:
        return 0.5 - (2.0 * std::cos(u) + std::cos(2.0 * u)) / 6.0;
    case PotentialKind::Phi6KleinGordon: {
        const double u2 = u * u;
        return u2 * (0.5 + u2 * (-1.0 / 24.0 + u2 / 720.0));
    }
    }
    return 0.0; // unreachable
}

inline double eval_potential_deriv(PotentialKind kind, double u) {
    switch (kind) {
    case PotentialKind::SineGordon:
        return std::sin(u);
    case PotentialKind::DoubleSineGordon:
        return (std::sin(u) + std::sin(2.0 * u)) / 3.0;
    case PotentialKind::Phi6KleinGordon: {
        const double u2 = u * u;
        return u * (1.0 + u2 * (-1.0 / 6.0 + u2 / 120.0));
    }
    }
    return 0.0; // unreachable
}

/// Second derivative; only consumed by the Newton Jacobian when the two time
/// levels of an iterate coincide and the chord slope of V degenerates.
inline double eval_potential_second_deriv(PotentialKind kind, double u) {
    switch (kind) {
    case PotentialKind::SineGordon:
        return std::cos(u);
    case PotentialKind::DoubleSineGordon:
        return (std::cos(u) + 2.0 * std::cos(2.0 * u)) / 3.0;
    case PotentialKind::Phi6KleinGordon: {
        const double u2 = u * u;
        return 1.0 + u2 * (-0.5 + u2 / 24.0);
    }
    }
    return 0.0; // unreachable
}

inline const char* potential_name(PotentialKind kind) {
    switch (kind) {
    case PotentialKind::SineGordon:       return "sine-gordon";
    case PotentialKind::DoubleSineGordon: return "double-sine-gordon";
    case PotentialKind::Phi6KleinGordon:  return "phi6-klein-gordon";
    }
    return "?";
}

/// Parses the names accepted in config files. Throws ValidationError on an
/// unknown name, quoting the offending key.
inline PotentialKind potential_from_name(const std::string& name,
                                         const std::string& key = "potential") {
    if (name == "sine-gordon") return PotentialKind::SineGordon;
    if (name == "double-sine-gordon") return PotentialKind::DoubleSineGordon;
    if (name == "phi6-klein-gordon") return PotentialKind::Phi6KleinGordon;
    throw ValidationError(key, "unknown potential '" + name +
                                   "' (expected sine-gordon, double-sine-gordon "
                                   "or phi6-klein-gordon)");
}

/// Physical configuration of the chain
///   u_n'' = c^2 (u_{n+1} - 2 u_n + u_{n-1}) - gamma u_n' - V'(u_n)
/// with a driven left end and a free (zero-difference) right end.
struct ChainParams {
    int n_nodes = 200;        ///< N; nodes are indexed 0..N
    double coupling = 4.0;    ///< c
    double damping = 0.0;     ///< gamma
    PotentialKind potential = PotentialKind::DoubleSineGordon;

    void validate() const {
        if (n_nodes < 2) throw ValidationError("n_nodes", "must be >= 2");
        if (!(coupling > 0.0)) throw ValidationError("coupling", "must be > 0");
        if (!(damping >= 0.0)) throw ValidationError("damping", "must be >= 0");
    }
};

/// Boundary forcing phi(t) = ramp(t) * A * sin(Omega t), where the envelope
/// ramp(t) = min(t / T0, 1) grows linearly from zero over [0, T0].
struct Driving {
    double amplitude = 0.0;  ///< A
    double frequency = 0.9;  ///< Omega (rad per unit time)
    double ramp_time = 50.0; ///< T0; 0 disables the ramp

    void validate() const {
        if (!(amplitude >= 0.0)) throw ValidationError("amplitude", "must be >= 0");
        if (!(frequency > 0.0)) throw ValidationError("frequency", "must be > 0");
        if (!(ramp_time >= 0.0)) throw ValidationError("ramp_time", "must be >= 0");
    }
};

inline double driving_value(const Driving& d, double t) {
    const double ramp = (d.ramp_time > 0.0) ? std::min(t / d.ramp_time, 1.0) : 1.0;
    return ramp * d.amplitude * std::sin(d.frequency * t);
}

/// Uniform partition 0 = t_0 < t_1 < ... < t_M = T with step dt.
struct TimeGrid {
    double dt = 0.05;
    double horizon = 200.0; ///< T
    int n_steps = 4000;     ///< M

    static TimeGrid from_step(double dt, double horizon) {
        TimeGrid g;
        g.dt = dt;
        g.horizon = horizon;
        g.n_steps = static_cast<int>(std::llround(horizon / dt));
        g.validate();
        return g;
    }

    double time(int k) const { return k * dt; }

    void validate() const {
        if (!(dt > 0.0)) throw ValidationError("dt", "must be > 0");
        if (n_steps < 2) throw ValidationError("horizon", "must cover at least 2 steps");
        if (!(std::abs(n_steps * dt - horizon) < dt))
            throw ValidationError("horizon", "not an integral number of steps of dt");
    }
};

/// Plane-wave frequency of the linearized chain, omega(k) = sqrt(1 + 2c^2(1 - cos k)).
/// Always >= 1: frequencies below 1 lie in the forbidden band gap.
inline double dispersion_omega(double c, double k) {
    return std::sqrt(1.0 + 2.0 * c * c * (1.0 - std::cos(k)));
}

/// True when a driving frequency falls inside the forbidden band gap.
inline bool in_band_gap(double omega) { return omega < 1.0; }

} // namespace nlchain
