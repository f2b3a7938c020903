#pragma once

#include <cstdint>
#include <vector>

#include "ptkr/errors.hpp"

namespace ptkr {

/// Parameters of the kicked rotor with potential V(θ) = K[cos θ + iλ sin θ].
///
/// `p_clamp` and `theta_i_guard` are the numerical guards of the classical map:
/// a trajectory whose imaginary angle leaves [-theta_i_guard, theta_i_guard] or
/// whose momentum exceeds p_clamp is latched as diverged.
struct SystemParams {
    double K = 5.0;
    double lambda = 0.0;
    double hbar = 1.0;
    double p_clamp = 1.0e152;
    double theta_i_guard = 700.0;
};

/// Validates (K, λ, ℏ) and attaches the default guards.
/// Throws ValidationError naming the first bad field.
SystemParams make_params(double K, double lambda, double hbar);

/// Checks guard fields as well; used when params are assembled by hand.
void validate(const SystemParams& params);

/// One classical trajectory state: θ = θ_r + iθ_i, p = p_r + ip_i.
struct ComplexPhasePoint {
    double theta_r = 0.0;
    double theta_i = 0.0;
    double p_r = 0.0;
    double p_i = 0.0;
    bool diverged = false;

    friend bool operator==(const ComplexPhasePoint&, const ComplexPhasePoint&) = default;
};

struct EnsembleConfig {
    std::int64_t n_traj = 100000;
    std::uint64_t seed = 0;
    int t_max = 30;
};

void validate(const EnsembleConfig& cfg);

/// Counter-based uniform draw in [0, 1): a pure function of (seed, index).
double uniform_at(std::uint64_t seed, std::uint64_t index) noexcept;

/// θ_r uniform on [-π, π), θ_i = p_r = p_i = 0. Element i depends only on
/// (cfg.seed, i), so prefixes agree across ensemble sizes and thread counts.
std::vector<ComplexPhasePoint> sample_initial_ensemble(const EnsembleConfig& cfg);

}  // namespace ptkr
