#include "ptkr/core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ptkr {

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void require(bool ok, const char* field, const char* what) {
    if (!ok) throw ValidationError(field, what);
}

}  // namespace

SystemParams make_params(double K, double lambda, double hbar) {
    SystemParams p;
    p.K = K;
    p.lambda = lambda;
    p.hbar = hbar;
    validate(p);
    return p;
}

void validate(const SystemParams& p) {
    require(std::isfinite(p.K) && p.K > 0.0, "K", "must be finite and > 0");
    require(std::isfinite(p.lambda) && p.lambda >= 0.0, "lambda", "must be finite and >= 0");
    require(std::isfinite(p.hbar) && p.hbar > 0.0, "hbar", "must be finite and > 0");
    require(std::isfinite(p.p_clamp) && p.p_clamp > 0.0 &&
                p.p_clamp <= std::sqrt(std::numeric_limits<double>::max()),
            "p_clamp", "must be > 0 with p_clamp^2 representable");
    require(std::isfinite(p.theta_i_guard) && p.theta_i_guard > 0.0, "theta_i_guard",
            "must be finite and > 0");
}

void validate(const EnsembleConfig& cfg) {
    require(cfg.n_traj >= 1, "n_traj", "must be >= 1");
    require(cfg.t_max >= 1, "t_max", "must be >= 1");
}

double uniform_at(std::uint64_t seed, std::uint64_t index) noexcept {
    // index-th output of a splitmix64 stream started at `seed`
    const std::uint64_t bits = splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<ComplexPhasePoint> sample_initial_ensemble(const EnsembleConfig& cfg) {
    validate(cfg);
    std::vector<ComplexPhasePoint> points(static_cast<std::size_t>(cfg.n_traj));
    const auto n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = uniform_at(cfg.seed, static_cast<std::uint64_t>(i));
        points[static_cast<std::size_t>(i)].theta_r = -std::numbers::pi + 2.0 * std::numbers::pi * u;
    }
    return points;
}

}  // namespace ptkr
