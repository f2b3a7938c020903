#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ptkr/core.hpp"

namespace ptkr {

/// Inclusive kick range [first, last] used by the fits.
struct KickWindow {
    int first = 0;
    int last = 0;
};

/// Advances one kick of the complexified standard map:
///
///   p_r' = p_r + K sin θ_r [cosh θ_i − λ sinh θ_i]
///   p_i' = p_i + K cos θ_r [sinh θ_i − λ cosh θ_i]
///   θ'   = θ + p'
///
/// If |θ_i'| exceeds the guard, or a momentum component is non-finite or beyond
/// p_clamp, the result is latched as diverged: momenta saturate to ±p_clamp and
/// angles keep their input values. Throws ContractViolation on a diverged input.
ComplexPhasePoint map_step(const ComplexPhasePoint& s, const SystemParams& params);

/// Same map evaluated with std::complex sin/cos of θ = θ_r + iθ_i. Kept as an
/// independent check on map_step; shares only the divergence rule.
ComplexPhasePoint map_step_complex_oracle(const ComplexPhasePoint& s, const SystemParams& params);

struct Moments {
    double mean_pr = 0.0;
    double mean_pi = 0.0;
    double m2_r = 0.0;
    double m2_i = 0.0;
};

/// Ensemble means and variances of p_r and p_i (scaled two-pass, pairwise sums).
/// Throws ValidationError on an empty snapshot.
Moments second_moments(std::span<const ComplexPhasePoint> snapshot);

std::int64_t count_diverged(std::span<const ComplexPhasePoint> snapshot) noexcept;

struct EnsembleRow {
    int t = 0;
    Moments moments;
    std::int64_t n_diverged = 0;
};

/// Per-kick record, rows[t] for t = 0..t_max.
struct EnsembleSeries {
    SystemParams params;
    EnsembleConfig config;
    std::vector<EnsembleRow> rows;
};

/// Evolves the sampled ensemble for cfg.t_max kicks. Trajectories are advanced
/// in parallel; moment sums use fixed blocks, so the result is bit-identical for
/// any thread count.
EnsembleSeries evolve_ensemble(const EnsembleConfig& cfg, const SystemParams& params);

/// Single-threaded reference: array-of-structs, map_step per point and plain
/// sequential accumulation. Used to check evolve_ensemble.
EnsembleSeries evolve_ensemble_serial(const EnsembleConfig& cfg, const SystemParams& params);

/// Small-λ prediction for the all-zero initial point after n kicks:
/// θ_r = p_r = 0, θ_i = p_i = −K^n λ. Requires K^(n−1) λ ≤ validity, else
/// throws OutOfRegimeError.
ComplexPhasePoint special_trajectory_prediction(int n, const SystemParams& params,
                                                double validity = 0.01);

/// t_c = −ln λ / ln K. Needs 0 < λ < 1 and K > 1 (DomainError otherwise).
double threshold_time_tc(const SystemParams& params);

/// First kick with a diverged trajectory, or nullopt if none occurs.
std::optional<int> detect_threshold_time(const EnsembleSeries& series);

struct DiffusionFit {
    double D = 0.0;      ///< M2_r ≈ D t
    double alpha = 0.0;  ///< ln M2_i ≈ α t + β
    double beta = 0.0;
    std::optional<int> tau;
    KickWindow window_r;
    KickWindow window_i;
};

/// [2, floor(0.8 t_c)]; may be empty (last < first) for small t_c.
KickWindow default_fit_window(const SystemParams& params);

/// Through-origin fit of M2_r on window_r and a line through ln M2_i on
/// window_i. Both windows must lie within [1, τ) (or [1, t_max] without a
/// transition); throws FitWindowError otherwise.
DiffusionFit fit_diffusion(const EnsembleSeries& series, KickWindow window_r, KickWindow window_i);

}  // namespace ptkr
