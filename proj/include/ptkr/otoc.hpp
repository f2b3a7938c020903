#pragma once

#include <optional>
#include <vector>

#include "ptkr/classical.hpp"
#include "ptkr/quantum.hpp"

namespace ptkr {

/// How the backward half of the Heisenberg evolution is taken.
enum class BackwardMode { Adjoint, Inverse };

/// C(t) at one kick. `log_value` is ln C (−∞ for C = 0). When ln C exceeds the
/// double range, `finite` is false and `value` is +∞.
struct OtocValue {
    double value = 0.0;
    double log_value = 0.0;
    bool finite = true;
};

/// C(t) = ‖[p(t), p]ψ‖² / ‖ψ‖², evaluated as the difference of the two
/// operator orderings
///   A = p U_b^t p U^t ψ,   B = U_b^t p U^t p ψ
/// where U_b is U† or U⁻¹. Each branch carries its own log-norm, so the result
/// is formed in log space and overflow becomes the non-finite marker.
OtocValue otoc_at(int t, Propagator& prop, const QuantumState& initial, BackwardMode mode);
OtocValue otoc_at(int t, const SystemParams& params, const QuantumState& initial, BackwardMode mode);

struct OtocOptions {
    BackwardMode mode = BackwardMode::Adjoint;
    /// Reuse the forward-evolved branches from t−1 (sequential; results are
    /// bit-identical to the direct evaluation).
    bool checkpoint = false;
    int threads = 0;  ///< 0: OpenMP default
    KickWindow growth_window{1, 4};
    /// Skip evaluations after the first non-finite entry (they latch anyway).
    bool stop_at_divergence = true;
};

struct OtocSeries {
    SystemParams params;
    BackwardMode mode = BackwardMode::Adjoint;
    std::vector<OtocValue> values;  ///< values[t], t = 0..t_max
    std::optional<double> gamma;
    std::optional<int> t_star;
    std::optional<int> t_ehrenfest;
};

/// C(t) for t = 0..t_max, in parallel over t unless checkpointing. Attaches γ
/// (when the growth window is finite), t* and t_E.
OtocSeries otoc_series(const SystemParams& params, int t_max, const QuantumState& initial,
                       const OtocOptions& options = {});

/// First t carrying the non-finite marker.
std::optional<int> detect_divergence_time(const OtocSeries& series);

/// Least-squares slope of ln C(t) over the window. Throws FitWindowError if
/// the window leaves the series or touches a non-finite or zero entry.
double fit_growth_rate(const OtocSeries& series, KickWindow window);

/// Slope of ln C against ln t over the window (power-law exponent).
double fit_power_law(const OtocSeries& series, KickWindow window);

/// Breakpoint of a two-segment fit: ln C linear in t on [1, b], linear in
/// ln t on [b, last finite]. nullopt when a single exponential explains the
/// data or fewer than 6 usable points exist.
std::optional<int> estimate_ehrenfest_time(const OtocSeries& series);

}  // namespace ptkr
