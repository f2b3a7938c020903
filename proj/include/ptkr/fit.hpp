#pragma once

#include <span>

namespace ptkr {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< sum of squared residuals
};

/// Ordinary least squares y ≈ slope·x + intercept (intercept pinned to 0 when
/// `through_origin`). Needs ≥ 2 finite points and non-constant xs; throws
/// FitWindowError otherwise.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys, bool through_origin = false);

}  // namespace ptkr
