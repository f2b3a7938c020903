#include "ptkr/fit.hpp"

#include <cmath>
#include <string>

#include "ptkr/errors.hpp"

namespace ptkr {

LineFit fit_line(std::span<const double> xs, std::span<const double> ys, bool through_origin) {
    if (xs.size() != ys.size()) throw FitWindowError("fit_line: xs and ys differ in length");
    if (xs.size() < 2) throw FitWindowError("fit_line: need at least 2 points");
    const auto n = static_cast<double>(xs.size());

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw FitWindowError("fit_line: non-finite point at index " + std::to_string(i));
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        sxx += dx * dx;
        sxy += dx * (ys[i] - my);
    }
    if (sxx == 0.0) throw FitWindowError("fit_line: degenerate xs (all equal)");

    LineFit fit;
    if (through_origin) {
        double xx = 0.0, xy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xx += xs[i] * xs[i];
            xy += xs[i] * ys[i];
        }
        fit.slope = xy / xx;
        fit.intercept = 0.0;
    } else {
        fit.slope = sxy / sxx;
        fit.intercept = my - fit.slope * mx;
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
        fit.residual += r * r;
    }
    return fit;
}

}  // namespace ptkr
