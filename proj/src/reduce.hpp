#pragma once

// Deterministic reductions: the summation tree depends only on the element
// count, never on the number of OpenMP threads.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ptkr::detail {

inline constexpr std::size_t kReduceBlock = 512;

template <class F>
double pairwise(std::size_t lo, std::size_t hi, const F& term) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise(lo, mid, term) + pairwise(mid, hi, term);
}

/// Σ term(i) for i in [0, n) via fixed blocks summed in parallel, then a
/// pairwise combine of the block sums.
template <class F>
double blocked_sum(std::size_t n, const F& term) {
    const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(nblocks, 0.0);
    const auto nb = static_cast<std::int64_t>(nblocks);
#pragma omp parallel for schedule(static) if (nblocks > 4)
    for (std::int64_t b = 0; b < nb; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
        const std::size_t hi = lo + kReduceBlock < n ? lo + kReduceBlock : n;
        partial[static_cast<std::size_t>(b)] = pairwise(lo, hi, term);
    }
    return pairwise(0, nblocks, [&](std::size_t b) { return partial[b]; });
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
};

/// Two-pass mean and population variance. The second pass is scaled by
/// max|x − mean| so squares of clamped values (~1e152) cannot overflow.
inline MeanVar mean_var(std::span<const double> x) {
    const std::size_t n = x.size();
    const double mean = blocked_sum(n, [&](std::size_t i) { return x[i]; }) / static_cast<double>(n);
    double scale = 0.0;
    for (double v : x) {
        const double d = v > mean ? v - mean : mean - v;
        if (d > scale) scale = d;
    }
    if (scale == 0.0) return {mean, 0.0};
    const double inv = 1.0 / scale;
    const double ss = blocked_sum(n, [&](std::size_t i) {
        const double d = (x[i] - mean) * inv;
        return d * d;
    });
    return {mean, scale * scale * (ss / static_cast<double>(n))};
}

}  // namespace ptkr::detail
