#include "ptkr/otoc.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ptkr/fit.hpp"

namespace ptkr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Direction backward_direction(BackwardMode mode) {
    return mode == BackwardMode::Adjoint ? Direction::Adjoint : Direction::Inverse;
}

void apply_momentum(QuantumState& s, double hbar) {
    for (std::size_t i = 0; i < s.dim(); ++i) s.amps[i] *= s.momentum_index(i) * hbar;
    renormalize(s);
}

void run(QuantumState& s, Propagator& prop, int kicks, Direction dir) {
    if (s.log_norm == -kInf) return;  // zero vector stays zero
    for (int k = 0; k < kicks; ++k) prop.step(s, dir);
}

QuantumState normalized(const QuantumState& in) {
    QuantumState s = in;
    renormalize(s);
    return s;
}

// ln ‖e^{La} a − e^{Lb} b‖² − 2 L_ψ, in log space.
OtocValue combine(const QuantumState& a, const QuantumState& b, double log_norm_psi) {
    const double m = std::max(a.log_norm, b.log_norm);
    if (m == -kInf) return {0.0, -kInf, true};
    const double wa = std::exp(a.log_norm - m);
    const double wb = std::exp(b.log_norm - m);
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) d2 += std::norm(wa * a.amps[i] - wb * b.amps[i]);
    if (d2 == 0.0) return {0.0, -kInf, true};
    const double log_c = 2.0 * m + std::log(d2) - 2.0 * log_norm_psi;
    if (!(log_c <= std::log(std::numeric_limits<double>::max()))) return {kInf, log_c, false};
    return {std::exp(log_c), log_c, true};
}

OtocValue marker() { return {kInf, kInf, false}; }

// Both branches from already forward-evolved states fa = U^t ψ and fb = U^t pψ.
OtocValue finish_branches(QuantumState fa, QuantumState fb, int t, Propagator& prop, double log_norm_psi,
                          BackwardMode mode) {
    const double hbar = prop.params().hbar;
    const Direction back = backward_direction(mode);
    apply_momentum(fa, hbar);
    run(fa, prop, t, back);
    apply_momentum(fa, hbar);

    apply_momentum(fb, hbar);
    run(fb, prop, t, back);
    return combine(fa, fb, log_norm_psi);
}

void latch(std::vector<OtocValue>& values) {
    bool dead = false;
    for (auto& v : values) {
        if (!v.finite) dead = true;
        if (dead) v = marker();
    }
}

void check_window(const OtocSeries& s, KickWindow w, const char* what) {
    if (w.first < 0 || w.last < w.first + 1 || w.last >= static_cast<int>(s.values.size()))
        throw FitWindowError(std::string(what) + ": window outside the series");
    for (int t = w.first; t <= w.last; ++t) {
        const auto& v = s.values[static_cast<std::size_t>(t)];
        if (!v.finite) throw FitWindowError(std::string(what) + ": window touches non-finite C at t=" + std::to_string(t));
        if (!(v.value > 0.0)) throw FitWindowError(std::string(what) + ": C(t) is zero at t=" + std::to_string(t));
    }
}

}  // namespace

OtocValue otoc_at(int t, Propagator& prop, const QuantumState& initial, BackwardMode mode) {
    if (t < 0) throw ValidationError("t", "must be >= 0");
    const QuantumState psi = normalized(initial);
    try {
        QuantumState fa = psi;
        run(fa, prop, t, Direction::Forward);
        QuantumState fb = psi;
        apply_momentum(fb, prop.params().hbar);
        run(fb, prop, t, Direction::Forward);
        return finish_branches(std::move(fa), std::move(fb), t, prop, psi.log_norm, mode);
    } catch (const NumericalError&) {
        return marker();
    }
}

OtocValue otoc_at(int t, const SystemParams& params, const QuantumState& initial, BackwardMode mode) {
    Propagator prop(params, initial.dim());
    return otoc_at(t, prop, initial, mode);
}

OtocSeries otoc_series(const SystemParams& params, int t_max, const QuantumState& initial, const OtocOptions& opt) {
    if (t_max < 1) throw ValidationError("t_max", "must be >= 1");
    validate(params);
    OtocSeries series;
    series.params = params;
    series.mode = opt.mode;
    series.values.assign(static_cast<std::size_t>(t_max) + 1, OtocValue{});
    auto& values = series.values;

    if (opt.checkpoint) {
        Propagator prop(params, initial.dim());
        const QuantumState psi = normalized(initial);
        QuantumState fa = psi;
        QuantumState fb = psi;
        apply_momentum(fb, params.hbar);
        bool dead = false;
        for (int t = 0; t <= t_max; ++t) {
            if (dead) {
                values[static_cast<std::size_t>(t)] = marker();
                continue;
            }
            try {
                if (t > 0) {
                    run(fa, prop, 1, Direction::Forward);
                    run(fb, prop, 1, Direction::Forward);
                }
                values[static_cast<std::size_t>(t)] = finish_branches(fa, fb, t, prop, psi.log_norm, opt.mode);
            } catch (const NumericalError&) {
                // the checkpointed branches are unusable past this point
                values[static_cast<std::size_t>(t)] = marker();
                dead = true;
            }
            if (!values[static_cast<std::size_t>(t)].finite && opt.stop_at_divergence) dead = true;
        }
    } else {
        const int threads = opt.threads > 0 ? opt.threads : omp_get_max_threads();
        const int chunk = opt.stop_at_divergence ? std::max(2, 2 * threads) : t_max + 1;
        bool dead = false;
        for (int start = 0; start <= t_max; start += chunk) {
            const int stop = std::min(t_max, start + chunk - 1);
            if (dead) {
                for (int t = start; t <= stop; ++t) values[static_cast<std::size_t>(t)] = marker();
                continue;
            }
#pragma omp parallel num_threads(threads)
            {
                Propagator prop(params, initial.dim());
#pragma omp for schedule(dynamic, 1)
                for (int t = start; t <= stop; ++t)
                    values[static_cast<std::size_t>(t)] = otoc_at(t, prop, initial, opt.mode);
            }
            for (int t = start; t <= stop; ++t)
                if (!values[static_cast<std::size_t>(t)].finite) dead = true;
            if (!opt.stop_at_divergence) dead = false;
        }
    }
    latch(values);

    series.t_star = detect_divergence_time(series);
    try {
        series.gamma = fit_growth_rate(series, opt.growth_window);
    } catch (const FitWindowError&) {
        series.gamma.reset();
    }
    series.t_ehrenfest = estimate_ehrenfest_time(series);
    return series;
}

std::optional<int> detect_divergence_time(const OtocSeries& series) {
    for (std::size_t t = 0; t < series.values.size(); ++t)
        if (!series.values[t].finite) return static_cast<int>(t);
    return std::nullopt;
}

double fit_growth_rate(const OtocSeries& series, KickWindow window) {
    check_window(series, window, "fit_growth_rate");
    std::vector<double> xs, ys;
    for (int t = window.first; t <= window.last; ++t) {
        xs.push_back(t);
        ys.push_back(series.values[static_cast<std::size_t>(t)].log_value);
    }
    return fit_line(xs, ys).slope;
}

double fit_power_law(const OtocSeries& series, KickWindow window) {
    check_window(series, window, "fit_power_law");
    if (window.first < 1) throw FitWindowError("fit_power_law: window must start at t >= 1");
    std::vector<double> xs, ys;
    for (int t = window.first; t <= window.last; ++t) {
        xs.push_back(std::log(static_cast<double>(t)));
        ys.push_back(series.values[static_cast<std::size_t>(t)].log_value);
    }
    return fit_line(xs, ys).slope;
}

std::optional<int> estimate_ehrenfest_time(const OtocSeries& series) {
    // usable points: t >= 1, finite, C > 0, contiguous from t = 1
    int last = 0;
    for (std::size_t t = 1; t < series.values.size(); ++t) {
        const auto& v = series.values[t];
        if (!v.finite || !(v.value > 0.0)) break;
        last = static_cast<int>(t);
    }
    if (last < 6) return std::nullopt;

    auto log_c = [&](int t) { return series.values[static_cast<std::size_t>(t)].log_value; };
    auto sse_exp = [&](int lo, int hi) {
        std::vector<double> xs, ys;
        for (int t = lo; t <= hi; ++t) {
            xs.push_back(t);
            ys.push_back(log_c(t));
        }
        return fit_line(xs, ys);
    };
    auto sse_pow = [&](int lo, int hi) {
        std::vector<double> xs, ys;
        for (int t = lo; t <= hi; ++t) {
            xs.push_back(std::log(static_cast<double>(t)));
            ys.push_back(log_c(t));
        }
        return fit_line(xs, ys);
    };

    const auto single = sse_exp(1, last);
    double best = std::numeric_limits<double>::infinity();
    int best_b = -1;
    for (int b = 2; b <= last - 2; ++b) {
        const auto e = sse_exp(1, b);
        const auto p = sse_pow(b, last);
        const double total = e.residual + p.residual;
        if (total < best) {
            best = total;
            best_b = b;
        }
    }
    // a breakpoint has to explain substantially more than one exponential
    const double scale = std::max(1.0, std::abs(log_c(last)));
    if (best_b < 0 || single.residual <= 1e-12 * scale * scale || best >= 0.5 * single.residual)
        return std::nullopt;
    return best_b;
}

}  // namespace ptkr
