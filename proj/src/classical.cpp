#include "ptkr/classical.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "ptkr/fit.hpp"
#include "reduce.hpp"

namespace ptkr {

namespace {

// cosh x − λ sinh x and sinh x − λ cosh x. For |x| ≥ 1 the factored
// exponential form avoids the large-argument difference; below that the
// direct form keeps full relative accuracy near x = 0.
struct HyperbolicPair {
    double c;  // cosh x − λ sinh x
    double s;  // sinh x − λ cosh x
};

HyperbolicPair hyperbolic_pair(double x, double lambda) {
    if (std::abs(x) < 1.0) {
        const double ch = std::cosh(x);
        const double sh = std::sinh(x);
        return {ch - lambda * sh, sh - lambda * ch};
    }
    const double ep = std::exp(x);
    const double em = std::exp(-x);
    const double a = 0.5 * (1.0 - lambda) * ep;
    const double b = 0.5 * (1.0 + lambda) * em;
    return {a + b, a - b};
}

// Diverged momenta sit at ±clamp so they keep contributing the plateau to M2.
double saturate(double p, double clamp) {
    return std::copysign(clamp, std::isnan(p) ? 1.0 : p);
}

// Shared divergence rule: applied to the tentative next state.
ComplexPhasePoint finish_step(const ComplexPhasePoint& in, double pr, double pi, double tr, double ti,
                              const SystemParams& params) {
    const bool bad = !std::isfinite(pr) || !std::isfinite(pi) || !std::isfinite(tr) ||
                     !std::isfinite(ti) || std::abs(pr) > params.p_clamp ||
                     std::abs(pi) > params.p_clamp || std::abs(ti) > params.theta_i_guard;
    if (!bad) return {tr, ti, pr, pi, false};
    ComplexPhasePoint out = in;
    out.p_r = saturate(pr, params.p_clamp);
    out.p_i = saturate(pi, params.p_clamp);
    out.diverged = true;
    return out;
}

void require_live(const ComplexPhasePoint& s) {
    if (s.diverged) throw ContractViolation("map_step: input point has already diverged");
}

}  // namespace

ComplexPhasePoint map_step(const ComplexPhasePoint& s, const SystemParams& params) {
    require_live(s);
    const auto h = hyperbolic_pair(s.theta_i, params.lambda);
    const double pr = s.p_r + params.K * std::sin(s.theta_r) * h.c;
    const double pi = s.p_i + params.K * std::cos(s.theta_r) * h.s;
    return finish_step(s, pr, pi, s.theta_r + pr, s.theta_i + pi, params);
}

ComplexPhasePoint map_step_complex_oracle(const ComplexPhasePoint& s, const SystemParams& params) {
    require_live(s);
    using C = std::complex<double>;
    const C theta{s.theta_r, s.theta_i};
    const C p{s.p_r, s.p_i};
    const C p_next = p + params.K * (std::sin(theta) - C{0.0, params.lambda} * std::cos(theta));
    const C theta_next = theta + p_next;
    return finish_step(s, p_next.real(), p_next.imag(), theta_next.real(), theta_next.imag(), params);
}

Moments second_moments(std::span<const ComplexPhasePoint> snapshot) {
    if (snapshot.empty()) throw ValidationError("snapshot", "second_moments needs a non-empty snapshot");
    std::vector<double> pr(snapshot.size()), pi(snapshot.size());
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
        pr[i] = snapshot[i].p_r;
        pi[i] = snapshot[i].p_i;
    }
    const auto r = detail::mean_var(pr);
    const auto im = detail::mean_var(pi);
    return {r.mean, im.mean, r.var, im.var};
}

std::int64_t count_diverged(std::span<const ComplexPhasePoint> snapshot) noexcept {
    std::int64_t n = 0;
    for (const auto& s : snapshot) n += s.diverged ? 1 : 0;
    return n;
}

EnsembleSeries evolve_ensemble(const EnsembleConfig& cfg, const SystemParams& params) {
    validate(params);
    const auto initial = sample_initial_ensemble(cfg);
    const std::size_t n = initial.size();
    const auto ni = static_cast<std::int64_t>(n);

    // structure of arrays for the kernel and the reductions
    std::vector<double> tr(n), ti(n), pr(n), pi(n);
    std::vector<unsigned char> dead(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        tr[i] = initial[i].theta_r;
        ti[i] = initial[i].theta_i;
        pr[i] = initial[i].p_r;
        pi[i] = initial[i].p_i;
    }

    EnsembleSeries series{params, cfg, {}};
    series.rows.reserve(static_cast<std::size_t>(cfg.t_max) + 1);
    auto record = [&](int t) {
        const auto r = detail::mean_var(pr);
        const auto im = detail::mean_var(pi);
        std::int64_t nd = 0;
        for (unsigned char d : dead) nd += d;
        series.rows.push_back({t, {r.mean, im.mean, r.var, im.var}, nd});
    };
    record(0);

    for (int t = 1; t <= cfg.t_max; ++t) {
#pragma omp parallel for schedule(static)
        for (std::int64_t k = 0; k < ni; ++k) {
            const auto i = static_cast<std::size_t>(k);
            if (dead[i]) continue;
            const auto next = map_step({tr[i], ti[i], pr[i], pi[i], false}, params);
            tr[i] = next.theta_r;
            ti[i] = next.theta_i;
            pr[i] = next.p_r;
            pi[i] = next.p_i;
            dead[i] = next.diverged ? 1 : 0;
        }
        record(t);
    }
    return series;
}

EnsembleSeries evolve_ensemble_serial(const EnsembleConfig& cfg, const SystemParams& params) {
    validate(params);
    auto points = sample_initial_ensemble(cfg);
    const auto n = static_cast<double>(points.size());

    auto moments = [&] {
        Moments m;
        for (const auto& s : points) {
            m.mean_pr += s.p_r;
            m.mean_pi += s.p_i;
        }
        m.mean_pr /= n;
        m.mean_pi /= n;
        double sr = 0.0, si = 0.0;
        for (const auto& s : points) {
            sr = std::max(sr, std::abs(s.p_r - m.mean_pr));
            si = std::max(si, std::abs(s.p_i - m.mean_pi));
        }
        double vr = 0.0, vi = 0.0;
        for (const auto& s : points) {
            if (sr > 0.0) vr += ((s.p_r - m.mean_pr) / sr) * ((s.p_r - m.mean_pr) / sr);
            if (si > 0.0) vi += ((s.p_i - m.mean_pi) / si) * ((s.p_i - m.mean_pi) / si);
        }
        m.m2_r = sr * sr * (vr / n);
        m.m2_i = si * si * (vi / n);
        return m;
    };

    EnsembleSeries series{params, cfg, {}};
    series.rows.push_back({0, moments(), count_diverged(points)});
    for (int t = 1; t <= cfg.t_max; ++t) {
        for (auto& s : points)
            if (!s.diverged) s = map_step(s, params);
        series.rows.push_back({t, moments(), count_diverged(points)});
    }
    return series;
}

ComplexPhasePoint special_trajectory_prediction(int n, const SystemParams& params, double validity) {
    if (n < 1) throw ValidationError("n", "must be >= 1");
    const double condition = std::pow(params.K, n - 1) * params.lambda;
    if (!(condition <= validity))
        throw OutOfRegimeError("special_trajectory_prediction: K^(n-1)*lambda = " + std::to_string(condition) +
                               " exceeds the small-lambda validity bound " + std::to_string(validity));
    const double v = -std::pow(params.K, n) * params.lambda;
    return {0.0, v, 0.0, v, false};
}

double threshold_time_tc(const SystemParams& params) {
    if (!(params.lambda > 0.0 && params.lambda < 1.0))
        throw DomainError("threshold_time_tc: needs 0 < lambda < 1");
    if (!(params.K > 1.0)) throw DomainError("threshold_time_tc: needs K > 1");
    return -std::log(params.lambda) / std::log(params.K);
}

std::optional<int> detect_threshold_time(const EnsembleSeries& series) {
    if (series.rows.size() < 4) throw ValidationError("series", "needs at least 4 rows");
    for (const auto& row : series.rows)
        if (row.n_diverged > 0) return row.t;
    return std::nullopt;
}

KickWindow default_fit_window(const SystemParams& params) {
    return {2, static_cast<int>(std::floor(0.8 * threshold_time_tc(params)))};
}

DiffusionFit fit_diffusion(const EnsembleSeries& series, KickWindow window_r, KickWindow window_i) {
    DiffusionFit fit;
    fit.tau = detect_threshold_time(series);
    fit.window_r = window_r;
    fit.window_i = window_i;
    const int limit = fit.tau ? *fit.tau - 1 : static_cast<int>(series.rows.size()) - 1;

    auto check = [&](KickWindow w, const char* name) {
        if (w.first < 1 || w.last < w.first + 1)
            throw FitWindowError(std::string("fit_diffusion: ") + name + " window must hold >= 2 kicks starting at >= 1");
        if (w.last > limit)
            throw FitWindowError(std::string("fit_diffusion: ") + name + " window ends at " +
                                 std::to_string(w.last) + ", beyond the last pre-transition kick " +
                                 std::to_string(limit));
    };
    check(window_r, "real");
    check(window_i, "imaginary");

    std::vector<double> xs, ys;
    for (int t = window_r.first; t <= window_r.last; ++t) {
        xs.push_back(t);
        ys.push_back(series.rows[static_cast<std::size_t>(t)].moments.m2_r);
    }
    fit.D = fit_line(xs, ys, true).slope;

    xs.clear();
    ys.clear();
    for (int t = window_i.first; t <= window_i.last; ++t) {
        const double m2 = series.rows[static_cast<std::size_t>(t)].moments.m2_i;
        if (!(m2 > 0.0)) throw FitWindowError("fit_diffusion: M2_i is not positive at t=" + std::to_string(t));
        xs.push_back(t);
        ys.push_back(std::log(m2));
    }
    const auto line = fit_line(xs, ys, false);
    fit.alpha = line.slope;
    fit.beta = line.intercept;
    return fit;
}

}  // namespace ptkr
