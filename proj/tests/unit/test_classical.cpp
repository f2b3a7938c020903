#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <numbers>

#include "ptkr/classical.hpp"

using namespace ptkr;

namespace {

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool same_point(const ComplexPhasePoint& a, const ComplexPhasePoint& b, double tol) {
    return a.diverged == b.diverged && close_rel(a.theta_r, b.theta_r, tol) && close_rel(a.theta_i, b.theta_i, tol) &&
           close_rel(a.p_r, b.p_r, tol) && close_rel(a.p_i, b.p_i, tol);
}

bool same_rows(const EnsembleSeries& a, const EnsembleSeries& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t t = 0; t < a.rows.size(); ++t) {
        const auto& x = a.rows[t];
        const auto& y = b.rows[t];
        if (x.n_diverged != y.n_diverged || x.moments.mean_pr != y.moments.mean_pr ||
            x.moments.mean_pi != y.moments.mean_pi || x.moments.m2_r != y.moments.m2_r ||
            x.moments.m2_i != y.moments.m2_i)
            return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("classical") {

TEST_CASE("first kicks from the all-zero point") {
    const auto p = make_params(5.0, 1e-10, 1.0);
    const auto s1 = map_step({}, p);
    CHECK(s1.theta_r == 0.0);
    CHECK(s1.p_r == 0.0);
    CHECK(s1.p_i == doctest::Approx(-5e-10).epsilon(1e-14));
    CHECK(s1.theta_i == doctest::Approx(-5e-10).epsilon(1e-14));
    const auto s2 = map_step(s1, p);
    // p_i(2) = -2Kλ - K²λ to first order in λ
    CHECK(s2.p_i == doctest::Approx(-2.0 * 5e-10 - 25e-10).epsilon(1e-12));
    CHECK(s2.theta_i == doctest::Approx(-5e-10 - 2.0 * 5e-10 - 25e-10).epsilon(1e-12));
}

TEST_CASE("real section stays real without the imaginary kick") {
    const auto p = make_params(5.0, 0.0, 1.0);
    ComplexPhasePoint s{0.7, 0.0, 0.3, 0.0, false};
    for (int t = 0; t < 50; ++t) {
        s = map_step(s, p);
        REQUIRE(s.theta_i == 0.0);
        REQUIRE(s.p_i == 0.0);
    }
}

TEST_CASE("standard map values") {
    const auto p = make_params(2.0, 0.0, 1.0);
    const auto s = map_step({1.0, 0.0, 0.5, 0.0, false}, p);
    CHECK(s.p_r == doctest::Approx(0.5 + 2.0 * std::sin(1.0)));
    CHECK(s.theta_r == doctest::Approx(1.0 + 0.5 + 2.0 * std::sin(1.0)));
}

TEST_CASE("expanded and complex-arithmetic maps agree") {
    std::uint64_t counter = 0;
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * uniform_at(99, counter++); };
    int compared = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = make_params(draw(0.5, 10.0), draw(0.0, 1.0), 1.0);
        ComplexPhasePoint s{draw(-std::numbers::pi, std::numbers::pi), draw(-1, 1), draw(-10, 10), draw(-1, 1), false};
        for (int step = 0; step < 20 && !s.diverged; ++step) {
            const auto a = map_step(s, p);
            const auto b = map_step_complex_oracle(s, p);
            REQUIRE(same_point(a, b, 1e-9));
            ++compared;
            s = a;
        }
    }
    CHECK(compared > 1000);
}

TEST_CASE("large imaginary angles stay finite up to the guard") {
    const auto p = make_params(5.0, 0.3, 1.0);
    const ComplexPhasePoint s{0.4, 690.0, 0.0, 0.0, false};
    const auto a = map_step(s, p);
    const auto b = map_step_complex_oracle(s, p);
    CHECK(std::isfinite(a.p_r));
    CHECK(a.diverged == b.diverged);
    CHECK(close_rel(a.p_r, b.p_r, 1e-9));
}

TEST_CASE("reflection symmetry") {
    // (θ_r, θ_i, p_r, p_i) -> (-θ_r, θ_i, -p_r, p_i) commutes with the map
    const auto p = make_params(4.0, 0.2, 1.0);
    ComplexPhasePoint s{0.9, 0.1, 0.4, -0.2, false};
    ComplexPhasePoint m{-0.9, 0.1, -0.4, -0.2, false};
    for (int t = 0; t < 5; ++t) {
        s = map_step(s, p);
        m = map_step(m, p);
        CHECK(m.theta_r == doctest::Approx(-s.theta_r));
        CHECK(m.p_r == doctest::Approx(-s.p_r));
        CHECK(m.theta_i == doctest::Approx(s.theta_i));
        CHECK(m.p_i == doctest::Approx(s.p_i));
    }
}

TEST_CASE("angle shift by 2π leaves the momenta unchanged") {
    const auto p = make_params(3.0, 0.1, 1.0);
    const ComplexPhasePoint s{0.3, 0.2, 1.0, 0.5, false};
    ComplexPhasePoint t = s;
    t.theta_r += 2.0 * std::numbers::pi;
    const auto a = map_step(s, p);
    const auto b = map_step(t, p);
    CHECK(a.p_r == doctest::Approx(b.p_r).epsilon(1e-12));
    CHECK(a.p_i == doctest::Approx(b.p_i).epsilon(1e-12));
    CHECK(b.theta_r - a.theta_r == doctest::Approx(2.0 * std::numbers::pi));
}

TEST_CASE("divergence latches and saturates") {
    const auto p = make_params(5.0, 0.5, 1.0);
    ComplexPhasePoint s{0.0, 699.0, 0.0, 10.0, false};
    const auto d = map_step(s, p);
    REQUIRE(d.diverged);
    CHECK(d.theta_i == s.theta_i);
    CHECK(d.theta_r == s.theta_r);
    CHECK(std::abs(d.p_i) == p.p_clamp);
    CHECK(std::abs(d.p_r) == p.p_clamp);
    CHECK_THROWS_AS(map_step(d, p), ContractViolation);
    CHECK_THROWS_AS(map_step_complex_oracle(d, p), ContractViolation);
}

TEST_CASE("diverged count never decreases and M2 saturates") {
    const auto p = make_params(5.0, 1e-10, 1.0);
    const auto series = evolve_ensemble({10000, 0, 40}, p);
    for (std::size_t t = 1; t < series.rows.size(); ++t)
        REQUIRE(series.rows[t].n_diverged >= series.rows[t - 1].n_diverged);
    const auto tau = detect_threshold_time(series);
    REQUIRE(tau);
    REQUIRE(2 * *tau <= 40);
    const double m2 = series.rows[static_cast<std::size_t>(2 * *tau)].moments.m2_r;
    CHECK(m2 >= 1e303);
    CHECK(m2 <= 1e305);
}

TEST_CASE("moments of a snapshot") {
    std::vector<ComplexPhasePoint> pts{{0, 0, 1, 2, false}, {0, 0, 3, 4, false}};
    const auto m = second_moments(pts);
    CHECK(m.mean_pr == 2.0);
    CHECK(m.mean_pi == 3.0);
    CHECK(m.m2_r == 1.0);
    CHECK(m.m2_i == 1.0);
    CHECK_THROWS_AS(second_moments(std::span<const ComplexPhasePoint>{}), ValidationError);

    // saturated momenta must not overflow the variance
    std::vector<ComplexPhasePoint> big{{0, 0, 1e152, 0, true}, {0, 0, -1e152, 0, true}, {0, 0, 0, 0, false}};
    const auto mb = second_moments(big);
    CHECK(std::isfinite(mb.m2_r));
    CHECK(mb.m2_r == doctest::Approx(2e304 / 3.0));
    CHECK(count_diverged(big) == 2);
}

TEST_CASE("parallel ensemble matches the serial reference") {
    const auto p = make_params(5.0, 1e-6, 1.0);
    const EnsembleConfig cfg{3000, 11, 20};
    const auto par = evolve_ensemble(cfg, p);
    const auto ser = evolve_ensemble_serial(cfg, p);
    REQUIRE(par.rows.size() == ser.rows.size());
    for (std::size_t t = 0; t < par.rows.size(); ++t) {
        CHECK(par.rows[t].n_diverged == ser.rows[t].n_diverged);
        CHECK(close_rel(par.rows[t].moments.m2_r, ser.rows[t].moments.m2_r, 1e-10));
        CHECK(close_rel(par.rows[t].moments.m2_i, ser.rows[t].moments.m2_i, 1e-10));
    }
}

TEST_CASE("ensemble is bit-identical for any thread count") {
    const auto p = make_params(5.0, 1e-8, 1.0);
    const EnsembleConfig cfg{5000, 3, 25};
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = evolve_ensemble(cfg, p);
    omp_set_num_threads(4);
    const auto four = evolve_ensemble(cfg, p);
    omp_set_num_threads(3);
    const auto three = evolve_ensemble(cfg, p);
    omp_set_num_threads(saved);
    CHECK(same_rows(one, four));
    CHECK(same_rows(one, three));
}

TEST_CASE("threshold time formula") {
    CHECK(threshold_time_tc(make_params(5.0, 1e-10, 1.0)) == doctest::Approx(14.3068).epsilon(1e-4));
    CHECK(threshold_time_tc(make_params(10.0, 1e-10, 1.0)) == doctest::Approx(10.0));
    CHECK(threshold_time_tc(make_params(300.0, 1e-10, 1.0)) == doctest::Approx(4.0367).epsilon(1e-4));
    CHECK_THROWS_AS(threshold_time_tc(make_params(5.0, 0.0, 1.0)), DomainError);
    CHECK_THROWS_AS(threshold_time_tc(make_params(5.0, 1.0, 1.0)), DomainError);
    CHECK_THROWS_AS(threshold_time_tc(make_params(1.0, 0.1, 1.0)), DomainError);
}

TEST_CASE("special trajectory prediction") {
    const auto p = make_params(5.0, 1e-10, 1.0);
    const auto s = special_trajectory_prediction(3, p);
    CHECK(s.p_i == doctest::Approx(-125e-10));
    CHECK(s.theta_i == doctest::Approx(-125e-10));
    CHECK(s.p_r == 0.0);
    CHECK_THROWS_AS(special_trajectory_prediction(0, p), ValidationError);
    CHECK_THROWS_AS(special_trajectory_prediction(15, p), OutOfRegimeError);
}

TEST_CASE("no transition without an imaginary kick") {
    const auto series = evolve_ensemble({500, 0, 20}, make_params(5.0, 0.0, 1.0));
    CHECK_FALSE(detect_threshold_time(series).has_value());
    // M2_i is identically zero, so the log fit has nothing to work with
    CHECK_THROWS_AS(fit_diffusion(series, {2, 20}, {2, 3}), FitWindowError);
}

TEST_CASE("fit windows must end before the transition") {
    const auto p = make_params(5.0, 1e-4, 1.0);
    const auto series = evolve_ensemble({2000, 0, 20}, p);
    const auto tau = detect_threshold_time(series);
    REQUIRE(tau);
    CHECK_THROWS_AS(fit_diffusion(series, {2, *tau}, {2, 3}), FitWindowError);
    CHECK_THROWS_AS(fit_diffusion(series, {2, 3}, {0, 3}), FitWindowError);
    CHECK_THROWS_AS(fit_diffusion(series, {3, 3}, {2, 3}), FitWindowError);
    CHECK_NOTHROW(fit_diffusion(series, {1, *tau - 1}, {1, *tau - 1}));
    const auto w = default_fit_window(p);
    CHECK(w.first == 2);
    CHECK(w.last == 4);
}

}
