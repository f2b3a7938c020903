#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ptkr/core.hpp"

using namespace ptkr;

TEST_SUITE("core") {

TEST_CASE("make_params accepts the usual parameter sets") {
    const auto p = make_params(5.0, 1e-10, 1.0);
    CHECK(p.K == 5.0);
    CHECK(p.lambda == 1e-10);
    CHECK(p.hbar == 1.0);
    CHECK(p.p_clamp == 1e152);
    CHECK(p.theta_i_guard == 700.0);
    CHECK_NOTHROW(make_params(7.0, 0.5, 1.4));
    CHECK_NOTHROW(make_params(8.0, 0.0, 0.01));
}

TEST_CASE("make_params names the offending field") {
    auto field_of = [](double K, double lambda, double hbar) {
        try {
            make_params(K, lambda, hbar);
        } catch (const ValidationError& e) {
            return e.field();
        }
        return std::string("none");
    };
    CHECK(field_of(0.0, 0.1, 1.0) == "K");
    CHECK(field_of(-1.0, 0.1, 1.0) == "K");
    CHECK(field_of(5.0, -0.1, 1.0) == "lambda");
    CHECK(field_of(5.0, std::nan(""), 1.0) == "lambda");
    CHECK(field_of(5.0, 0.1, 0.0) == "hbar");
}

TEST_CASE("p_clamp must square without overflow") {
    SystemParams p;
    p.p_clamp = 1e160;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p.p_clamp = 1e152;
    CHECK_NOTHROW(validate(p));
}

TEST_CASE("ensemble sampling is deterministic and prefix-stable") {
    const auto a = sample_initial_ensemble({1000, 42, 5});
    const auto b = sample_initial_ensemble({1000, 42, 5});
    const auto c = sample_initial_ensemble({250, 42, 5});
    CHECK(a == b);
    CHECK(std::equal(c.begin(), c.end(), a.begin()));
    const auto d = sample_initial_ensemble({1000, 43, 5});
    CHECK(a != d);
    for (const auto& s : a) {
        CHECK(s.theta_r >= -std::numbers::pi);
        CHECK(s.theta_r < std::numbers::pi);
        CHECK(s.theta_i == 0.0);
        CHECK(s.p_r == 0.0);
        CHECK(s.p_i == 0.0);
        CHECK_FALSE(s.diverged);
    }
}

TEST_CASE("sampled angles are uniform") {
    const std::int64_t n = 10000;
    const auto pts = sample_initial_ensemble({n, 7, 1});
    double s2 = 0.0;
    std::vector<double> u;
    for (const auto& s : pts) {
        s2 += std::sin(s.theta_r) * std::sin(s.theta_r);
        u.push_back((s.theta_r + std::numbers::pi) / (2.0 * std::numbers::pi));
    }
    CHECK(s2 / n == doctest::Approx(0.5).epsilon(0.04));

    // Kolmogorov-Smirnov at the 1% level
    std::sort(u.begin(), u.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        ks = std::max(ks, std::abs(u[i] - static_cast<double>(i) / n));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - u[i]));
    }
    CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("uniform_at stays in [0, 1)") {
    for (std::uint64_t i = 0; i < 100000; ++i) {
        const double u = uniform_at(3, i);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("bad ensemble config is rejected") {
    CHECK_THROWS_AS(sample_initial_ensemble({0, 0, 5}), ValidationError);
    CHECK_THROWS_AS(sample_initial_ensemble({10, 0, 0}), ValidationError);
}

}
