#include <doctest.h>

#include <limits>
#include <vector>

#include "ptkr/errors.hpp"
#include "ptkr/fit.hpp"

using namespace ptkr;

TEST_SUITE("fit") {

TEST_CASE("exact line") {
    std::vector<double> xs{0, 1, 2, 3, 4}, ys;
    for (double x : xs) ys.push_back(3.0 * x + 1.0);
    const auto f = fit_line(xs, ys);
    CHECK(f.slope == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.residual < 1e-24);
}

TEST_CASE("through origin ignores the intercept") {
    std::vector<double> xs{1, 2, 3, 4, 5, 6};
    std::vector<double> ys{12.4, 25.3, 37.2, 50.1, 62.3, 75.2};
    const auto f = fit_line(xs, ys, true);
    CHECK(f.intercept == 0.0);
    CHECK(f.slope == doctest::Approx(12.5).epsilon(0.01));
}

TEST_CASE("degenerate input") {
    std::vector<double> same{2, 2, 2}, ys{1, 2, 3};
    CHECK_THROWS_AS(fit_line(same, ys), FitWindowError);
    std::vector<double> one{1}, y1{1};
    CHECK_THROWS_AS(fit_line(one, y1), FitWindowError);
    std::vector<double> xs{1, 2, 3}, bad{1, std::numeric_limits<double>::infinity(), 3};
    CHECK_THROWS_AS(fit_line(xs, bad), FitWindowError);
    std::vector<double> short_ys{1, 2};
    CHECK_THROWS_AS(fit_line(xs, short_ys), FitWindowError);
}

}
