#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ptkr/quantum.hpp"
#include "ptkr/spectrum.hpp"

using namespace ptkr;

TEST_SUITE("spectrum") {

TEST_CASE("real kick gives a unitary matrix") {
    const auto m = build_floquet_matrix(make_params(7.0, 0.0, 1.4), 256);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(256, 256);
    CHECK((m.adjoint() * m - id).cwiseAbs().maxCoeff() < 1e-12);
    const auto qs = quasienergies(m);
    CHECK(qs.levels.size() == 256);
    CHECK(qs.max_modulus_deviation < 1e-8);
    CHECK_FALSE(is_pt_broken(qs));
}

TEST_CASE("matrix reproduces the propagator") {
    const auto p = make_params(3.0, 0.2, 0.8);
    const std::size_t n = 64;
    const auto m = build_floquet_matrix(p, n);
    Propagator prop(p, n);
    Eigen::VectorXcd v(n);
    std::vector<cplx> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = v(static_cast<Eigen::Index>(i)) = cplx{std::sin(1.0 + i), std::cos(0.3 * i)};
    prop.apply(w, Direction::Forward);
    const Eigen::VectorXcd mv = m * v;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(mv(static_cast<Eigen::Index>(i)) - w[i]));
    CHECK(worst < 1e-12);
    prop.apply(w, Direction::Forward);
    const Eigen::VectorXcd m2v = m * mv;
    worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(m2v(static_cast<Eigen::Index>(i)) - w[i]));
    CHECK(worst < 1e-11);
}

TEST_CASE("quasienergy conventions on a diagonal matrix") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = std::polar(1.0, -0.3);
    d(1, 1) = std::polar(0.5, 0.5);
    const auto qs = quasienergies(d);
    REQUIRE(qs.levels.size() == 2);
    CHECK(qs.levels[0].real == doctest::Approx(-0.5));
    CHECK(qs.levels[0].imag == doctest::Approx(std::log(2.0)));
    CHECK(qs.levels[0].modulus == doctest::Approx(0.5));
    CHECK(qs.levels[1].real == doctest::Approx(0.3));
    CHECK(qs.levels[1].imag == doctest::Approx(0.0));
    CHECK(qs.max_abs_imag == doctest::Approx(std::log(2.0)));

    Eigen::MatrixXcd minus_one = -Eigen::MatrixXcd::Identity(1, 1);
    // wrapped into (-π, π]
    CHECK(quasienergies(minus_one).levels[0].real == doctest::Approx(3.14159265358979).epsilon(1e-12));
    CHECK_THROWS_AS(quasienergies(Eigen::MatrixXcd(2, 3)), ValidationError);
}

TEST_CASE("strong imaginary kick breaks the symmetry in pairs") {
    const auto qs = quasienergies(build_floquet_matrix(make_params(7.0, 0.5, 1.4), 128));
    CHECK(is_pt_broken(qs));
    std::vector<double> im;
    for (const auto& q : qs.levels) im.push_back(q.imag);
    std::sort(im.begin(), im.end());
    double total = 0.0;
    for (std::size_t i = 0; i < im.size(); ++i) {
        CHECK(im[i] == doctest::Approx(-im[im.size() - 1 - i]).epsilon(1e-6).scale(1.0));
        total += im[i];
    }
    CHECK(std::abs(total) < 1e-8);
}

TEST_CASE("basis size limits") {
    CHECK_THROWS_AS(build_floquet_matrix(make_params(1, 0, 1), 4), ValidationError);
    CHECK_THROWS_AS(build_floquet_matrix(make_params(1, 0, 1), 1024), ValidationError);
    CHECK_THROWS_AS(build_floquet_matrix(make_params(1, 0, 1), 48), ValidationError);
    CHECK_THROWS_AS(build_floquet_matrix(make_params(7.0, 300.0, 1.0), 16), NumericalError);
}

TEST_CASE("critical strength bisection") {
    const auto p = make_params(7.0, 0.0, 1.4);
    CHECK_THROWS_AS(find_lambda_c(p, 16, 0.0, 1e-9, 1e-4), ValidationError);
    CHECK_THROWS_AS(find_lambda_c(p, 16, 0.3, 0.1, 1e-4), ValidationError);

    const auto coarse = find_lambda_c(p, 16, 1e-4, 0.5, 1e-3);
    const auto fine = find_lambda_c(p, 16, 1e-4, 0.5, 5e-4);
    CHECK(coarse.hi - coarse.lo <= 1e-3);
    CHECK(fine.hi - fine.lo <= 5e-4);
    CHECK(fine.lo >= coarse.lo);
    CHECK(fine.hi <= coarse.hi);
    CHECK(fine.iterations == coarse.iterations + 1);

    SystemParams at = p;
    at.lambda = coarse.lo;
    CHECK_FALSE(is_pt_broken(quasienergies(build_floquet_matrix(at, 16))));
    at.lambda = coarse.hi;
    CHECK(is_pt_broken(quasienergies(build_floquet_matrix(at, 16))));
}

}
