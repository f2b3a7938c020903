#include "ptkr/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ptkr/quantum.hpp"

namespace ptkr {

Eigen::MatrixXcd build_floquet_matrix(const SystemParams& params, std::size_t dim) {
    validate(params);
    validate_dim(dim);
    if (dim < 8 || dim > kMaxSpectrumDim)
        throw ValidationError("dim", "spectrum basis must lie in [8, " + std::to_string(kMaxSpectrumDim) + "]");
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto n = static_cast<std::int64_t>(dim);
#pragma omp parallel
    {
        Propagator prop(params, dim);
        std::vector<cplx> column(dim);
#pragma omp for schedule(static)
        for (std::int64_t j = 0; j < n; ++j) {
            std::fill(column.begin(), column.end(), cplx{});
            column[static_cast<std::size_t>(j)] = 1.0;
            try {
                prop.apply(column, Direction::Forward);
            } catch (const NumericalError&) {
                std::fill(column.begin(), column.end(), cplx{std::nan(""), 0.0});
            }
            for (std::int64_t i = 0; i < n; ++i) m(i, j) = column[static_cast<std::size_t>(i)];
        }
    }
    if (!m.allFinite())
        throw NumericalError("build_floquet_matrix: kick factor overflow for K*lambda/hbar = " +
                             std::to_string(params.K * params.lambda / params.hbar));
    return m;
}

QuasienergySet quasienergies(const Eigen::MatrixXcd& matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0)
        throw ValidationError("matrix", "must be square and non-empty");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, false);
    if (solver.info() != Eigen::Success) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(matrix);
        const auto& s = svd.singularValues();
        throw NumericalError("quasienergies: eigensolver did not converge (condition number " +
                             std::to_string(s(0) / s(s.size() - 1)) + ")");
    }
    QuasienergySet qs;
    qs.dim = static_cast<std::size_t>(matrix.rows());
    for (const auto& mu : solver.eigenvalues()) {
        Quasienergy q;
        q.modulus = std::abs(mu);
        q.real = -std::arg(mu);
        if (q.real <= -std::numbers::pi) q.real += 2.0 * std::numbers::pi;
        q.imag = -std::log(q.modulus);
        qs.max_modulus_deviation = std::max(qs.max_modulus_deviation, std::abs(q.modulus - 1.0));
        qs.max_abs_imag = std::max(qs.max_abs_imag, std::abs(q.imag));
        qs.levels.push_back(q);
    }
    std::sort(qs.levels.begin(), qs.levels.end(), [](const Quasienergy& a, const Quasienergy& b) {
        return a.real != b.real ? a.real < b.real : a.imag < b.imag;
    });
    return qs;
}

bool is_pt_broken(const QuasienergySet& qs, double tol) { return qs.max_abs_imag > tol; }

LambdaCritical find_lambda_c(const SystemParams& params, std::size_t dim, double lo, double hi, double tol_lambda,
                             double tol_imag) {
    if (!(lo >= 0.0 && hi > lo)) throw ValidationError("bracket", "needs 0 <= lo < hi");
    if (!(tol_lambda > 0.0)) throw ValidationError("tol_lambda", "must be > 0");
    auto broken_at = [&](double lambda) {
        SystemParams p = params;
        p.lambda = lambda;
        return is_pt_broken(quasienergies(build_floquet_matrix(p, dim)), tol_imag);
    };
    const bool b_lo = broken_at(lo);
    const bool b_hi = broken_at(hi);
    if (b_lo == b_hi)
        throw ValidationError("bracket", std::string("PT breaking status is the same (") +
                                             (b_lo ? "broken" : "unbroken") + ") at both ends");
    if (b_lo) std::swap(lo, hi);  // keep lo unbroken; only happens for inverted brackets

    LambdaCritical out;
    while (std::abs(hi - lo) > tol_lambda) {
        const double mid = 0.5 * (lo + hi);
        (broken_at(mid) ? hi : lo) = mid;
        ++out.iterations;
    }
    out.lo = lo;
    out.hi = hi;
    out.lambda_c = 0.5 * (lo + hi);
    return out;
}

}  // namespace ptkr
