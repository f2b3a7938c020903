#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "ptkr/core.hpp"

namespace ptkr {

/// Largest basis for dense diagonalisation.
inline constexpr std::size_t kMaxSpectrumDim = 512;

/// Truncated Floquet operator in the momentum basis: column j is the
/// unrenormalised split-step applied to the j-th basis vector (n = j − dim/2).
/// Needs dim a power of two in [8, kMaxSpectrumDim].
Eigen::MatrixXcd build_floquet_matrix(const SystemParams& params, std::size_t dim);

struct Quasienergy {
    double real = 0.0;  ///< ε_r = −arg μ, in (−π, π]
    double imag = 0.0;  ///< ε_i = −ln|μ|; growing modes have ε_i < 0
    double modulus = 0.0;  ///< |μ|
};

struct QuasienergySet {
    std::size_t dim = 0;
    std::vector<Quasienergy> levels;  ///< sorted by ε_r, then ε_i
    double max_modulus_deviation = 0.0;  ///< max ||μ| − 1|
    double max_abs_imag = 0.0;
};

/// Eigenvalues μ of a square matrix mapped to quasienergies via μ = e^{−iε}
/// with the sign conventions above. Throws NumericalError if the solver fails.
QuasienergySet quasienergies(const Eigen::MatrixXcd& matrix);

/// max |ε_i| > tol.
bool is_pt_broken(const QuasienergySet& qs, double tol = 1e-6);

struct LambdaCritical {
    double lambda_c = 0.0;  ///< midpoint of the final bracket
    double lo = 0.0;        ///< unbroken
    double hi = 0.0;        ///< broken
    int iterations = 0;
};

/// Bisects λ between an unbroken `lo` and a broken `hi` until hi − lo ≤
/// tol_lambda. λ in `params` is ignored. Throws ValidationError when both ends
/// have the same breaking status.
LambdaCritical find_lambda_c(const SystemParams& params, std::size_t dim, double lo, double hi,
                             double tol_lambda, double tol_imag = 1e-6);

}  // namespace ptkr
