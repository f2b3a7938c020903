#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ptkr/core.hpp"

namespace ptkr {

using cplx = std::complex<double>;

/// Which one-period operator to apply: U, U† or U⁻¹.
enum class Direction { Forward, Adjoint, Inverse };

/// State in the truncated angular-momentum basis.
///
/// amps[i] is ψ_n for n = i − dim/2, so n runs over [−dim/2, dim/2). The stored
/// vector has unit norm; the physical norm is exp(log_norm).
struct QuantumState {
    std::vector<cplx> amps;
    double log_norm = 0.0;

    std::size_t dim() const noexcept { return amps.size(); }
    int momentum_index(std::size_t i) const noexcept {
        return static_cast<int>(i) - static_cast<int>(amps.size() / 2);
    }
};

struct Observables {
    double mean_p = 0.0;
    double mean_p2 = 0.0;
    double m2 = 0.0;
    double log_norm = 0.0;
};

/// Throws ValidationError unless dim ≥ 2 is a power of two.
void validate_dim(std::size_t dim);

/// ψ_0 = 1 (the flat wavefunction 1/√2π).
QuantumState init_uniform_state(std::size_t dim);

/// Momentum coefficients of (σ/π)^¼ exp(−σθ²/2) sampled on the θ grid.
QuantumState init_gaussian_state(std::size_t dim, double sigma);

/// Folds the vector norm into log_norm. A zero vector gets log_norm = −∞.
/// Throws NumericalError if the norm is not finite.
void renormalize(QuantumState& state);

/// θ_k = −π + 2πk/dim.
std::vector<double> angle_grid(std::size_t dim);

/// Split-step Floquet propagator U = exp(−i p²/2ℏ) exp(−i V(θ)/ℏ) on a fixed
/// basis size. Owns FFTW plans and a workspace, so one instance per thread.
class Propagator {
public:
    Propagator(const SystemParams& params, std::size_t dim);
    ~Propagator();
    Propagator(Propagator&&) noexcept;
    Propagator& operator=(Propagator&&) noexcept;
    Propagator(const Propagator&) = delete;
    Propagator& operator=(const Propagator&) = delete;

    std::size_t dim() const noexcept;
    const SystemParams& params() const noexcept;

    /// One period on a raw amplitude vector, no renormalization.
    /// Forward: kick, then kinetic phase. Adjoint/Inverse: reverse order with
    /// conjugated/inverted factors. Throws NumericalError on non-finite output.
    void apply(std::span<cplx> amps, Direction dir);

    /// Kick factor only (angle representation), for diagnostics and tests.
    void apply_kick(std::span<cplx> amps, Direction dir);
    void apply_kinetic(std::span<cplx> amps, Direction dir) const;

    /// apply() followed by renormalize().
    void step(QuantumState& state, Direction dir);

    /// ψ(θ_k)·√(2π) = Σ_n ψ_n e^{inθ_k}, and its inverse.
    std::vector<cplx> to_angle(std::span<const cplx> amps);
    std::vector<cplx> from_angle(std::span<const cplx> values);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper that builds a propagator for a single step.
void floquet_step(QuantumState& state, const SystemParams& params, Direction dir);

/// Serial O(dim²) propagator using explicit DFT sums. Same contract as
/// Propagator::apply; kept as a reference for tests and the benchmark.
class ReferencePropagator {
public:
    ReferencePropagator(const SystemParams& params, std::size_t dim);
    void apply(std::span<cplx> amps, Direction dir) const;

private:
    SystemParams params_;
    std::size_t dim_;
};

Observables observables(const QuantumState& state, const SystemParams& params);

/// Probability in the outermost 1% of the basis (dim/200 indices per side, at least one).
double tail_mass(const QuantumState& state);

struct EvolutionRecord {
    std::vector<Observables> rows;  ///< rows[t] for t = 0..kicks
    std::optional<int> truncation_kick;  ///< first kick whose tail mass exceeded the guard
    double max_tail_mass = 0.0;
};

/// Applies `kicks` steps in place, recording observables after each one.
/// A tail-mass guard violation is recorded, not thrown.
EvolutionRecord evolve(QuantumState& state, Propagator& prop, int kicks, Direction dir,
                       double tail_guard = 1e-10);
EvolutionRecord evolve(QuantumState& state, const SystemParams& params, int kicks, Direction dir,
                       double tail_guard = 1e-10);

/// (n, |ψ_n|²/Σ|ψ|²) for every basis index.
std::vector<std::pair<int, double>> momentum_distribution(const QuantumState& state);

/// (θ_k, |ψ(θ_k)|²) normalized so Σ density·2π/dim = 1.
std::vector<std::pair<double, double>> angular_distribution(const QuantumState& state);

}  // namespace ptkr
