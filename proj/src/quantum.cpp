#include "ptkr/quantum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>

namespace ptkr {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// Momentum-ordered amplitudes <-> angle grid, via one in-place FFTW workspace.
class AngleTransform {
public:
    explicit AngleTransform(std::size_t n) : n_(n), sign_(n) {
        std::lock_guard lock(planner_mutex());
        work_ = fftw_alloc_complex(n);
        const int ni = static_cast<int>(n);
        to_angle_ = fftw_plan_dft_1d(ni, work_, work_, FFTW_BACKWARD, FFTW_ESTIMATE);
        from_angle_ = fftw_plan_dft_1d(ni, work_, work_, FFTW_FORWARD, FFTW_ESTIMATE);
        for (std::size_t i = 0; i < n; ++i) sign_[i] = ((i + n / 2) % 2 == 0) ? 1.0 : -1.0;
    }
    ~AngleTransform() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(to_angle_);
        fftw_destroy_plan(from_angle_);
        fftw_free(work_);
    }
    AngleTransform(const AngleTransform&) = delete;
    AngleTransform& operator=(const AngleTransform&) = delete;

    std::size_t size() const noexcept { return n_; }
    cplx* work() noexcept { return reinterpret_cast<cplx*>(work_); }

    // work[k] = Σ_n ψ_n e^{inθ_k}; e^{inθ_k} = (−1)^n e^{2πink/N}
    void load_momentum_to_angle(std::span<const cplx> amps) {
        cplx* w = work();
        const std::size_t half = n_ / 2;
        for (std::size_t i = 0; i < n_; ++i) w[(i + half) % n_] = amps[i] * sign_[i];
        fftw_execute(to_angle_);
    }
    // amps[i] = scale · Σ_k work[k] e^{−inθ_k}
    void store_angle_to_momentum(std::span<cplx> amps, double scale) {
        fftw_execute(from_angle_);
        const cplx* w = work();
        const std::size_t half = n_ / 2;
        for (std::size_t i = 0; i < n_; ++i) amps[i] = w[(i + half) % n_] * (sign_[i] * scale);
    }

private:
    std::size_t n_;
    fftw_complex* work_ = nullptr;
    fftw_plan to_angle_ = nullptr;
    fftw_plan from_angle_ = nullptr;
    std::vector<double> sign_;
};

double theta_at(std::size_t k, std::size_t n) {
    return -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
}

// exp(−iℏn²/2)
cplx kinetic_phase(double hbar, int n) {
    const double nn = static_cast<double>(n) * static_cast<double>(n);
    return std::polar(1.0, -0.5 * hbar * nn);
}

// Kick factor at angle θ for each direction; the gain exp(Kλ sinθ/ℏ) is real.
cplx kick_factor(const SystemParams& p, double theta, Direction dir) {
    const double phase = p.K * std::cos(theta) / p.hbar;
    const double gain = p.K * p.lambda * std::sin(theta) / p.hbar;
    switch (dir) {
        case Direction::Forward: return std::polar(std::exp(gain), -phase);
        case Direction::Adjoint: return std::polar(std::exp(gain), phase);
        case Direction::Inverse: return std::polar(std::exp(-gain), phase);
    }
    return {};
}

void require_finite(std::span<const cplx> amps, const char* where) {
    for (const auto& a : amps)
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
            throw NumericalError(std::string(where) +
                                 ": non-finite amplitude (kick gain exp(K*lambda/hbar) too large; "
                                 "renormalize more often or reduce K*lambda/hbar)");
}

double norm2(std::span<const cplx> amps) {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
}

}  // namespace

void validate_dim(std::size_t dim) {
    if (!is_pow2(dim)) throw ValidationError("dim", "must be a power of two >= 2, got " + std::to_string(dim));
}

std::vector<double> angle_grid(std::size_t dim) {
    std::vector<double> g(dim);
    for (std::size_t k = 0; k < dim; ++k) g[k] = theta_at(k, dim);
    return g;
}

void renormalize(QuantumState& state) {
    const double n2 = norm2(state.amps);
    if (!std::isfinite(n2)) throw NumericalError("renormalize: norm is not finite");
    if (n2 == 0.0) {
        state.log_norm = -std::numeric_limits<double>::infinity();
        return;
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : state.amps) a *= inv;
    state.log_norm += 0.5 * std::log(n2);
}

QuantumState init_uniform_state(std::size_t dim) {
    validate_dim(dim);
    QuantumState s;
    s.amps.assign(dim, cplx{});
    s.amps[dim / 2] = 1.0;
    return s;
}

QuantumState init_gaussian_state(std::size_t dim, double sigma) {
    validate_dim(dim);
    if (!(std::isfinite(sigma) && sigma > 0.0)) throw ValidationError("sigma", "must be finite and > 0");
    AngleTransform fft(dim);
    const double amp = std::pow(sigma / std::numbers::pi, 0.25);
    cplx* w = fft.work();
    for (std::size_t k = 0; k < dim; ++k) {
        const double th = theta_at(k, dim);
        w[k] = amp * std::exp(-0.5 * sigma * th * th);
    }
    QuantumState s;
    s.amps.assign(dim, cplx{});
    fft.store_angle_to_momentum(s.amps, 1.0 / static_cast<double>(dim));
    renormalize(s);
    s.log_norm = 0.0;
    return s;
}

struct Propagator::Impl {
    SystemParams params;
    AngleTransform fft;
    std::vector<cplx> kinetic;           // per momentum index
    std::vector<cplx> kick[3];           // per angle index, scaled by 1/dim

    Impl(const SystemParams& p, std::size_t n) : params(p), fft(n), kinetic(n) {
        for (std::size_t i = 0; i < n; ++i)
            kinetic[i] = kinetic_phase(p.hbar, static_cast<int>(i) - static_cast<int>(n / 2));
        const double inv = 1.0 / static_cast<double>(n);
        for (int d = 0; d < 3; ++d) {
            kick[d].resize(n);
            for (std::size_t k = 0; k < n; ++k)
                kick[d][k] = kick_factor(p, theta_at(k, n), static_cast<Direction>(d)) * inv;
        }
    }
};

Propagator::Propagator(const SystemParams& params, std::size_t dim) {
    validate(params);
    validate_dim(dim);
    impl_ = std::make_unique<Impl>(params, dim);
}
Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;
Propagator& Propagator::operator=(Propagator&&) noexcept = default;

std::size_t Propagator::dim() const noexcept { return impl_->fft.size(); }
const SystemParams& Propagator::params() const noexcept { return impl_->params; }

void Propagator::apply_kick(std::span<cplx> amps, Direction dir) {
    auto& fft = impl_->fft;
    const auto& factor = impl_->kick[static_cast<int>(dir)];
    fft.load_momentum_to_angle(amps);
    cplx* w = fft.work();
    for (std::size_t k = 0; k < factor.size(); ++k) w[k] *= factor[k];
    fft.store_angle_to_momentum(amps, 1.0);
}

void Propagator::apply_kinetic(std::span<cplx> amps, Direction dir) const {
    const auto& kin = impl_->kinetic;
    if (dir == Direction::Forward) {
        for (std::size_t i = 0; i < kin.size(); ++i) amps[i] *= kin[i];
    } else {
        for (std::size_t i = 0; i < kin.size(); ++i) amps[i] *= std::conj(kin[i]);
    }
}

void Propagator::apply(std::span<cplx> amps, Direction dir) {
    if (amps.size() != dim()) throw ValidationError("amps", "size does not match the propagator dim");
    if (dir == Direction::Forward) {
        apply_kick(amps, dir);
        apply_kinetic(amps, dir);
    } else {
        apply_kinetic(amps, dir);
        apply_kick(amps, dir);
    }
    require_finite(amps, "floquet_step");
}

void Propagator::step(QuantumState& state, Direction dir) {
    apply(state.amps, dir);
    renormalize(state);
}

std::vector<cplx> Propagator::to_angle(std::span<const cplx> amps) {
    auto& fft = impl_->fft;
    fft.load_momentum_to_angle(amps);
    return {fft.work(), fft.work() + fft.size()};
}

std::vector<cplx> Propagator::from_angle(std::span<const cplx> values) {
    auto& fft = impl_->fft;
    std::copy(values.begin(), values.end(), fft.work());
    std::vector<cplx> amps(fft.size());
    fft.store_angle_to_momentum(amps, 1.0 / static_cast<double>(fft.size()));
    return amps;
}

void floquet_step(QuantumState& state, const SystemParams& params, Direction dir) {
    Propagator prop(params, state.dim());
    prop.step(state, dir);
}

ReferencePropagator::ReferencePropagator(const SystemParams& params, std::size_t dim)
    : params_(params), dim_(dim) {
    validate(params);
    validate_dim(dim);
}

void ReferencePropagator::apply(std::span<cplx> amps, Direction dir) const {
    const std::size_t n = dim_;
    const int half = static_cast<int>(n / 2);
    auto kinetic = [&](bool conj) {
        for (std::size_t i = 0; i < n; ++i) {
            const cplx k = kinetic_phase(params_.hbar, static_cast<int>(i) - half);
            amps[i] *= conj ? std::conj(k) : k;
        }
    };
    auto kick = [&] {
        std::vector<cplx> psi_theta(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double th = theta_at(k, n);
            cplx acc{};
            for (std::size_t i = 0; i < n; ++i)
                acc += amps[i] * std::polar(1.0, static_cast<double>(static_cast<int>(i) - half) * th);
            psi_theta[k] = acc * kick_factor(params_, th, dir);
        }
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc{};
            const double m = static_cast<double>(static_cast<int>(i) - half);
            for (std::size_t k = 0; k < n; ++k) acc += psi_theta[k] * std::polar(1.0, -m * theta_at(k, n));
            amps[i] = acc / static_cast<double>(n);
        }
    };
    if (dir == Direction::Forward) {
        kick();
        kinetic(false);
    } else {
        kinetic(true);
        kick();
    }
    require_finite(amps, "ReferencePropagator::apply");
}

Observables observables(const QuantumState& state, const SystemParams& params) {
    double n2 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < state.dim(); ++i) {
        const double w = std::norm(state.amps[i]);
        const double p = state.momentum_index(i) * params.hbar;
        n2 += w;
        s1 += w * p;
        s2 += w * p * p;
    }
    Observables o;
    o.log_norm = state.log_norm;
    if (n2 == 0.0) return o;
    o.mean_p = s1 / n2;
    o.mean_p2 = s2 / n2;
    o.m2 = o.mean_p2 - o.mean_p * o.mean_p;
    return o;
}

double tail_mass(const QuantumState& state) {
    const std::size_t n = state.dim();
    const std::size_t w = std::max<std::size_t>(1, n / 200);
    double total = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = std::norm(state.amps[i]);
        total += p;
        if (i < w || i >= n - w) tail += p;
    }
    return total > 0.0 ? tail / total : 0.0;
}

EvolutionRecord evolve(QuantumState& state, Propagator& prop, int kicks, Direction dir, double tail_guard) {
    if (kicks < 1) throw ValidationError("t", "must be >= 1");
    if (state.dim() != prop.dim()) throw ValidationError("dim", "state and propagator disagree");
    EvolutionRecord rec;
    rec.rows.reserve(static_cast<std::size_t>(kicks) + 1);
    rec.rows.push_back(observables(state, prop.params()));
    for (int t = 1; t <= kicks; ++t) {
        prop.step(state, dir);
        rec.rows.push_back(observables(state, prop.params()));
        const double tail = tail_mass(state);
        rec.max_tail_mass = std::max(rec.max_tail_mass, tail);
        if (tail > tail_guard && !rec.truncation_kick) rec.truncation_kick = t;
    }
    return rec;
}

EvolutionRecord evolve(QuantumState& state, const SystemParams& params, int kicks, Direction dir,
                       double tail_guard) {
    Propagator prop(params, state.dim());
    return evolve(state, prop, kicks, dir, tail_guard);
}

std::vector<std::pair<int, double>> momentum_distribution(const QuantumState& state) {
    const double n2 = norm2(state.amps);
    std::vector<std::pair<int, double>> out(state.dim());
    for (std::size_t i = 0; i < state.dim(); ++i)
        out[i] = {state.momentum_index(i), n2 > 0.0 ? std::norm(state.amps[i]) / n2 : 0.0};
    return out;
}

std::vector<std::pair<double, double>> angular_distribution(const QuantumState& state) {
    const std::size_t n = state.dim();
    AngleTransform fft(n);
    fft.load_momentum_to_angle(state.amps);
    const cplx* w = fft.work();
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += std::norm(w[k]);
    std::vector<std::pair<double, double>> out(n);
    const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = {theta_at(k, n), total > 0.0 ? std::norm(w[k]) / (total * dtheta) : 0.0};
    return out;
}

}  // namespace ptkr
