#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <variant>
#include <vector>

#include "wavefilter/rng.hpp"
#include "wavefilter/vec2.hpp"

namespace wavefilter {

// Wave-velocity path c(t) together with its exact displacement integral
// D(t) = int_0^t c(s) ds. The solution operators only ever consume D(t), so
// each kind stores whatever makes the integral exact:
//
//   Constant           D(t) = c t
//   IntegrableDrift    D(t) = c_base t - alpha (1 - (t0/(t+t0))^beta)
//                      so a Constant(c_base) model paired with this truth has
//                      int_0^t (c - c')(s) ds = alpha (1 - (t0/(t+t0))^beta)
//                      = alpha + O(t^-beta), in closed form.
//   BrownianPerturbed  D(t_n) = c_base t_n - eps W(t_n), with W a standard 2D
//                      Wiener path pre-sampled on the observation grid
//                      t_n = n dt (independent N(0, dt) increments per axis).

struct ConstantVelocity {
    Vec2 c;
};

struct IntegrableDriftVelocity {
    Vec2 c_base;
    Vec2 alpha;
    double beta = 1.0;
    double t0 = 0.1;
};

struct BrownianPerturbedVelocity {
    Vec2 c_base;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    double dt = 0.1;
    int n_steps = 0;
};

class VelocityPath {
public:
    VelocityPath(ConstantVelocity k) : kind_(k) {}

    VelocityPath(IntegrableDriftVelocity k) : kind_(k) {
        if (k.beta <= 0.0) throw std::invalid_argument("IntegrableDrift: beta must be > 0");
        if (k.t0 <= 0.0) throw std::invalid_argument("IntegrableDrift: t0 must be > 0");
    }

    VelocityPath(BrownianPerturbedVelocity k) : kind_(k) {
        if (k.epsilon < 0.0) throw std::invalid_argument("BrownianPerturbed: epsilon < 0");
        if (k.dt <= 0.0) throw std::invalid_argument("BrownianPerturbed: dt must be > 0");
        if (k.n_steps < 0) throw std::invalid_argument("BrownianPerturbed: n_steps < 0");
        // Samples are drawn eagerly so the path is immutable and shareable.
        auto w = std::make_shared<std::vector<Vec2>>(static_cast<std::size_t>(k.n_steps) + 1);
        Rng rng(k.seed);
        const double step_sd = std::sqrt(k.dt);
        (*w)[0] = Vec2{0.0, 0.0};
        for (int j = 1; j <= k.n_steps; ++j)
            (*w)[static_cast<std::size_t>(j)] =
                (*w)[static_cast<std::size_t>(j) - 1] +
                Vec2{step_sd * rng.normal(), step_sd * rng.normal()};
        wiener_ = std::move(w);
    }

    static VelocityPath constant(Vec2 c) { return VelocityPath(ConstantVelocity{c}); }

    bool is_constant() const { return std::holds_alternative<ConstantVelocity>(kind_); }

    Vec2 base_velocity() const {
        if (auto* c = std::get_if<ConstantVelocity>(&kind_)) return c->c;
        if (auto* d = std::get_if<IntegrableDriftVelocity>(&kind_)) return d->c_base;
        return std::get<BrownianPerturbedVelocity>(kind_).c_base;
    }

    // D(t) = int_0^t c(s) ds. Deterministic given the construction arguments.
    // Brownian paths are defined only on their sampled grid t_n = n dt.
    Vec2 displacement(double t) const {
        if (auto* c = std::get_if<ConstantVelocity>(&kind_)) return t * c->c;

        if (auto* d = std::get_if<IntegrableDriftVelocity>(&kind_)) {
            if (t < 0.0) throw std::invalid_argument("displacement: t must be >= 0");
            const double remainder = std::pow(d->t0 / (t + d->t0), d->beta);
            return t * d->c_base - (1.0 - remainder) * d->alpha;
        }

        const auto& b = std::get<BrownianPerturbedVelocity>(kind_);
        if (t < 0.0) throw std::invalid_argument("displacement: t must be >= 0");
        const double steps = t / b.dt;
        const long long j = std::llround(steps);
        if (std::abs(steps - static_cast<double>(j)) > 1e-9 || j < 0 || j > b.n_steps)
            throw std::invalid_argument(
                "displacement: Brownian path queried off its sampled time grid");
        return t * b.c_base - b.epsilon * (*wiener_)[static_cast<std::size_t>(j)];
    }

    // alpha - int_0^t delta_c for the drift kind; used by rate diagnostics.
    Vec2 drift_remainder(double t) const {
        const auto& d = std::get<IntegrableDriftVelocity>(kind_);
        return std::pow(d.t0 / (t + d.t0), d.beta) * d.alpha;
    }

    const std::variant<ConstantVelocity, IntegrableDriftVelocity, BrownianPerturbedVelocity>&
    kind() const {
        return kind_;
    }

private:
    std::variant<ConstantVelocity, IntegrableDriftVelocity, BrownianPerturbedVelocity> kind_;
    std::shared_ptr<const std::vector<Vec2>> wiener_;
};

// D_model(t) - D_truth(t): the accumulated model-error displacement that the
// smoother mean sees through e^{t(L - L')} u = u(. + D_model - D_truth).
inline Vec2 delta_displacement(const VelocityPath& model, const VelocityPath& truth,
                               double t) {
    return model.displacement(t) - truth.displacement(t);
}

}  // namespace wavefilter
