#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavefilter/advection.hpp"
#include "wavefilter/covariance.hpp"
#include "wavefilter/sampling.hpp"
#include "wavefilter/spectral_field.hpp"
#include "wavefilter/velocity.hpp"

namespace wavefilter {

// Model-error scenarios: the statistical model advects with the constant
// velocity c while the data is generated by a (possibly time-dependent or
// random) truth velocity c'(t).
//
//   none             c' = c
//   const_rational   c' = c - delta_c with dt*delta_c rational, default (1/2, 1/2)
//   const_irrational c' = c - delta_c with dt*delta_c irrational, default (1/e, 1/pi)
//   integrable       int_0^t (c - c') ds = alpha + O(t^-beta), default alpha=(1/2,1/2), beta=1
//   brownian         int_0^t (c - c') ds = eps W(t), default eps = 0.1
enum class ScenarioKind { none, const_rational, const_irrational, integrable, brownian };

inline ScenarioKind parse_scenario_kind(const std::string& name) {
    if (name == "none") return ScenarioKind::none;
    if (name == "const_rational") return ScenarioKind::const_rational;
    if (name == "const_irrational") return ScenarioKind::const_irrational;
    if (name == "integrable") return ScenarioKind::integrable;
    if (name == "brownian") return ScenarioKind::brownian;
    throw std::invalid_argument("unknown scenario kind: " + name);
}

inline std::string scenario_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::none: return "none";
        case ScenarioKind::const_rational: return "const_rational";
        case ScenarioKind::const_irrational: return "const_irrational";
        case ScenarioKind::integrable: return "integrable";
        case ScenarioKind::brownian: return "brownian";
    }
    return "?";
}

struct ScenarioParams {
    Vec2 delta_c{0.0, 0.0};   // const_* kinds; zero means "use the default"
    Vec2 alpha{0.5, 0.5};     // integrable
    double beta = 1.0;        // integrable
    double epsilon = 0.1;     // brownian
};

// Scenario defaults keyed to dt: the rational case pins dt*delta_c = (1/2, 1/2)
// and the irrational case pins dt*delta_c = (1/e, 1/pi), so the aliasing class
// of the product is what it claims to be regardless of dt.
inline Vec2 default_delta_c(ScenarioKind kind, double dt) {
    if (kind == ScenarioKind::const_rational) return {0.5 / dt, 0.5 / dt};
    if (kind == ScenarioKind::const_irrational)
        return {1.0 / (std::numbers::e * dt), 1.0 / (std::numbers::pi * dt)};
    return {0.0, 0.0};
}

// One concrete (model, truth) velocity pair. Brownian truths are sampled at
// construction from path_seed; n_steps must cover every queried time.
struct ScenarioRealization {
    VelocityPath model;
    VelocityPath truth;
};

inline ScenarioRealization realize_scenario(ScenarioKind kind, Vec2 model_c,
                                            const ScenarioParams& params, double dt,
                                            int n_steps, std::uint64_t path_seed) {
    const VelocityPath model = VelocityPath::constant(model_c);
    switch (kind) {
        case ScenarioKind::none:
            return {model, model};
        case ScenarioKind::const_rational:
        case ScenarioKind::const_irrational: {
            Vec2 dc = params.delta_c;
            if (dc.x == 0.0 && dc.y == 0.0) dc = default_delta_c(kind, dt);
            return {model, VelocityPath::constant(model_c - dc)};
        }
        case ScenarioKind::integrable:
            return {model, VelocityPath(IntegrableDriftVelocity{model_c, params.alpha,
                                                                params.beta, dt})};
        case ScenarioKind::brownian:
            return {model, VelocityPath(BrownianPerturbedVelocity{model_c, params.epsilon,
                                                                  path_seed, dt, n_steps})};
    }
    throw std::logic_error("realize_scenario: unreachable");
}

// The paper's true initial condition,
//   u(x1, x2) = sum_{k1,k2=1}^{3} [ sin(2 pi k1 x1) + cos(2 pi k2 x2) ]
//             = 3 sum_{k=1}^{3} sin(2 pi k x1) + 3 sum_{k=1}^{3} cos(2 pi k x2),
// carried by the modes (k, 0) and (0, k), k = 1..3, with <u> = 0.
inline SpectralField paper_truth_ic(const WavenumberLattice& lattice) {
    if (lattice.max_mode() < 3)
        throw std::invalid_argument("paper_truth_ic: needs max_mode >= 3");
    SpectralField u(lattice);
    for (int k = 1; k <= 3; ++k) {
        u.set_pair({k, 0}, Complex{0.0, -1.5});  // 3 sin(2 pi k x1)
        u.set_pair({0, k}, Complex{1.5, 0.0});   // 3 cos(2 pi k x2)
    }
    return u;
}

// Data-generation setup: y'_l = e^{-t_l L'} u + eta'_l, l = 1..n_obs, with
// eta' i.i.d. from obs_noise. Identical configs give bitwise identical
// sequences.
struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::none;
    Vec2 model_c{-0.5, -1.0};
    ScenarioParams params;
    double dt = 0.1;
    int n_obs = 1;
    SpectralField truth_ic;
    CovarianceSpec obs_noise;
    std::uint64_t noise_seed = 1;
    std::uint64_t path_seed = 1;

    ScenarioConfig(SpectralField u, CovarianceSpec noise)
        : truth_ic(std::move(u)), obs_noise(std::move(noise)) {
        if (dt <= 0.0) throw std::invalid_argument("ScenarioConfig: dt must be > 0");
    }
};

// Streams (truth state, observation) pairs in coefficient form without
// allocating per step; the error-curve harness consumes thousands of steps.
class ObservationStream {
public:
    explicit ObservationStream(const ScenarioConfig& cfg)
        : lattice_(cfg.truth_ic.lattice()),
          realization_(realize_scenario(cfg.kind, cfg.model_c, cfg.params, cfg.dt,
                                        cfg.n_obs, cfg.path_seed)),
          noise_(cfg.obs_noise, SpectralField::zero(cfg.truth_ic.lattice()),
                 cfg.noise_seed),
          u_(cfg.truth_ic.coeffs()),
          dt_(cfg.dt),
          n_obs_(cfg.n_obs) {
        if (cfg.n_obs < 1) throw std::invalid_argument("ObservationStream: n_obs must be >= 1");
    }

    const WavenumberLattice& lattice() const { return lattice_; }
    const VelocityPath& model_path() const { return realization_.model; }
    const VelocityPath& truth_path() const { return realization_.truth; }
    bool done() const { return l_ >= n_obs_; }
    int last_index() const { return l_; }

    // Advances to observation l+1; fills v'_l (truth) and y'_l (observation).
    void next(std::vector<Complex>& truth, std::vector<Complex>& observation) {
        if (done()) throw std::logic_error("ObservationStream: exhausted");
        ++l_;
        const double t = l_ * dt_;
        const Vec2 d = realization_.truth.displacement(t);

        truth.assign(lattice_.size(), Complex{0.0, 0.0});
        const int m = lattice_.max_mode();
        for (int k1 = 0; k1 <= m; ++k1) {
            for (int k2 = -m; k2 <= m; ++k2) {
                const Mode k{k1, k2};
                if (!WavenumberLattice::is_representative(k)) continue;
                const Complex c = u_[lattice_.index(k)] * mode_phase(k, d, -1.0);
                truth[lattice_.index(k)] = c;
                truth[lattice_.index(-k)] = std::conj(c);
            }
        }
        observation = truth;
        noise_.add_noise(observation);
    }

private:
    WavenumberLattice lattice_;
    ScenarioRealization realization_;
    GaussianSampler noise_;
    std::vector<Complex> u_;
    double dt_;
    int n_obs_;
    int l_ = 0;
};

inline std::vector<SpectralField> generate_observations(const ScenarioConfig& cfg) {
    ObservationStream stream(cfg);
    std::vector<SpectralField> out;
    out.reserve(static_cast<std::size_t>(cfg.n_obs));
    std::vector<Complex> truth;
    std::vector<Complex> obs;
    while (!stream.done()) {
        stream.next(truth, obs);
        SpectralField y(cfg.truth_ic.lattice());
        y.raw() = obs;
        out.push_back(std::move(y));
    }
    return out;
}

// v'_l = e^{-t_l L'} u for a given realization.
inline SpectralField truth_state(const ScenarioConfig& cfg, int l) {
    const auto realization = realize_scenario(cfg.kind, cfg.model_c, cfg.params, cfg.dt,
                                              cfg.n_obs, cfg.path_seed);
    const AdvectionOperator op(realization.truth);
    return op.propagate(cfg.truth_ic, l * cfg.dt);
}

}  // namespace wavefilter
