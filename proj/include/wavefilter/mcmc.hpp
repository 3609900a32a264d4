#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavefilter/kalman.hpp"
#include "wavefilter/rng.hpp"
#include "wavefilter/sampling.hpp"

namespace wavefilter {

// Function-space MCMC for P(v0 | c, Y_n) and Metropolis-within-Gibbs for
// P(c, v0 | Y_n). The pCN proposal v' = sqrt(1 - beta^2) v + beta xi with
// xi ~ N(0, C0) preserves the prior, so the acceptance probability uses only
// the data misfit: min(1, exp(Phi(v) - Phi(v'))).

struct PcnConfig {
    double step_beta = 0.1;
    long n_burn = 10000;
    long n_keep = 100000;  // kept states; with thin > 1 the chain runs n_keep * thin steps
    int thin = 1;
    std::uint64_t seed = 1;
    int batch_count = 100;      // batch-means MC-standard-error estimation
    int phi_trace_stride = 100; // post-burn Phi subsampling for the trace
};

struct PcnSummary {
    explicit PcnSummary(const WavenumberLattice& lattice)
        : mean(SpectralField::zero(lattice)) {}

    SpectralField mean;                  // empirical mean of kept states
    double acceptance_rate = 0.0;        // over burn-in + kept iterations
    std::vector<double> mean_std_error;  // per mode: MC se of the complex mean
    std::vector<double> phi_trace;
    long n_kept = 0;
};

namespace detail {

// Batch-means standard error of the per-mode chain mean. For mode k the
// reported se is sqrt((Var_re + Var_im)/B) over B batch means, i.e. the
// standard error of the complex mean with both components pooled.
class BatchMeanTracker {
public:
    BatchMeanTracker(std::size_t n_modes, long n_samples, int batch_count)
        : batch_size_(std::max(1L, n_samples / batch_count)),
          batch_acc_(n_modes, Complex{0.0, 0.0}),
          bm_sum_(n_modes, Complex{0.0, 0.0}),
          bm_sum_sq_re_(n_modes, 0.0),
          bm_sum_sq_im_(n_modes, 0.0) {}

    void add(const std::vector<Complex>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) batch_acc_[i] += v[i];
        if (++in_batch_ == batch_size_) {
            for (std::size_t i = 0; i < batch_acc_.size(); ++i) {
                const Complex bm = batch_acc_[i] / static_cast<double>(batch_size_);
                bm_sum_[i] += bm;
                bm_sum_sq_re_[i] += bm.real() * bm.real();
                bm_sum_sq_im_[i] += bm.imag() * bm.imag();
                batch_acc_[i] = Complex{0.0, 0.0};
            }
            in_batch_ = 0;
            ++batches_done_;
        }
    }

    std::vector<double> standard_errors() const {
        std::vector<double> se(bm_sum_.size(), 0.0);
        const double b = static_cast<double>(batches_done_);
        if (batches_done_ < 2) return se;
        for (std::size_t i = 0; i < se.size(); ++i) {
            const double mr = bm_sum_[i].real() / b;
            const double mi = bm_sum_[i].imag() / b;
            const double var_re = std::max(0.0, (bm_sum_sq_re_[i] - b * mr * mr) / (b - 1.0));
            const double var_im = std::max(0.0, (bm_sum_sq_im_[i] - b * mi * mi) / (b - 1.0));
            se[i] = std::sqrt((var_re + var_im) / b);
        }
        return se;
    }

private:
    long batch_size_;
    long in_batch_ = 0;
    long batches_done_ = 0;
    std::vector<Complex> batch_acc_;
    std::vector<Complex> bm_sum_;
    std::vector<double> bm_sum_sq_re_;
    std::vector<double> bm_sum_sq_im_;
};

}  // namespace detail

inline PcnSummary pcn_sample_initial_condition(const PcnConfig& cfg,
                                               const WavenumberLattice& lattice,
                                               const CovarianceSpec& prior, Vec2 c,
                                               const std::vector<SpectralField>& observations,
                                               double dt, double sigma2,
                                               const SpectralField* v_init = nullptr) {
    if (!(cfg.step_beta > 0.0 && cfg.step_beta <= 1.0))
        throw std::invalid_argument("pcn: step_beta must lie in (0, 1]");
    if (sigma2 <= 0.0) throw std::invalid_argument("pcn: sigma2 must be > 0");
    for (const auto& y : observations)
        if (!(y.lattice() == lattice))
            throw std::invalid_argument("pcn: observation lattice mismatch");

    GaussianSampler prior_sampler(prior, SpectralField::zero(lattice),
                                  mix_seed(cfg.seed, 0x5a));
    Rng rng(mix_seed(cfg.seed, 0xac));

    const MisfitAccumulator misfit(lattice, VelocityPath::constant(c), observations, dt,
                                   sigma2);

    const std::size_t n_modes = lattice.size();
    std::vector<Complex> v(n_modes, Complex{0.0, 0.0});
    if (v_init != nullptr) {
        if (!(v_init->lattice() == lattice))
            throw std::invalid_argument("pcn: v_init lattice mismatch");
        v = v_init->coeffs();
        if (prior.pins_constant_mode()) v[lattice.index({0, 0})] = Complex{0.0, 0.0};
    } else {
        prior_sampler.add_noise(v);  // cold start: a prior draw
    }
    double phi_v = misfit.phi(v);

    const double keep_ratio = std::sqrt(1.0 - cfg.step_beta * cfg.step_beta);
    std::vector<Complex> proposal(n_modes);
    std::vector<Complex> mean_acc(n_modes, Complex{0.0, 0.0});
    detail::BatchMeanTracker batches(n_modes, cfg.n_keep, cfg.batch_count);

    PcnSummary out(lattice);
    long accepted = 0;
    const int thin = std::max(1, cfg.thin);
    const long total = cfg.n_burn + cfg.n_keep * thin;
    long kept = 0;
    for (long it = 0; it < total; ++it) {
        for (std::size_t i = 0; i < n_modes; ++i) proposal[i] = keep_ratio * v[i];
        prior_sampler.add_noise_scaled(proposal, cfg.step_beta);
        const double phi_p = misfit.phi(proposal);
        if (std::log(rng.uniform()) < phi_v - phi_p) {
            v.swap(proposal);
            phi_v = phi_p;
            ++accepted;
        }
        if (it >= cfg.n_burn && (it - cfg.n_burn) % thin == thin - 1) {
            ++kept;
            for (std::size_t i = 0; i < n_modes; ++i) mean_acc[i] += v[i];
            batches.add(v);
            if (cfg.phi_trace_stride > 0 && kept % cfg.phi_trace_stride == 0)
                out.phi_trace.push_back(phi_v);
        }
    }

    out.n_kept = cfg.n_keep;
    out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
    out.mean = SpectralField::zero(lattice);
    for (std::size_t i = 0; i < n_modes; ++i)
        out.mean.raw()[i] = mean_acc[i] / static_cast<double>(cfg.n_keep);
    out.mean_std_error = batches.standard_errors();
    return out;
}

// Prior over the unknown wave velocity c. The paper never fixes rho(c); the
// default is a flat prior over a bounding box, with a proper Gaussian
// available.
struct CPrior {
    enum class Kind { flat_box, gaussian };
    Kind kind = Kind::flat_box;
    Vec2 lo{-2.0, -2.0};
    Vec2 hi{2.0, 2.0};
    Vec2 mean{0.0, 0.0};
    Vec2 sd{1.0, 1.0};

    double log_density(Vec2 c) const {
        if (kind == Kind::flat_box) {
            const bool inside = c.x >= lo.x && c.x <= hi.x && c.y >= lo.y && c.y <= hi.y;
            return inside ? 0.0 : -std::numeric_limits<double>::infinity();
        }
        const double zx = (c.x - mean.x) / sd.x;
        const double zy = (c.y - mean.y) / sd.y;
        return -0.5 * (zx * zx + zy * zy);
    }
};

struct GibbsConfig {
    double step_beta = 0.1;         // pCN step for the v0 block
    int inner_v_steps = 2;          // pCN updates per sweep
    int inner_c_steps = 2;          // random-walk c updates per sweep
    long n_burn_sweeps = 1000;
    long n_keep_sweeps = 10000;
    Vec2 c_proposal_std{0.01, 0.01};
    CPrior c_prior;
    std::uint64_t seed = 1;
};

struct GibbsSummary {
    explicit GibbsSummary(const WavenumberLattice& lattice)
        : v0_mean(SpectralField::zero(lattice)) {}

    std::vector<Vec2> c_samples;         // one per kept sweep
    std::vector<double> phi_trace;       // Phi(v, c) at each kept sweep
    std::vector<char> c_accepted_flags;  // any c move accepted in the sweep
    Vec2 c_mean{0.0, 0.0};
    Vec2 c_sd{0.0, 0.0};
    SpectralField v0_mean;
    double v_acceptance = 0.0;
    double c_acceptance = 0.0;
    Vec2 c_init{0.0, 0.0};
};

namespace detail {

// A_k(c) = sum_l e^{+2 pi i k . c t_l} y_l(k), evaluated with a per-mode
// rotation recurrence (one trig call per mode, n complex multiplies).
inline void back_phased_sums(const WavenumberLattice& lat,
                             const std::vector<SpectralField>& observations, Vec2 c,
                             double dt, std::vector<Complex>& out) {
    const std::size_t n_modes = lat.size();
    out.assign(n_modes, Complex{0.0, 0.0});
    if (observations.empty()) return;
    std::vector<Complex> rot(n_modes), phase(n_modes);
    for (std::size_t i = 0; i < n_modes; ++i) {
        const Mode k = lat.mode(i);
        const double turns = std::fmod(dot(k, c) * dt, 1.0);
        const double ang = 2.0 * std::numbers::pi * turns;
        rot[i] = Complex{std::cos(ang), std::sin(ang)};
        phase[i] = Complex{1.0, 0.0};
    }
    for (const auto& y : observations) {
        for (std::size_t i = 0; i < n_modes; ++i) {
            phase[i] *= rot[i];
            out[i] += phase[i] * y.coeff(i);
        }
    }
}

inline double cross_term(const std::vector<Complex>& v, const std::vector<Complex>& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += (v[i] * std::conj(a[i])).real();
    return acc;
}

}  // namespace detail

// Metropolis-within-Gibbs over (c, v0): alternates a pCN block on v0 given c
// with a Gaussian random-walk Metropolis block on c given v0. Both blocks use
// the same misfit Phi(v, c); the c block adds the log prior-ratio of rho(c).
// The posterior over (c, v0) is multimodal in c, so both coordinates should
// be seeded near the target (velocity_seed for c; the Kalman smoother mean at
// c_init is the natural v_init). A null v_init starts from a prior draw.
inline GibbsSummary gibbs_sample_velocity_and_ic(const GibbsConfig& cfg,
                                                 const WavenumberLattice& lattice,
                                                 const CovarianceSpec& prior,
                                                 const std::vector<SpectralField>& observations,
                                                 double dt, double sigma2, Vec2 c_init,
                                                 const SpectralField* v_init = nullptr) {
    if (!(cfg.step_beta > 0.0 && cfg.step_beta <= 1.0))
        throw std::invalid_argument("gibbs: step_beta must lie in (0, 1]");
    if (sigma2 <= 0.0) throw std::invalid_argument("gibbs: sigma2 must be > 0");
    if (observations.empty() && cfg.c_prior.kind != CPrior::Kind::gaussian)
        throw std::invalid_argument("gibbs: no data requires a proper Gaussian rho(c)");
    for (const auto& y : observations)
        if (!(y.lattice() == lattice))
            throw std::invalid_argument("gibbs: observation lattice mismatch");

    const std::size_t n_modes = lattice.size();
    const double n_obs = static_cast<double>(observations.size());

    GaussianSampler prior_sampler(prior, SpectralField::zero(lattice),
                                  mix_seed(cfg.seed, 0x5a));
    Rng rng(mix_seed(cfg.seed, 0xac));

    // Chain state: (v, c) plus the pieces of Phi(v, c) that each block reuses.
    std::vector<Complex> v(n_modes, Complex{0.0, 0.0});
    if (v_init != nullptr) {
        if (!(v_init->lattice() == lattice))
            throw std::invalid_argument("gibbs: v_init lattice mismatch");
        v = v_init->coeffs();
        if (prior.pins_constant_mode()) v[lattice.index({0, 0})] = Complex{0.0, 0.0};
    } else {
        prior_sampler.add_noise(v);
    }
    Vec2 c = c_init;

    double data_norm_sq = 0.0;
    for (const auto& y : observations)
        for (std::size_t i = 0; i < n_modes; ++i) data_norm_sq += std::norm(y.coeff(i));

    std::vector<Complex> a_current;
    detail::back_phased_sums(lattice, observations, c, dt, a_current);

    double v_norm_sq = 0.0;
    for (const auto& z : v) v_norm_sq += std::norm(z);
    double cross = detail::cross_term(v, a_current);

    const auto phi_of = [&](double cross_value, double vv) {
        return (data_norm_sq - 2.0 * cross_value + n_obs * vv) / (2.0 * sigma2);
    };

    const double keep_ratio = std::sqrt(1.0 - cfg.step_beta * cfg.step_beta);
    std::vector<Complex> proposal(n_modes);
    std::vector<Complex> a_proposal;

    GibbsSummary out(lattice);
    out.c_init = c_init;
    std::vector<Complex> v_mean_acc(n_modes, Complex{0.0, 0.0});
    out.c_samples.reserve(static_cast<std::size_t>(cfg.n_keep_sweeps));

    long v_accepted = 0, v_total = 0, c_accepted = 0, c_total = 0;
    const long total_sweeps = cfg.n_burn_sweeps + cfg.n_keep_sweeps;
    for (long sweep = 0; sweep < total_sweeps; ++sweep) {
        bool c_moved = false;
        // v0 | c : pCN.
        for (int s = 0; s < cfg.inner_v_steps; ++s, ++v_total) {
            for (std::size_t i = 0; i < n_modes; ++i) proposal[i] = keep_ratio * v[i];
            prior_sampler.add_noise_scaled(proposal, cfg.step_beta);
            double vv_p = 0.0;
            for (const auto& z : proposal) vv_p += std::norm(z);
            const double cross_p = detail::cross_term(proposal, a_current);
            const double dphi = phi_of(cross, v_norm_sq) - phi_of(cross_p, vv_p);
            if (std::log(rng.uniform()) < dphi) {
                v.swap(proposal);
                v_norm_sq = vv_p;
                cross = cross_p;
                ++v_accepted;
            }
        }
        // c | v0 : Gaussian random walk with prior rho(c).
        for (int s = 0; s < cfg.inner_c_steps; ++s, ++c_total) {
            const Vec2 c_prop{c.x + cfg.c_proposal_std.x * rng.normal(),
                              c.y + cfg.c_proposal_std.y * rng.normal()};
            const double log_prior_diff =
                cfg.c_prior.log_density(c_prop) - cfg.c_prior.log_density(c);
            if (log_prior_diff == -std::numeric_limits<double>::infinity()) continue;
            detail::back_phased_sums(lattice, observations, c_prop, dt, a_proposal);
            const double cross_p = detail::cross_term(v, a_proposal);
            const double dphi = phi_of(cross, v_norm_sq) - phi_of(cross_p, v_norm_sq);
            if (std::log(rng.uniform()) < dphi + log_prior_diff) {
                c = c_prop;
                a_current.swap(a_proposal);
                cross = cross_p;
                ++c_accepted;
                c_moved = true;
            }
        }

        if (sweep >= cfg.n_burn_sweeps) {
            out.c_samples.push_back(c);
            out.phi_trace.push_back(phi_of(cross, v_norm_sq));
            out.c_accepted_flags.push_back(c_moved ? 1 : 0);
            for (std::size_t i = 0; i < n_modes; ++i) v_mean_acc[i] += v[i];
        }
    }

    const double kept = static_cast<double>(cfg.n_keep_sweeps);
    for (std::size_t i = 0; i < n_modes; ++i) out.v0_mean.raw()[i] = v_mean_acc[i] / kept;
    out.v_acceptance = v_total > 0 ? static_cast<double>(v_accepted) / v_total : 0.0;
    out.c_acceptance = c_total > 0 ? static_cast<double>(c_accepted) / c_total : 0.0;

    Vec2 sum{0.0, 0.0}, sum_sq{0.0, 0.0};
    for (const Vec2& s : out.c_samples) {
        sum = sum + s;
        sum_sq = sum_sq + Vec2{s.x * s.x, s.y * s.y};
    }
    out.c_mean = sum / kept;
    out.c_sd = {std::sqrt(std::max(0.0, sum_sq.x / kept - out.c_mean.x * out.c_mean.x)),
                std::sqrt(std::max(0.0, sum_sq.y / kept - out.c_mean.y * out.c_mean.y))};
    return out;
}

// Raised when the seed estimator hits a (near) vanishing coefficient.
struct DegenerateModeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wave-velocity seed estimate from the observed phase increments of the
// lowest modes: with y_j(k) ~ (u, phi_k) e^{-2 pi i k . c' t_j}, successive
// ratios carry the phase -2 pi k . c' dt, so
//
//   c_hat_i = -(1 / (2 pi dt)) * mean_j arg( y_{j+1}(k) / y_j(k) ),
//
// k = (1,0) for c_1 and k = (0,1) for c_2: the least-squares minimizer of the
// log-ratio functional restricted to the imaginary part. The principal branch
// resolves the phase only while |c_i| dt < 1/2; beyond that the estimate
// aliases (no unwrapping is possible from a single mode).
inline Vec2 velocity_seed(const std::vector<SpectralField>& observations, double dt) {
    if (observations.size() < 2)
        throw std::invalid_argument("velocity_seed: need at least two observations");

    const auto estimate = [&](Mode k) {
        double phase_sum = 0.0;
        for (std::size_t j = 0; j + 1 < observations.size(); ++j) {
            const Complex num = observations[j + 1].coeff(k);
            const Complex den = observations[j].coeff(k);
            if (std::abs(den) < tolerances().degenerate_coeff ||
                std::abs(num) < tolerances().degenerate_coeff)
                throw DegenerateModeError(
                    "velocity_seed: vanishing coefficient of mode (" +
                    std::to_string(k.k1) + "," + std::to_string(k.k2) + ") at step " +
                    std::to_string(j + (std::abs(den) < tolerances().degenerate_coeff ? 0 : 1)));
            phase_sum += std::arg(num / den);
        }
        const double mean_phase = phase_sum / static_cast<double>(observations.size() - 1);
        return -mean_phase / (2.0 * std::numbers::pi * dt);
    };

    return {estimate({1, 0}), estimate({0, 1})};
}

}  // namespace wavefilter
