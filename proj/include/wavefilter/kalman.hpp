#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wavefilter/advection.hpp"
#include "wavefilter/covariance.hpp"
#include "wavefilter/spectral_field.hpp"

namespace wavefilter {

// Exact Kalman filter/smoother for the advection model with commuting diagonal
// covariances. Everything reduces to independent scalar updates per Fourier
// mode k:
//
//   prediction   a_k = e^{-2 pi i k . D(t_{n+1})} m_n(k)     (filter frame)
//   gain         g_k = v_k / (gamma_k + v_k)
//   analysis     f_k = a_k - g_k (a_k - y_k),  v_k <- v_k - g_k v_k
//   smoother     m_{n+1}(k) = e^{+2 pi i k . D(t_{n+1})} f_k
//
// with closed forms (the telescoped recursion)
//
//   v_n(k) = (n / gamma_k + 1 / lambda_k)^{-1}
//   m_n(k) = [ (gamma_k/lambda_k) m_0(k) + sum_l e^{+2 pi i k . D(t_{l+1})} y_{l+1}(k) ]
//            / (n + gamma_k/lambda_k).
//
// The filter mean is never stored: m^n = e^{-t_n L} m_n by construction.
// Modes with lambda_k = 0 (pinned constant mode of the rank-deficient prior)
// carry v = 0 and keep their prior-mean coefficient; the gain formula already
// fixes them, matching their exclusion from the estimation.
struct AssimilationState {
    SpectralField smoother_mean;    // m_n
    std::vector<double> variance;   // diagonal of C_n = C^n, lattice order
    AdvectionOperator model_op;
    double dt = 0.1;
    int n = 0;

    double time() const { return n * dt; }
};

inline AssimilationState make_initial_state(const SpectralField& m0,
                                            const CovarianceSpec& prior,
                                            const AdvectionOperator& model_op, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("make_initial_state: dt must be > 0");
    AssimilationState s{m0, std::vector<double>(m0.size()), model_op, dt, 0};
    for (std::size_t i = 0; i < m0.size(); ++i)
        s.variance[i] = prior.eigenvalue(m0.lattice().mode(i));
    return s;
}

inline AssimilationState assimilate_step(const AssimilationState& state,
                                         const SpectralField& y,
                                         const CovarianceSpec& gamma) {
    state.smoother_mean.require_same_lattice(y);
    AssimilationState next = state;
    next.n = state.n + 1;

    const auto& lat = state.smoother_mean.lattice();
    const Vec2 d = state.model_op.path().displacement(next.n * state.dt);
    for (std::size_t i = 0; i < next.smoother_mean.size(); ++i) {
        const Mode k = lat.mode(i);
        const double g_noise = gamma.eigenvalue(k);
        double& v = next.variance[i];

        const Complex forward = mode_phase(k, d, -1.0);
        const Complex a = forward * state.smoother_mean.coeff(i);
        const double gain = v / (g_noise + v);
        const Complex f = a - gain * (a - y.coeff(i));
        next.smoother_mean.raw()[i] = std::conj(forward) * f;
        v -= gain * v;
    }
    return next;
}

// Closed form Eq.-(9a)-style evaluation on explicit (time, observation)
// pairs. The sum is symmetric in the pairs, so permuting them leaves the
// result unchanged.
inline AssimilationState smoother_closed_form(
    const SpectralField& m0, const CovarianceSpec& prior, const CovarianceSpec& gamma,
    const AdvectionOperator& model_op,
    const std::vector<std::pair<double, SpectralField>>& timed_observations, double dt) {
    if (timed_observations.empty())
        throw std::invalid_argument("smoother_closed_form: empty observation sequence");

    const auto& lat = m0.lattice();
    const std::size_t n_modes = m0.size();
    std::vector<Complex> acc(n_modes, Complex{0.0, 0.0});
    for (const auto& [t, y] : timed_observations) {
        m0.require_same_lattice(y);
        const Vec2 d = model_op.path().displacement(t);
        for (std::size_t i = 0; i < n_modes; ++i)
            acc[i] += mode_phase(lat.mode(i), d, +1.0) * y.coeff(i);
    }

    const double n = static_cast<double>(timed_observations.size());
    AssimilationState out{SpectralField(lat), std::vector<double>(n_modes), model_op, dt,
                          static_cast<int>(timed_observations.size())};
    for (std::size_t i = 0; i < n_modes; ++i) {
        const Mode k = lat.mode(i);
        const double lambda = prior.eigenvalue(k);
        const double g_noise = gamma.eigenvalue(k);
        if (lambda == 0.0) {
            out.smoother_mean.raw()[i] = m0.coeff(i);
            out.variance[i] = 0.0;
            continue;
        }
        const double ratio = g_noise / lambda;
        out.smoother_mean.raw()[i] = (ratio * m0.coeff(i) + acc[i]) / (n + ratio);
        out.variance[i] = 1.0 / (n / g_noise + 1.0 / lambda);
    }
    return out;
}

inline AssimilationState smoother_closed_form(const SpectralField& m0,
                                              const CovarianceSpec& prior,
                                              const CovarianceSpec& gamma,
                                              const AdvectionOperator& model_op,
                                              const std::vector<SpectralField>& observations,
                                              double dt) {
    std::vector<std::pair<double, SpectralField>> timed;
    timed.reserve(observations.size());
    for (std::size_t l = 0; l < observations.size(); ++l)
        timed.emplace_back((static_cast<double>(l) + 1.0) * dt, observations[l]);
    return smoother_closed_form(m0, prior, gamma, model_op, timed, dt);
}

// m^n = e^{-t_n L} m_n. Unitary image: same H^s norms, same variance spectrum.
inline SpectralField filter_mean(const AssimilationState& state) {
    return state.model_op.propagate(state.smoother_mean, state.time());
}

inline double trace_of_covariance(const AssimilationState& state) {
    double acc = 0.0;
    for (double v : state.variance) acc += v;
    return acc;
}

// Cumulative data misfit for grid-white observation noise,
//
//   Phi(v) = 1/(2 sigma^2) sum_{l=1}^{n} || y_l - e^{-t_l L} v ||^2,
//
// with the grid-mean L^2 norm, which by Parseval is the plain coefficient sum
// over the lattice. This is the literal definition; MisfitAccumulator below
// is the algebraically identical O(#modes) form used inside MCMC loops.
inline double posterior_misfit(const SpectralField& v, const VelocityPath& model,
                               const std::vector<SpectralField>& observations, double dt,
                               double sigma2) {
    if (sigma2 <= 0.0) throw std::invalid_argument("posterior_misfit: sigma2 must be > 0");
    const AdvectionOperator op(model);
    double acc = 0.0;
    for (std::size_t l = 0; l < observations.size(); ++l) {
        const double t = (static_cast<double>(l) + 1.0) * dt;
        const SpectralField predicted = op.propagate(v, t);
        acc += sobolev_norm_sq(observations[l] - predicted, 0.0);
    }
    return acc / (2.0 * sigma2);
}

class MisfitAccumulator {
public:
    MisfitAccumulator(const WavenumberLattice& lattice, const VelocityPath& model,
                      const std::vector<SpectralField>& observations, double dt,
                      double sigma2)
        : lattice_(lattice),
          sigma2_(sigma2),
          n_(static_cast<double>(observations.size())),
          back_phased_sum_(lattice.size(), Complex{0.0, 0.0}) {
        if (sigma2 <= 0.0)
            throw std::invalid_argument("MisfitAccumulator: sigma2 must be > 0");
        for (std::size_t l = 0; l < observations.size(); ++l) {
            const double t = (static_cast<double>(l) + 1.0) * dt;
            const Vec2 d = model.displacement(t);
            for (std::size_t i = 0; i < lattice.size(); ++i) {
                const Complex y = observations[l].coeff(i);
                data_norm_sq_ += std::norm(y);
                back_phased_sum_[i] += mode_phase(lattice.mode(i), d, +1.0) * y;
            }
        }
    }

    //   Phi(v) = [ sum|y|^2 - 2 Re <v, A> + n ||v||^2 ] / (2 sigma^2),
    //   A_k = sum_l e^{+2 pi i k . D(t_l)} y_l(k).
    double phi(const std::vector<Complex>& v) const {
        double cross = 0.0;
        double vv = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            cross += (v[i] * std::conj(back_phased_sum_[i])).real();
            vv += std::norm(v[i]);
        }
        return (data_norm_sq_ - 2.0 * cross + n_ * vv) / (2.0 * sigma2_);
    }

    double phi(const SpectralField& v) const { return phi(v.coeffs()); }

    const std::vector<Complex>& back_phased_sum() const { return back_phased_sum_; }
    double data_norm_sq() const { return data_norm_sq_; }
    double count() const { return n_; }

private:
    WavenumberLattice lattice_;
    double sigma2_;
    double n_;
    double data_norm_sq_ = 0.0;
    std::vector<Complex> back_phased_sum_;
};

// Phi(v_a) - Phi(v_b); the log density ratio the MCMC acceptance uses.
// Only the grid-white noise regime is supported on this path.
inline double posterior_log_density_ratio(const SpectralField& v_a, const SpectralField& v_b,
                                          Vec2 c,
                                          const std::vector<SpectralField>& observations,
                                          const CovarianceSpec& gamma, double dt) {
    if (!gamma.is_grid_white())
        throw std::invalid_argument(
            "posterior_log_density_ratio: only GridWhite noise is supported");
    const VelocityPath model = VelocityPath::constant(c);
    const double sigma2 = gamma.grid_white().sigma2;
    if (observations.empty()) return 0.0;
    return posterior_misfit(v_a, model, observations, dt, sigma2) -
           posterior_misfit(v_b, model, observations, dt, sigma2);
}

}  // namespace wavefilter
