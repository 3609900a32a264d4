#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavefilter/kalman.hpp"
#include "wavefilter/rng.hpp"
#include "wavefilter/truthgen.hpp"

namespace wavefilter {

// ---------------------------------------------------------------------------
// Limit targets: the theorem-specific object M the smoother mean converges to.
//   Truth          M = u              (no model error)
//   Projection     M = F_(p,q) u      (rational dt*delta_c)
//   Average        M = <u> phi_0      (irrational dt*delta_c, Brownian)
//   Shifted        M = u(. + alpha)   (integrable drift)
// ---------------------------------------------------------------------------
struct LimitTarget {
    SpectralField field;
    std::string name;

    static LimitTarget truth(const SpectralField& u) { return {u, "truth"}; }

    static LimitTarget projection(const SpectralField& u, int p, int q) {
        return {partial_fourier_projection(u, p, q),
                "projection(" + std::to_string(p) + "," + std::to_string(q) + ")"};
    }

    static LimitTarget average(const SpectralField& u) {
        return {SpectralField::constant(u.lattice(), spatial_average(u)), "average"};
    }

    static LimitTarget shifted(const SpectralField& u, Vec2 alpha) {
        return {translate(u, alpha), "shifted"};
    }
};

// ---------------------------------------------------------------------------
// Rate fitting: least squares on (log n, log error).
// ---------------------------------------------------------------------------
struct RatePoint {
    int n = 0;
    double error_mean = 0.0;    // RMS over realizations
    double error_stderr = 0.0;  // standard error of the RMS
};

struct RateFit {
    std::vector<RatePoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    int fit_discard = 0;    // leading checkpoints excluded from the fit
    bool degenerate = false;  // some fitted error was exactly zero; no slope
};

// Plain least squares of y against x; r2 clamped to [0, 1].
inline void least_squares(const std::vector<double>& x, const std::vector<double>& y,
                          double& slope, double& intercept, double& r2) {
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("least_squares: need at least two points");
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    slope = sxy / sxx;
    intercept = my - slope * mx;
    r2 = syy > 0.0 ? std::min(1.0, std::max(0.0, sxy * sxy / (sxx * syy))) : 1.0;
}

inline RateFit fit_loglog(const std::vector<RatePoint>& points, int discard) {
    RateFit fit;
    fit.points = points;
    fit.fit_discard = discard;
    std::vector<double> x, y;
    for (std::size_t i = static_cast<std::size_t>(discard); i < points.size(); ++i) {
        if (points[i].error_mean <= 0.0) {
            // Exact-data runs legitimately reach error 0; no rate to fit.
            fit.degenerate = true;
            return fit;
        }
        x.push_back(std::log(static_cast<double>(points[i].n)));
        y.push_back(std::log(points[i].error_mean));
    }
    if (x.size() < 2) {
        fit.degenerate = true;  // value-only curve, no rate to fit
        return fit;
    }
    least_squares(x, y, fit.slope, fit.intercept, fit.r2);
    return fit;
}

// ---------------------------------------------------------------------------
// Error curves. One streaming pass per realization evaluates the closed-form
// smoother mean at every checkpoint; L^2(Omega') statements are approximated
// by the RMS over `num_seeds` independent noise/path realizations.
// ---------------------------------------------------------------------------
struct CurveConfig {
    std::vector<int> checkpoints;  // increasing observation counts
    int num_seeds = 10;
    std::uint64_t base_seed = 1;
    double s = 0.0;  // Sobolev exponent of the error norm
    int fit_discard = 2;

    static std::vector<int> geometric(int first, int last) {
        std::vector<int> cps;
        for (int n = first; n <= last; n *= 2) cps.push_back(n);
        return cps;
    }
};

struct ErrorCurves {
    RateFit smoother;  // vs the limit target (when requested)
    RateFit filter;    // vs the truth trajectory v'_n
};

namespace detail {

struct CurveAccum {
    std::vector<double> smoother_err_sq;  // per checkpoint
    std::vector<double> filter_err_sq;
};

// One realization: stream observations, accumulate the closed-form sum, and
// record squared H^s errors at the checkpoints.
inline CurveAccum run_one_realization(const ScenarioConfig& cfg,
                                      const SpectralField& m0,
                                      const CovarianceSpec& prior,
                                      const CovarianceSpec& gamma,
                                      const std::optional<LimitTarget>& target, double s,
                                      const std::vector<int>& checkpoints) {
    const auto& lat = m0.lattice();
    const std::size_t n_modes = lat.size();

    std::vector<double> weight(n_modes, 1.0);
    std::vector<double> ratio(n_modes, 0.0);  // gamma_k / lambda_k
    std::vector<char> pinned(n_modes, 0);
    for (std::size_t i = 0; i < n_modes; ++i) {
        const Mode k = lat.mode(i);
        if (s != 0.0 && !(k.k1 == 0 && k.k2 == 0))
            weight[i] = std::pow(static_cast<double>(abs_sq(k)), s);
        const double lambda = prior.eigenvalue(k);
        if (lambda == 0.0)
            pinned[i] = 1;
        else
            ratio[i] = gamma.eigenvalue(k) / lambda;
    }

    ObservationStream stream(cfg);
    std::vector<Complex> truth(n_modes);
    std::vector<Complex> obs(n_modes);
    std::vector<Complex> acc(n_modes, Complex{0.0, 0.0});

    CurveAccum out;
    out.smoother_err_sq.reserve(checkpoints.size());
    out.filter_err_sq.reserve(checkpoints.size());

    std::size_t next_cp = 0;
    for (int l = 1; l <= cfg.n_obs; ++l) {
        stream.next(truth, obs);
        const double t = l * cfg.dt;
        const Vec2 d_model = stream.model_path().displacement(t);
        for (std::size_t i = 0; i < n_modes; ++i)
            acc[i] += mode_phase(lat.mode(i), d_model, +1.0) * obs[i];

        if (next_cp < checkpoints.size() && l == checkpoints[next_cp]) {
            double sm_err = 0.0;
            double fl_err = 0.0;
            const double n = static_cast<double>(l);
            for (std::size_t i = 0; i < n_modes; ++i) {
                const Complex m_n = pinned[i]
                                        ? m0.coeff(i)
                                        : (ratio[i] * m0.coeff(i) + acc[i]) / (n + ratio[i]);
                if (target)
                    sm_err += weight[i] * std::norm(m_n - target->field.coeff(i));
                const Complex f_n = mode_phase(lat.mode(i), d_model, -1.0) * m_n;
                fl_err += weight[i] * std::norm(f_n - truth[i]);
            }
            out.smoother_err_sq.push_back(sm_err);
            out.filter_err_sq.push_back(fl_err);
            ++next_cp;
        }
    }
    return out;
}

inline RateFit aggregate(const std::vector<CurveAccum>& runs, bool use_filter,
                         const std::vector<int>& checkpoints, int discard) {
    std::vector<RatePoint> points(checkpoints.size());
    const double r = static_cast<double>(runs.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        double mean_sq = 0.0;
        for (const auto& run : runs)
            mean_sq += use_filter ? run.filter_err_sq[c] : run.smoother_err_sq[c];
        mean_sq /= r;
        double var_sq = 0.0;
        for (const auto& run : runs) {
            const double e = use_filter ? run.filter_err_sq[c] : run.smoother_err_sq[c];
            var_sq += (e - mean_sq) * (e - mean_sq);
        }
        var_sq = runs.size() > 1 ? var_sq / (r - 1.0) : 0.0;
        const double rms = std::sqrt(mean_sq);
        points[c].n = checkpoints[c];
        points[c].error_mean = rms;
        // delta method: se(sqrt(m)) = se(m) / (2 sqrt(m))
        points[c].error_stderr = rms > 0.0 ? std::sqrt(var_sq / r) / (2.0 * rms) : 0.0;
    }
    return fit_loglog(points, discard);
}

}  // namespace detail

// Runs both error curves over num_seeds realizations (noise and, for the
// Brownian scenario, path seeds both re-drawn per realization). Realizations
// run in parallel; the aggregation is a deterministic fold in seed order.
inline ErrorCurves run_error_curves(const ScenarioConfig& base, const SpectralField& m0,
                                    const CovarianceSpec& prior, const CovarianceSpec& gamma,
                                    const std::optional<LimitTarget>& target,
                                    const CurveConfig& curve) {
    if (curve.checkpoints.empty())
        throw std::invalid_argument("run_error_curves: no checkpoints");
    for (std::size_t i = 1; i < curve.checkpoints.size(); ++i)
        if (curve.checkpoints[i] <= curve.checkpoints[i - 1])
            throw std::invalid_argument("run_error_curves: checkpoints must increase");

    ScenarioConfig cfg = base;
    cfg.n_obs = curve.checkpoints.back();

    std::vector<std::future<detail::CurveAccum>> jobs;
    jobs.reserve(static_cast<std::size_t>(curve.num_seeds));
    for (int r = 0; r < curve.num_seeds; ++r) {
        ScenarioConfig run_cfg = cfg;
        run_cfg.noise_seed = mix_seed(curve.base_seed, static_cast<std::uint64_t>(r));
        run_cfg.path_seed = mix_seed(curve.base_seed, 1000 + static_cast<std::uint64_t>(r));
        jobs.push_back(std::async(std::launch::async, [run_cfg, &m0, &prior, &gamma,
                                                       &target, &curve]() {
            return detail::run_one_realization(run_cfg, m0, prior, gamma, target, curve.s,
                                               curve.checkpoints);
        }));
    }
    std::vector<detail::CurveAccum> runs;
    runs.reserve(jobs.size());
    for (auto& j : jobs) runs.push_back(j.get());

    ErrorCurves out;
    if (target)
        out.smoother = detail::aggregate(runs, false, curve.checkpoints, curve.fit_discard);
    out.filter = detail::aggregate(runs, true, curve.checkpoints, curve.fit_discard);
    return out;
}

inline RateFit smoother_error_curve(const ScenarioConfig& cfg, const SpectralField& m0,
                                    const CovarianceSpec& prior, const CovarianceSpec& gamma,
                                    const LimitTarget& target, const CurveConfig& curve) {
    return run_error_curves(cfg, m0, prior, gamma, target, curve).smoother;
}

inline RateFit filter_error_curve(const ScenarioConfig& cfg, const SpectralField& m0,
                                  const CovarianceSpec& prior, const CovarianceSpec& gamma,
                                  const CurveConfig& curve) {
    return run_error_curves(cfg, m0, prior, gamma, std::nullopt, curve).filter;
}

// ---------------------------------------------------------------------------
// Appendix-B oracles.
// ---------------------------------------------------------------------------

// Geometric phase sum S = sum_{l=0}^{n-1} e^{2 pi i x (l+1)}, x = (k.delta_c) dt,
// whose squared modulus has the closed form [sin(n pi x) / sin(pi x)]^2 away
// from resonance. At resonance (x integer) every term is e^{2 pi i x} and the
// modulus is n.
struct GeometricSumResult {
    Complex direct_sum;
    double modulus_sq = 0.0;
    double closed_form_modulus_sq = 0.0;
    bool resonant = false;
};

inline GeometricSumResult geometric_sum_oracle(Mode k, Vec2 delta_c, double dt, int n) {
    if (n < 1) throw std::invalid_argument("geometric_sum_oracle: n must be >= 1");
    const double x = dot(k, delta_c) * dt;
    GeometricSumResult res;
    res.resonant = std::abs(x - std::round(x)) < 1e-12;

    Complex sum{0.0, 0.0};
    for (int l = 0; l < n; ++l) {
        const double turns = std::fmod(x * (l + 1), 1.0);
        const double ang = 2.0 * std::numbers::pi * turns;
        sum += Complex{std::cos(ang), std::sin(ang)};
    }
    res.direct_sum = sum;
    res.modulus_sq = std::norm(sum);

    if (res.resonant) {
        res.closed_form_modulus_sq = static_cast<double>(n) * n;
    } else {
        const double ratio =
            std::sin(n * std::numbers::pi * x) / std::sin(std::numbers::pi * x);
        res.closed_form_modulus_sq = ratio * ratio;
    }
    return res;
}

// Second moment of the Brownian phase sum,
//   E | sum_{l=0}^{n-1} e^{2 pi i k . eps W(t_{l+1})} |^2
//     = sum_{l,l'} rho^{|l-l'|} = n + 2/(a-1) [ (a^{-(n-1)} - 1)/(a - 1) + n - 1 ],
// with a = e^{2 pi^2 eps^2 |k|^2 dt} = 1/rho, together with the linear bound
// (a1 + 1)/(a1 - 1) * n at a1 = e^{2 pi^2 eps^2 dt} (worst retained mode).
struct BrownianMomentResult {
    double mc_estimate = 0.0;
    double mc_std_error = 0.0;
    double closed_form = 0.0;
    double linear_bound = 0.0;
};

inline double brownian_moment_closed_form(Mode k, double epsilon, double dt, int n) {
    const double a =
        std::exp(2.0 * std::numbers::pi * std::numbers::pi * epsilon * epsilon * abs_sq(k) * dt);
    const double am1 = a - 1.0;
    return n + (2.0 / am1) * ((std::pow(a, -(n - 1)) - 1.0) / am1 + (n - 1.0));
}

inline BrownianMomentResult brownian_moment_oracle(Mode k, double epsilon, double dt, int n,
                                                   int num_realizations,
                                                   std::uint64_t seed = 1) {
    if (epsilon <= 0.0) throw std::invalid_argument("brownian_moment_oracle: epsilon must be > 0");
    if (n < 1 || num_realizations < 2)
        throw std::invalid_argument("brownian_moment_oracle: need n >= 1, realizations >= 2");

    BrownianMomentResult res;
    res.closed_form = brownian_moment_closed_form(k, epsilon, dt, n);
    const double a1 =
        std::exp(2.0 * std::numbers::pi * std::numbers::pi * epsilon * epsilon * dt);
    res.linear_bound = (a1 + 1.0) / (a1 - 1.0) * n;

    // k . W(t) is a scalar Brownian motion with variance |k|^2 t; sample it
    // directly.
    Rng rng(seed);
    const double step_sd = std::sqrt(static_cast<double>(abs_sq(k)) * dt);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int r = 0; r < num_realizations; ++r) {
        double w = 0.0;
        Complex phase_sum{0.0, 0.0};
        for (int l = 0; l < n; ++l) {
            w += step_sd * rng.normal();
            const double ang =
                2.0 * std::numbers::pi * std::fmod(epsilon * w, 1.0);
            phase_sum += Complex{std::cos(ang), std::sin(ang)};
        }
        const double v = std::norm(phase_sum);
        sum += v;
        sum_sq += v * v;
    }
    const double m = static_cast<double>(num_realizations);
    res.mc_estimate = sum / m;
    const double var = (sum_sq - m * res.mc_estimate * res.mc_estimate) / (m - 1.0);
    res.mc_std_error = std::sqrt(var / m);
    return res;
}

}  // namespace wavefilter
