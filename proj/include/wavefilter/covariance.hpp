#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "wavefilter/lattice.hpp"

namespace wavefilter {

// Diagonal covariance operators on the torus, specified per mode.
//
//   LaplacianPower   eigenvalue(k) = scale (4 pi^2 |k|^2 + shift)^{-exponent},
//                    the C0 ~ (-Laplacian + k_A I)^{-A} family. shift = 0 is
//                    the "constants removed" prior N(0, (-Laplacian)^{-2}) of
//                    the sampling experiments: eigenvalue(0) = 0 and the
//                    constant mode is pinned, a documented rank-deficient
//                    special case.
//   GridWhite        eigenvalue(k) = sigma2 for every retained mode: noise
//                    that is white with variance sigma2 at each grid point,
//                    under the grid-mean misfit convention. Its continuum
//                    limit is not trace class; it is supported for the
//                    numerics regime only.

struct LaplacianPower {
    double scale = 1.0;
    double exponent = 2.0;
    double shift = 0.0;
};

struct GridWhite {
    double sigma2 = 1e-4;
};

class CovarianceSpec {
public:
    CovarianceSpec(LaplacianPower k) : kind_(k) {
        if (k.scale < 0.0) throw std::invalid_argument("LaplacianPower: scale must be >= 0");
        if (k.shift < 0.0) throw std::invalid_argument("LaplacianPower: shift must be >= 0");
    }

    CovarianceSpec(GridWhite k) : kind_(k) {
        if (k.sigma2 < 0.0) throw std::invalid_argument("GridWhite: sigma2 must be >= 0");
    }

    double eigenvalue(Mode k) const {
        if (auto* g = std::get_if<GridWhite>(&kind_)) return g->sigma2;
        const auto& lp = std::get<LaplacianPower>(kind_);
        const double base = 4.0 * std::numbers::pi * std::numbers::pi * abs_sq(k) + lp.shift;
        if (base == 0.0) return 0.0;  // pinned constant mode (shift = 0)
        return lp.scale * std::pow(base, -lp.exponent);
    }

    bool is_grid_white() const { return std::holds_alternative<GridWhite>(kind_); }
    bool is_laplacian_power() const { return std::holds_alternative<LaplacianPower>(kind_); }

    const GridWhite& grid_white() const { return std::get<GridWhite>(kind_); }
    const LaplacianPower& laplacian_power() const { return std::get<LaplacianPower>(kind_); }

    // True when eigenvalue(0) = 0 and samples/means must pin the constant mode.
    bool pins_constant_mode() const {
        if (is_grid_white()) return false;
        const auto& lp = laplacian_power();
        return lp.shift == 0.0 && lp.exponent > 0.0;
    }

    std::string describe() const {
        if (auto* g = std::get_if<GridWhite>(&kind_))
            return "grid_white(sigma2=" + std::to_string(g->sigma2) + ")";
        const auto& lp = std::get<LaplacianPower>(kind_);
        return "laplacian_power(scale=" + std::to_string(lp.scale) +
               ", exponent=" + std::to_string(lp.exponent) +
               ", shift=" + std::to_string(lp.shift) + ")";
    }

private:
    std::variant<LaplacianPower, GridWhite> kind_;
};

// Trace over the truncated lattice: sum_k eigenvalue(k).
inline double trace(const CovarianceSpec& spec, const WavenumberLattice& lattice) {
    double acc = 0.0;
    for (std::size_t i = 0; i < lattice.size(); ++i) acc += spec.eigenvalue(lattice.mode(i));
    return acc;
}

// Feldman-Hajek style diagnostic for the pair (prior C0, noise Gamma):
// summability of lambda_k / gamma_k^2 decides equivalence vs singularity of
// the prior and the conditioned measures. On the truncated lattice every sum
// is finite, so the report carries the partial sums (by |k|_inf shells) plus
// the analytic continuum verdicts available for LaplacianPower pairs, where
// the condition reduces to 2B <= A - 1. The second verdict is the
// noise-regularity condition sum |k|^{2s} gamma_k < infinity, which for
// gamma_k ~ |k|^{-2B} in two dimensions is 2B - 2s > 2.
struct EquivalenceReport {
    std::vector<double> partial_sums;  // cumulative sum of lambda/gamma^2, shells 0..max_mode
    double lambda_over_gamma_sq = 0.0;

    bool analytic_applicable = false;  // both specs LaplacianPower
    bool equivalent = false;           // 2B <= A - 1 when applicable
    std::string verdict;

    bool noise_regular_applicable = false;
    bool noise_regular = false;  // 2B - 2s > 2 when applicable
    double s = 0.0;
};

inline EquivalenceReport equivalence_diagnostic(const CovarianceSpec& prior,
                                                const CovarianceSpec& noise, double s,
                                                const WavenumberLattice& lattice) {
    EquivalenceReport rep;
    rep.s = s;

    const int m = lattice.max_mode();
    rep.partial_sums.assign(static_cast<std::size_t>(m) + 1, 0.0);
    double acc = 0.0;
    for (int shell = 0; shell <= m; ++shell) {
        for (int k1 = -shell; k1 <= shell; ++k1) {
            for (int k2 = -shell; k2 <= shell; ++k2) {
                if (std::max(std::abs(k1), std::abs(k2)) != shell) continue;
                const Mode k{k1, k2};
                const double g = noise.eigenvalue(k);
                if (g > 0.0) acc += prior.eigenvalue(k) / (g * g);
            }
        }
        rep.partial_sums[static_cast<std::size_t>(shell)] = acc;
    }
    rep.lambda_over_gamma_sq = acc;

    if (prior.is_laplacian_power() && noise.is_laplacian_power()) {
        const double a = prior.laplacian_power().exponent;
        const double b = noise.laplacian_power().exponent;
        rep.analytic_applicable = true;
        rep.equivalent = (2.0 * b <= a - 1.0);
        rep.verdict = rep.equivalent
                          ? "equivalent (2B <= A-1 holds: 2*" + std::to_string(b) +
                                " <= " + std::to_string(a) + "-1)"
                          : "singular (2B <= A-1 fails: 2*" + std::to_string(b) + " > " +
                                std::to_string(a) + "-1)";
        rep.noise_regular_applicable = true;
        rep.noise_regular = (2.0 * b - 2.0 * s > 2.0);
    } else {
        rep.verdict =
            "not applicable (non-trace-class continuum limit); truncated-lattice sums finite";
    }
    return rep;
}

}  // namespace wavefilter
