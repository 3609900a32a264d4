#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "wavefilter/covariance.hpp"
#include "wavefilter/rng.hpp"
#include "wavefilter/spectral_field.hpp"

namespace wavefilter {

// Per-mode variance used when drawing a realization of the covariance.
//
// LaplacianPower samples with Var coeff(k) = eigenvalue(k), the literal
// Karhunen-Loeve expansion sum_k sqrt(lambda_k) g_k phi_k with g_{-k} = conj(g_k).
//
// GridWhite samples with Var coeff(k) = sigma2 / M (M = retained mode count),
// which makes the drawn field white with variance exactly sigma2 at every
// grid node for any lattice/grid pairing (|phi_k(x)| = 1, modes independent).
// As a covariance model inside the filter the per-mode weight stays
// eigenvalue(k) = sigma2; see CovarianceSpec.
inline double sampling_variance(const CovarianceSpec& spec, Mode k,
                                const WavenumberLattice& lattice) {
    if (spec.is_grid_white())
        return spec.grid_white().sigma2 / static_cast<double>(lattice.size());
    return spec.eigenvalue(k);
}

// Karhunen-Loeve sampler for N(mean, spec). For k != 0 the representative
// coefficient gets independent real/imaginary normals of variance v_k/2 and
// the conjugate pair is mirrored, so draws are Hermitian exactly (bitwise
// conjugate pairs) and coeff(k) has marginal variance v_k. g_0 is a real unit
// normal. Samplers own their generator: not shareable while sampling; clone
// with derived seeds to parallelize.
class GaussianSampler {
public:
    GaussianSampler(CovarianceSpec spec, SpectralField mean, std::uint64_t seed)
        : spec_(std::move(spec)), mean_(std::move(mean)), rng_(seed) {}

    const CovarianceSpec& spec() const { return spec_; }
    const SpectralField& mean() const { return mean_; }

    SpectralField sample() {
        SpectralField draw = mean_;
        add_noise(draw.raw());
        return draw;
    }

    // Adds one centered draw to `coeffs` (lattice order of mean's lattice).
    // Shared by sample() and the streaming observation generator.
    void add_noise(std::vector<Complex>& coeffs) { add_noise_scaled(coeffs, 1.0); }

    // Adds scale * xi with xi ~ N(0, spec); the pCN proposal uses scale = beta.
    void add_noise_scaled(std::vector<Complex>& coeffs, double scale) {
        const auto& lat = mean_.lattice();
        const int m = lat.max_mode();
        {
            const double v0 = sampling_variance(spec_, {0, 0}, lat);
            if (v0 > 0.0) coeffs[lat.index({0, 0})] += scale * std::sqrt(v0) * rng_.normal();
        }
        for (int k1 = 0; k1 <= m; ++k1) {
            for (int k2 = -m; k2 <= m; ++k2) {
                const Mode k{k1, k2};
                if ((k1 == 0 && k2 == 0) || !WavenumberLattice::is_representative(k))
                    continue;
                const double v = sampling_variance(spec_, k, lat);
                if (v <= 0.0) continue;
                const double half_sd = scale * std::sqrt(0.5 * v);
                const Complex z{half_sd * rng_.normal(), half_sd * rng_.normal()};
                coeffs[lat.index(k)] += z;
                coeffs[lat.index(-k)] += std::conj(z);
            }
        }
    }

    GaussianSampler derived(std::uint64_t stream) const {
        return GaussianSampler(spec_, mean_, mix_seed(rng_.seed(), stream));
    }

private:
    CovarianceSpec spec_;
    SpectralField mean_;
    Rng rng_;
};

}  // namespace wavefilter
