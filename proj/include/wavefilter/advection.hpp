#pragma once

#include <cmath>
#include <numbers>

#include "wavefilter/spectral_field.hpp"
#include "wavefilter/velocity.hpp"

namespace wavefilter {

// Forward solution operator e^{-tL} of the advection equation
// dv/dt + c(t).grad v = 0, diagonal in the Fourier basis:
//
//   (e^{-tL} f)(x) = f(x - D(t)),   coeff(k) <- coeff(k) e^{-2 pi i k . D(t)},
//
// with D(t) the path displacement. L is anti-Hermitian (eigenvalues
// 2 pi i k . c are purely imaginary, L phi_0 = 0), so the operator is unitary
// on every H^s and inverts by flipping the phase sign.
class AdvectionOperator {
public:
    explicit AdvectionOperator(VelocityPath path) : path_(std::move(path)) {}

    const VelocityPath& path() const { return path_; }

    SpectralField propagate(const SpectralField& f, double t) const {
        return apply_phase(f, path_.displacement(t), -1.0);
    }

    SpectralField propagate_inverse(const SpectralField& f, double t) const {
        return apply_phase(f, path_.displacement(t), +1.0);
    }

    // Phase multipliers e^{sign 2 pi i k . D} mirrored over conjugate pairs,
    // with the k.D product reduced mod 1 before the trig call so large times
    // do not degrade the phase.
    static SpectralField apply_phase(const SpectralField& f, Vec2 displacement,
                                     double sign) {
        SpectralField out(f.lattice());
        const int m = f.lattice().max_mode();
        for (int k1 = 0; k1 <= m; ++k1) {
            for (int k2 = -m; k2 <= m; ++k2) {
                const Mode k{k1, k2};
                if (!WavenumberLattice::is_representative(k)) continue;
                const double turns = std::fmod(dot(k, displacement), 1.0);
                const double ang = sign * 2.0 * std::numbers::pi * turns;
                out.set_pair(k, f.coeff(k) * Complex{std::cos(ang), std::sin(ang)});
            }
        }
        return out;
    }

private:
    VelocityPath path_;
};

// Scalar phase e^{sign 2 pi i k . D} for per-mode hot loops.
inline Complex mode_phase(Mode k, Vec2 displacement, double sign) {
    const double turns = std::fmod(dot(k, displacement), 1.0);
    const double ang = sign * 2.0 * std::numbers::pi * turns;
    return Complex{std::cos(ang), std::sin(ang)};
}

}  // namespace wavefilter
