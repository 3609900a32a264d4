#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wavefilter/lattice.hpp"
#include "wavefilter/tolerances.hpp"
#include "wavefilter/vec2.hpp"

namespace wavefilter {

using Complex = std::complex<double>;

// Truncated Fourier representation of a real periodic field on the unit
// 2-torus,
//
//   f(x) = sum_k coeff(k) * phi_k(x),   phi_k(x) = exp(2 pi i k . x),
//
// with Hermitian symmetry coeff(-k) = conj(coeff(k)) so that f is real-valued.
// Values are immutable in spirit: operations are pure and return new fields,
// and all mutating entry points preserve the symmetry by construction.
class SpectralField {
public:
    explicit SpectralField(const WavenumberLattice& lattice)
        : lattice_(lattice), coeff_(lattice.size(), Complex{0.0, 0.0}) {}

    static SpectralField zero(const WavenumberLattice& lattice) {
        return SpectralField(lattice);
    }

    static SpectralField constant(const WavenumberLattice& lattice, double value) {
        SpectralField f(lattice);
        f.coeff_[lattice.index({0, 0})] = value;
        return f;
    }

    const WavenumberLattice& lattice() const { return lattice_; }
    std::size_t size() const { return coeff_.size(); }

    Complex coeff(Mode k) const { return coeff_[lattice_.index(k)]; }
    Complex coeff(std::size_t idx) const { return coeff_[idx]; }
    const std::vector<Complex>& coeffs() const { return coeff_; }

    // Sets coeff(k) = v and coeff(-k) = conj(v). For k = 0 the imaginary part
    // is discarded (the constant mode of a real field is real).
    void set_pair(Mode k, Complex v) {
        if (k.k1 == 0 && k.k2 == 0) {
            coeff_[lattice_.index(k)] = Complex{v.real(), 0.0};
            return;
        }
        coeff_[lattice_.index(k)] = v;
        coeff_[lattice_.index(-k)] = std::conj(v);
    }

    double max_hermitian_defect() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < coeff_.size(); ++i) {
            const std::size_t j = lattice_.conjugate_index(i);
            worst = std::max(worst, std::abs(coeff_[i] - std::conj(coeff_[j])));
        }
        return worst;
    }

    bool is_hermitian(double tol = tolerances().hermitian) const {
        return max_hermitian_defect() <= tol;
    }

    SpectralField& operator+=(const SpectralField& other) {
        require_same_lattice(other);
        for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += other.coeff_[i];
        return *this;
    }

    SpectralField& operator-=(const SpectralField& other) {
        require_same_lattice(other);
        for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= other.coeff_[i];
        return *this;
    }

    SpectralField& operator*=(double s) {
        for (auto& c : coeff_) c *= s;
        return *this;
    }

    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(double s, SpectralField f) { return f *= s; }

    void require_same_lattice(const SpectralField& other) const {
        if (!(lattice_ == other.lattice_))
            throw std::invalid_argument("SpectralField: lattice mismatch");
    }

    // Raw storage access for builders that fill representative/conjugate pairs
    // themselves (samplers, transforms). Callers own the symmetry invariant.
    std::vector<Complex>& raw() { return coeff_; }

private:
    WavenumberLattice lattice_;
    std::vector<Complex> coeff_;
};

// ||f||_{H^s}^2 = |coeff(0)|^2 + sum_{k != 0} |k|^{2s} |coeff(k)|^2.
// The constant mode carries weight one; s = 0 recovers the L^2 norm.
inline double sobolev_norm_sq(const SpectralField& f, double s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Mode k = f.lattice().mode(i);
        const double a2 = std::norm(f.coeff(i));
        if (k.k1 == 0 && k.k2 == 0) {
            acc += a2;
        } else if (s == 0.0) {
            acc += a2;
        } else {
            acc += std::pow(static_cast<double>(abs_sq(k)), s) * a2;
        }
    }
    return acc;
}

inline double sobolev_norm(const SpectralField& f, double s) {
    return std::sqrt(sobolev_norm_sq(f, s));
}

// <f> = coeff(0): the spatial average of f over the torus.
inline double spatial_average(const SpectralField& f) {
    return f.coeff({0, 0}).real();
}

// F_(p,q) f keeps exactly the modes with p | k1 and q | k2 (k = 0 included).
inline SpectralField partial_fourier_projection(const SpectralField& f, int p, int q) {
    if (p <= 0 || q <= 0)
        throw std::invalid_argument("partial_fourier_projection: p, q must be >= 1");
    SpectralField out(f.lattice());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Mode k = f.lattice().mode(i);
        if (k.k1 % p == 0 && k.k2 % q == 0) out.raw()[i] = f.coeff(i);
    }
    return out;
}

namespace detail {

// Exact unit phases e^{2 pi i r / N}, r = 0..N-1. Mode-grid products are
// reduced modulo N in integer arithmetic, so no large-angle trig is involved
// in the grid transforms.
inline std::vector<Complex> phase_table(int n) {
    std::vector<Complex> w(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
        const double ang = 2.0 * std::numbers::pi * r / n;
        w[static_cast<std::size_t>(r)] = Complex{std::cos(ang), std::sin(ang)};
    }
    return w;
}

inline int mod_index(long long value, int n) {
    const long long m = value % n;
    return static_cast<int>(m < 0 ? m + n : m);
}

}  // namespace detail

// Synthesis on the grid x_j = (j1/N, j2/N): f(j1, j2), row-major in j1.
// Separable two-stage evaluation; exact for the truncated representation.
inline std::vector<double> to_grid(const SpectralField& f) {
    const int n = f.lattice().grid_size();
    const int m = f.lattice().max_mode();
    const auto w = detail::phase_table(n);

    // Stage 1: for each k1, sum over k2 at every j2.
    const int side = f.lattice().side();
    std::vector<Complex> stage(static_cast<std::size_t>(side) * n, Complex{0.0, 0.0});
    for (int k1 = -m; k1 <= m; ++k1) {
        for (int k2 = -m; k2 <= m; ++k2) {
            const Complex c = f.coeff({k1, k2});
            if (c == Complex{0.0, 0.0}) continue;
            Complex* row = &stage[static_cast<std::size_t>(k1 + m) * n];
            for (int j2 = 0; j2 < n; ++j2)
                row[j2] += c * w[static_cast<std::size_t>(
                                detail::mod_index(static_cast<long long>(k2) * j2, n))];
        }
    }

    // Stage 2: sum over k1 at every j1.
    std::vector<double> grid(static_cast<std::size_t>(n) * n, 0.0);
    double imag_residue = 0.0;
    for (int j1 = 0; j1 < n; ++j1) {
        for (int j2 = 0; j2 < n; ++j2) {
            Complex v{0.0, 0.0};
            for (int k1 = -m; k1 <= m; ++k1) {
                v += stage[static_cast<std::size_t>(k1 + m) * n + j2] *
                     w[static_cast<std::size_t>(
                         detail::mod_index(static_cast<long long>(k1) * j1, n))];
            }
            imag_residue = std::max(imag_residue, std::abs(v.imag()));
            grid[static_cast<std::size_t>(j1) * n + j2] = v.real();
        }
    }
    if (imag_residue > tolerances().grid_imag)
        throw std::runtime_error("to_grid: field is not real (Hermitian symmetry broken)");
    return grid;
}

// Analysis: coeff(k) = (1/N^2) sum_j f(x_j) e^{-2 pi i k . x_j}, restricted to
// the lattice. Exact inverse of to_grid when grid_size >= 2*max_mode + 1.
inline SpectralField from_grid(const std::vector<double>& values,
                               const WavenumberLattice& lattice) {
    const int n = lattice.grid_size();
    if (values.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("from_grid: expected grid_size^2 values");
    const int m = lattice.max_mode();
    const auto w = detail::phase_table(n);

    // Stage 1: for each j1, sum over j2 against e^{-2 pi i k2 j2 / N}.
    std::vector<Complex> stage(static_cast<std::size_t>(n) * lattice.side(),
                               Complex{0.0, 0.0});
    for (int j1 = 0; j1 < n; ++j1) {
        const double* row = &values[static_cast<std::size_t>(j1) * n];
        for (int k2 = -m; k2 <= m; ++k2) {
            Complex acc{0.0, 0.0};
            for (int j2 = 0; j2 < n; ++j2)
                acc += row[j2] * std::conj(w[static_cast<std::size_t>(detail::mod_index(
                                     static_cast<long long>(k2) * j2, n))]);
            stage[static_cast<std::size_t>(j1) * lattice.side() + (k2 + m)] = acc;
        }
    }

    SpectralField f(lattice);
    for (int k1 = 0; k1 <= m; ++k1) {
        for (int k2 = -m; k2 <= m; ++k2) {
            const Mode k{k1, k2};
            if (!WavenumberLattice::is_representative(k)) continue;
            Complex acc{0.0, 0.0};
            for (int j1 = 0; j1 < n; ++j1)
                acc += stage[static_cast<std::size_t>(j1) * lattice.side() + (k2 + m)] *
                       std::conj(w[static_cast<std::size_t>(detail::mod_index(
                           static_cast<long long>(k1) * j1, n))]);
            f.set_pair(k, acc / static_cast<double>(static_cast<std::size_t>(n) * n));
        }
    }
    return f;
}

// f(. + shift): coeff(k) <- coeff(k) e^{2 pi i k . shift}. Unitary on every
// H^s. The mode-shift product is reduced mod 1 before the trig call.
inline SpectralField translate(const SpectralField& f, Vec2 shift) {
    SpectralField out(f.lattice());
    const int m = f.lattice().max_mode();
    for (int k1 = 0; k1 <= m; ++k1) {
        for (int k2 = -m; k2 <= m; ++k2) {
            const Mode k{k1, k2};
            if (!WavenumberLattice::is_representative(k)) continue;
            const double turns = std::fmod(dot(k, shift), 1.0);
            const double ang = 2.0 * std::numbers::pi * turns;
            out.set_pair(k, f.coeff(k) * Complex{std::cos(ang), std::sin(ang)});
        }
    }
    return out;
}

// Point evaluation f(x) by direct synthesis; O(#modes).
inline double evaluate(const SpectralField& f, Vec2 x) {
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Mode k = f.lattice().mode(i);
        const double ang = 2.0 * std::numbers::pi * std::fmod(dot(k, x), 1.0);
        acc += f.coeff(i) * Complex{std::cos(ang), std::sin(ang)};
    }
    return acc.real();
}

// Parseval on the alias-free grid: sum_k |coeff(k)|^2 == mean_j f(x_j)^2.
inline double grid_mean_square(const std::vector<double>& grid) {
    double acc = 0.0;
    for (double v : grid) acc += v * v;
    return acc / static_cast<double>(grid.size());
}

}  // namespace wavefilter
