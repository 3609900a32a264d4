#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavefilter/asymptotics.hpp"
#include "wavefilter/kalman.hpp"
#include "wavefilter/spectral_field.hpp"
#include "wavefilter/vec2.hpp"

namespace wavefilter {

namespace detail {

// Shortest decimal that round-trips to the same double.
inline std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

}  // namespace detail

// 8-bit binary PGM (P5) with linear min-max scaling. A constant field maps to
// mid-gray.
inline void write_pgm(const std::string& path, const std::vector<double>& grid, int n) {
    if (grid.size() != static_cast<std::size_t>(n) * n)
        throw std::invalid_argument("write_pgm: grid size mismatch");
    auto out = detail::open_out(path);
    out << "P5\n" << n << " " << n << "\n255\n";
    const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
    const double lo = *lo_it, hi = *hi_it;
    const double span = hi - lo;
    std::vector<unsigned char> bytes(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        bytes[i] = span > 0.0
                       ? static_cast<unsigned char>(std::min(
                             255.0, std::max(0.0, 255.0 * (grid[i] - lo) / span + 0.5)))
                       : static_cast<unsigned char>(128);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

inline void write_field_pgm(const std::string& path, const SpectralField& f) {
    write_pgm(path, to_grid(f), f.lattice().grid_size());
}

// Coefficients as rows (k1, k2, re, im).
inline void write_coeff_csv(const std::string& path, const SpectralField& f) {
    auto out = detail::open_out(path);
    out << "k1,k2,re,im\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Mode k = f.lattice().mode(i);
        const Complex c = f.coeff(i);
        out << k.k1 << "," << k.k2 << "," << detail::fmt_double(c.real()) << ","
            << detail::fmt_double(c.imag()) << "\n";
    }
}

// Assimilation-state snapshot: (k1, k2, variance_n, mean_re, mean_im).
inline void write_state_csv(const std::string& path, const AssimilationState& state) {
    auto out = detail::open_out(path);
    out << "k1,k2,variance,mean_re,mean_im\n";
    const auto& f = state.smoother_mean;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Mode k = f.lattice().mode(i);
        const Complex c = f.coeff(i);
        out << k.k1 << "," << k.k2 << "," << detail::fmt_double(state.variance[i]) << ","
            << detail::fmt_double(c.real()) << "," << detail::fmt_double(c.imag()) << "\n";
    }
}

// Error curve: (n, error_mean, error_stderr).
inline void write_curve_csv(const std::string& path, const RateFit& fit) {
    auto out = detail::open_out(path);
    out << "n,error_mean,error_stderr\n";
    for (const auto& p : fit.points)
        out << p.n << "," << detail::fmt_double(p.error_mean) << ","
            << detail::fmt_double(p.error_stderr) << "\n";
}

// Fit summary: one line (slope, intercept, r2).
inline void write_fit_summary(const std::string& path, const RateFit& fit) {
    auto out = detail::open_out(path);
    out << "slope,intercept,r2\n";
    out << detail::fmt_double(fit.slope) << "," << detail::fmt_double(fit.intercept) << ","
        << detail::fmt_double(fit.r2) << "\n";
}

// Observation dump: rows (l, k1, k2, re, im) for a whole sequence.
inline void write_observations_csv(const std::string& path,
                                   const std::vector<SpectralField>& observations) {
    auto out = detail::open_out(path);
    out << "l,k1,k2,re,im\n";
    for (std::size_t l = 0; l < observations.size(); ++l) {
        const auto& f = observations[l];
        for (std::size_t i = 0; i < f.size(); ++i) {
            const Mode k = f.lattice().mode(i);
            const Complex c = f.coeff(i);
            out << (l + 1) << "," << k.k1 << "," << k.k2 << ","
                << detail::fmt_double(c.real()) << "," << detail::fmt_double(c.imag())
                << "\n";
        }
    }
}

// Chain dump: (iter, c1, c2, phi, accepted).
struct ChainRow {
    long iter = 0;
    double c1 = 0.0;
    double c2 = 0.0;
    double phi = 0.0;
    int accepted = 0;
};

inline void write_chain_csv(const std::string& path, const std::vector<ChainRow>& rows) {
    auto out = detail::open_out(path);
    out << "iter,c1,c2,phi,accepted\n";
    for (const auto& r : rows)
        out << r.iter << "," << detail::fmt_double(r.c1) << "," << detail::fmt_double(r.c2)
            << "," << detail::fmt_double(r.phi) << "," << r.accepted << "\n";
}

}  // namespace wavefilter
