#pragma once

namespace wavefilter {

// Central numeric tolerances. Every default quoted in the module contracts
// lives here so the library checks and the test suites stay in sync.
struct Tolerances {
    double hermitian = 1e-12;         // max |coeff(-k) - conj(coeff(k))|
    double grid_imag = 1e-12;         // max imaginary residue of a synthesized grid
    double parseval_rel = 1e-10;      // coefficient sum vs grid mean square
    double round_trip = 1e-12;        // grid/propagation round trips, max coeff error
    double norm_preserve = 1e-10;     // |Hs norm drift| under unitary maps
    double variance_law_rel = 1e-12;  // recursion vs closed-form variance
    double mean_agreement = 1e-10;    // recursion vs closed-form smoother mean
    double degenerate_coeff = 1e-12;  // velocity_seed vanishing-coefficient guard
    double geometric_sum_rel = 1e-8;  // geometric-sum modulus vs sine ratio
};

inline Tolerances& tolerances() {
    static Tolerances t;
    return t;
}

}  // namespace wavefilter
