#include "wavefilter/kalman.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "wavefilter/asymptotics.hpp"
#include "wavefilter/sampling.hpp"
#include "wavefilter/truthgen.hpp"

namespace wavefilter {
namespace {

SpectralField random_hermitian_field(const WavenumberLattice& lat, std::uint64_t seed) {
    Rng rng(seed);
    SpectralField f(lat);
    const int m = lat.max_mode();
    for (int k1 = 0; k1 <= m; ++k1)
        for (int k2 = -m; k2 <= m; ++k2) {
            const Mode k{k1, k2};
            if (!WavenumberLattice::is_representative(k)) continue;
            f.set_pair(k, Complex{rng.normal(), rng.normal()});
        }
    return f;
}

double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.coeff(i) - b.coeff(i)));
    return worst;
}

TEST(AssimilateStep, HugeNoiseLeavesStateUntouched) {
    const WavenumberLattice lat(3, 8);
    const AdvectionOperator op(VelocityPath::constant({-0.5, -1.0}));
    const CovarianceSpec prior(LaplacianPower{1.0, 1.0, 1.0});
    const SpectralField m0 = random_hermitian_field(lat, 1);
    const AssimilationState s0 = make_initial_state(m0, prior, op, 0.1);

    const CovarianceSpec huge(GridWhite{1e12});
    const SpectralField y = random_hermitian_field(lat, 2);
    const AssimilationState s1 = assimilate_step(s0, y, huge);
    EXPECT_EQ(s1.n, 1);
    EXPECT_LT(max_coeff_diff(s1.smoother_mean, m0), 1e-10);
    for (std::size_t i = 0; i < lat.size(); ++i)
        EXPECT_NEAR(s1.variance[i], s0.variance[i], 1e-10 * s0.variance[i]);
}

TEST(AssimilateStep, UnitScalarsHalveTheVariance) {
    // lambda = gamma = 1: one step sends v from 1 to 1/2; observing exactly
    // the predicted mean leaves the mean untouched.
    const WavenumberLattice lat(1, 3);
    const AdvectionOperator op(VelocityPath::constant({0.0, 0.0}));
    const CovarianceSpec unit_prior(GridWhite{1.0});
    const CovarianceSpec unit_noise(GridWhite{1.0});
    const SpectralField m0 = random_hermitian_field(lat, 3);
    const AssimilationState s0 = make_initial_state(m0, unit_prior, op, 0.1);
    const AssimilationState s1 = assimilate_step(s0, m0, unit_noise);  // y = predicted mean
    for (std::size_t i = 0; i < lat.size(); ++i) EXPECT_DOUBLE_EQ(s1.variance[i], 0.5);
    EXPECT_LT(max_coeff_diff(s1.smoother_mean, m0), 1e-14);
}

TEST(AssimilateStep, VarianceMatchesClosedFormLaw) {
    const WavenumberLattice lat(4, 9);
    const AdvectionOperator op(VelocityPath::constant({-0.5, -1.0}));
    const CovarianceSpec prior(LaplacianPower{0.7, 1.3, 0.4});
    const CovarianceSpec gamma(LaplacianPower{2.0, 0.8, 1.1});
    AssimilationState s = make_initial_state(SpectralField::zero(lat), prior, op, 0.1);
    const SpectralField y = SpectralField::zero(lat);
    for (int n = 1; n <= 200; ++n) {
        s = assimilate_step(s, y, gamma);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            const Mode k = lat.mode(i);
            const double expect =
                1.0 / (n / gamma.eigenvalue(k) + 1.0 / prior.eigenvalue(k));
            EXPECT_NEAR(s.variance[i], expect, 1e-12 * expect);
        }
    }
}

TEST(ClosedForm, SingleObservationPlugIn) {
    // gamma/lambda = 1, m0 = 0: m_1(k) = e^{+2 pi i k . D(dt)} y_1(k) / 2.
    const WavenumberLattice lat(2, 5);
    const Vec2 c{-0.5, -1.0};
    const double dt = 0.1;
    const AdvectionOperator op(VelocityPath::constant(c));
    const CovarianceSpec unit(GridWhite{1.0});
    const SpectralField y = random_hermitian_field(lat, 4);
    const auto state =
        smoother_closed_form(SpectralField::zero(lat), unit, unit, op, {y}, dt);
    EXPECT_EQ(state.n, 1);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const Mode k = lat.mode(i);
        const Complex expect = mode_phase(k, c * dt, +1.0) * y.coeff(i) / 2.0;
        EXPECT_LT(std::abs(state.smoother_mean.coeff(i) - expect), 1e-14);
    }
}

TEST(ClosedForm, AgreesWithRecursionOnRandomScenario) {
    const WavenumberLattice lat(5, 11);
    const Vec2 c{0.37, -0.81};
    const double dt = 0.13;
    const AdvectionOperator op(VelocityPath::constant(c));
    const CovarianceSpec prior(LaplacianPower{1.2, 1.1, 0.8});
    const CovarianceSpec gamma(GridWhite{0.04});
    const SpectralField m0 = random_hermitian_field(lat, 5);

    std::vector<SpectralField> observations;
    for (int l = 0; l < 50; ++l)
        observations.push_back(random_hermitian_field(lat, 100 + static_cast<std::uint64_t>(l)));

    AssimilationState recursive = make_initial_state(m0, prior, op, dt);
    for (const auto& y : observations) recursive = assimilate_step(recursive, y, gamma);
    const AssimilationState direct =
        smoother_closed_form(m0, prior, gamma, op, observations, dt);

    EXPECT_TRUE(recursive.smoother_mean.is_hermitian(0.0));
    EXPECT_LT(max_coeff_diff(recursive.smoother_mean, direct.smoother_mean), 1e-10);
    for (std::size_t i = 0; i < lat.size(); ++i)
        EXPECT_NEAR(recursive.variance[i], direct.variance[i], 1e-12 * direct.variance[i]);
}

TEST(ClosedForm, NoiselessSelfConsistentDataRecoversTruth) {
    const WavenumberLattice lat(3, 8);
    const Vec2 c{-0.5, -1.0};
    const double dt = 0.1;
    const AdvectionOperator op(VelocityPath::constant(c));
    const SpectralField u = paper_truth_ic(lat);
    const CovarianceSpec prior(LaplacianPower{1.0, 1.0, 1.0});
    const CovarianceSpec gamma(GridWhite{1e-4});

    std::vector<SpectralField> observations;
    double err_small_n = 0.0;
    for (int l = 1; l <= 64; ++l) {
        observations.push_back(op.propagate(u, l * dt));
        if (l == 8) {
            const auto s =
                smoother_closed_form(SpectralField::zero(lat), prior, gamma, op,
                                     observations, dt);
            err_small_n = sobolev_norm(s.smoother_mean - u, 0.0);
        }
    }
    const auto s64 =
        smoother_closed_form(SpectralField::zero(lat), prior, gamma, op, observations, dt);
    const double err_large_n = sobolev_norm(s64.smoother_mean - u, 0.0);
    // Prior-mean bias decays like (gamma/lambda) |u| / n.
    EXPECT_LT(err_large_n, err_small_n / 4.0);
    EXPECT_LT(err_large_n, 5e-3);
}

TEST(ClosedForm, RejectsEmptyObservations) {
    const WavenumberLattice lat(2, 5);
    const AdvectionOperator op(VelocityPath::constant({0.0, 0.0}));
    const CovarianceSpec unit(GridWhite{1.0});
    EXPECT_THROW(smoother_closed_form(SpectralField::zero(lat), unit, unit, op,
                                      std::vector<SpectralField>{}, 0.1),
                 std::invalid_argument);
}

TEST(AssimilateStep, RejectsLatticeMismatch) {
    const WavenumberLattice a(2, 5), b(3, 7);
    const AdvectionOperator op(VelocityPath::constant({0.0, 0.0}));
    const CovarianceSpec unit(GridWhite{1.0});
    const AssimilationState s =
        make_initial_state(SpectralField::zero(a), unit, op, 0.1);
    EXPECT_THROW(assimilate_step(s, SpectralField::zero(b), unit), std::invalid_argument);
}

TEST(FilterMean, InitialStateReturnsPriorMean) {
    const WavenumberLattice lat(3, 8);
    const AdvectionOperator op(VelocityPath::constant({-0.5, -1.0}));
    const SpectralField m0 = random_hermitian_field(lat, 6);
    const auto s = make_initial_state(m0, CovarianceSpec(GridWhite{1.0}), op, 0.1);
    EXPECT_LT(max_coeff_diff(filter_mean(s), m0), 1e-15);
}

TEST(FilterMean, PeriodicReturnEqualsSmootherMean) {
    // c = (-0.5, -1.0), t_n = 2.0: c t_n integer, so e^{-t_n L} = identity.
    const WavenumberLattice lat(3, 8);
    const Vec2 c{-0.5, -1.0};
    const double dt = 0.1;
    const AdvectionOperator op(VelocityPath::constant(c));
    const CovarianceSpec unit(GridWhite{1.0});
    std::vector<SpectralField> observations;
    for (int l = 0; l < 20; ++l)
        observations.push_back(random_hermitian_field(lat, 200 + static_cast<std::uint64_t>(l)));
    const auto s = smoother_closed_form(random_hermitian_field(lat, 7), unit, unit, op,
                                        observations, dt);
    EXPECT_EQ(s.n, 20);
    EXPECT_LT(max_coeff_diff(filter_mean(s), s.smoother_mean), 1e-12);
}

TEST(FilterMean, UnitaryNormEquality) {
    const WavenumberLattice lat(4, 9);
    const AdvectionOperator op(VelocityPath::constant({0.21, 0.77}));
    const CovarianceSpec unit(GridWhite{1.0});
    std::vector<SpectralField> observations;
    for (int l = 0; l < 7; ++l)
        observations.push_back(random_hermitian_field(lat, 300 + static_cast<std::uint64_t>(l)));
    const auto s = smoother_closed_form(random_hermitian_field(lat, 8), unit, unit, op,
                                        observations, 0.17);
    const SpectralField f = filter_mean(s);
    for (double sv : {0.0, 1.0, 2.0})
        EXPECT_NEAR(sobolev_norm(f, sv), sobolev_norm(s.smoother_mean, sv), 1e-10);
}

TEST(Variance, BoundsAndTraceContraction) {
    const WavenumberLattice lat(4, 9);
    const AdvectionOperator op(VelocityPath::constant({-0.5, -1.0}));
    const CovarianceSpec prior(LaplacianPower{0.9, 1.2, 1.0});
    const CovarianceSpec gamma(LaplacianPower{1.4, 0.9, 0.7});
    AssimilationState s = make_initial_state(SpectralField::zero(lat), prior, op, 0.1);
    const double gamma_trace = trace(gamma, lat);
    const SpectralField y = SpectralField::zero(lat);
    for (int n = 1; n <= 128; ++n) {
        s = assimilate_step(s, y, gamma);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            const Mode k = lat.mode(i);
            EXPECT_LE(s.variance[i], gamma.eigenvalue(k) / n * (1.0 + 1e-12));
            EXPECT_LE(s.variance[i], prior.eigenvalue(k) * (1.0 + 1e-12));
        }
        EXPECT_LE(trace_of_covariance(s), gamma_trace / n * (1.0 + 1e-12));
    }
}

TEST(Variance, MonotoneNonIncreasing) {
    const WavenumberLattice lat(3, 8);
    const AdvectionOperator op(VelocityPath::constant({0.0, 0.0}));
    const CovarianceSpec prior(LaplacianPower{1.0, 1.0, 1.0});
    const CovarianceSpec gamma(GridWhite{0.5});
    AssimilationState s = make_initial_state(SpectralField::zero(lat), prior, op, 0.1);
    std::vector<double> prev = s.variance;
    const SpectralField y = SpectralField::zero(lat);
    for (int n = 0; n < 32; ++n) {
        s = assimilate_step(s, y, gamma);
        for (std::size_t i = 0; i < lat.size(); ++i) EXPECT_LE(s.variance[i], prev[i]);
        prev = s.variance;
    }
}

TEST(ClosedForm, ObservationOrderIrrelevant) {
    const WavenumberLattice lat(3, 8);
    const AdvectionOperator op(VelocityPath::constant({0.4, -0.3}));
    const CovarianceSpec prior(LaplacianPower{1.0, 1.5, 1.0});
    const CovarianceSpec gamma(GridWhite{0.09});
    const SpectralField m0 = random_hermitian_field(lat, 9);
    const double dt = 0.1;

    std::vector<std::pair<double, SpectralField>> timed;
    for (int l = 1; l <= 16; ++l)
        timed.emplace_back(l * dt, random_hermitian_field(lat, 400 + static_cast<std::uint64_t>(l)));
    const auto in_order = smoother_closed_form(m0, prior, gamma, op, timed, dt);

    std::mt19937 shuffle_rng(123);
    std::shuffle(timed.begin(), timed.end(), shuffle_rng);
    const auto permuted = smoother_closed_form(m0, prior, gamma, op, timed, dt);

    EXPECT_LT(max_coeff_diff(in_order.smoother_mean, permuted.smoother_mean), 1e-12);
}

TEST(Variance, ContractionOperatorNormRate) {
    // max_k |k|^s v_n(k) should decay like 1/n: log-log slope within 0.1 of -1.
    const WavenumberLattice lat(5, 11);
    const AdvectionOperator op(VelocityPath::constant({0.0, 0.0}));
    const CovarianceSpec prior(LaplacianPower{1.0, 2.0, 1.0});
    const CovarianceSpec gamma(LaplacianPower{1.0, 1.5, 1.0});
    AssimilationState s = make_initial_state(SpectralField::zero(lat), prior, op, 0.1);
    const SpectralField y = SpectralField::zero(lat);
    const double sv = 1.0;
    std::vector<double> log_n, log_norm;
    for (int n = 1; n <= 1024; ++n) {
        s = assimilate_step(s, y, gamma);
        if ((n & (n - 1)) == 0 && n >= 8) {
            double worst = 0.0;
            for (std::size_t i = 0; i < lat.size(); ++i) {
                const Mode k = lat.mode(i);
                const double w = (k.k1 == 0 && k.k2 == 0)
                                     ? 1.0
                                     : std::pow(static_cast<double>(abs_sq(k)), sv);
                worst = std::max(worst, w * s.variance[i]);
            }
            log_n.push_back(std::log(static_cast<double>(n)));
            log_norm.push_back(std::log(worst));
        }
    }
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
    least_squares(log_n, log_norm, slope, intercept, r2);
    EXPECT_NEAR(slope, -1.0, 0.1);
}

TEST(Misfit, IdenticalArgumentsAndNoDataGiveZero) {
    const WavenumberLattice lat(3, 8);
    const SpectralField v = random_hermitian_field(lat, 10);
    const CovarianceSpec white(GridWhite{1e-4});
    EXPECT_EQ(posterior_log_density_ratio(v, v, {-0.5, -1.0}, {}, white, 0.1), 0.0);

    std::vector<SpectralField> obs{random_hermitian_field(lat, 11)};
    EXPECT_EQ(posterior_log_density_ratio(v, v, {-0.5, -1.0}, obs, white, 0.1), 0.0);
}

TEST(Misfit, SingleModeMatchesHandExpandedQuadratic) {
    const WavenumberLattice lat(2, 5);
    const Vec2 c{0.3, 0.1};
    const double dt = 0.2;
    const double sigma2 = 0.04;

    SpectralField y(lat);
    y.set_pair({1, 0}, Complex{0.9, -0.4});
    SpectralField v(lat);
    v.set_pair({1, 0}, Complex{-0.2, 0.6});

    // || y - e^{-t L} v ||^2 expands to sum over the conjugate pair of
    // |y_k - v_k e^{-2 pi i k . c t}|^2.
    const Complex phase = mode_phase({1, 0}, c * dt, -1.0);
    const double mode_term = std::norm(Complex{0.9, -0.4} - Complex{-0.2, 0.6} * phase);
    const double expect = 2.0 * mode_term / (2.0 * sigma2);

    const double got =
        posterior_misfit(v, VelocityPath::constant(c), {y}, dt, sigma2);
    EXPECT_NEAR(got, expect, 1e-12 * std::abs(expect));
}

TEST(Misfit, AccumulatorMatchesDirectDefinition) {
    const WavenumberLattice lat(3, 8);
    const Vec2 c{-0.5, -1.0};
    const double dt = 0.1;
    const double sigma2 = 1e-4;
    std::vector<SpectralField> obs;
    for (int l = 0; l < 9; ++l)
        obs.push_back(random_hermitian_field(lat, 500 + static_cast<std::uint64_t>(l)));
    const MisfitAccumulator acc(lat, VelocityPath::constant(c), obs, dt, sigma2);
    for (int trial = 0; trial < 4; ++trial) {
        const SpectralField v = random_hermitian_field(lat, 600 + static_cast<std::uint64_t>(trial));
        const double direct = posterior_misfit(v, VelocityPath::constant(c), obs, dt, sigma2);
        EXPECT_NEAR(acc.phi(v), direct, 1e-9 * std::max(1.0, std::abs(direct)));
    }
}

TEST(Misfit, NonWhiteNoiseUnsupported) {
    const WavenumberLattice lat(2, 5);
    const SpectralField v(lat);
    const CovarianceSpec colored(LaplacianPower{1.0, 1.0, 1.0});
    EXPECT_THROW(posterior_log_density_ratio(v, v, {0.0, 0.0}, {}, colored, 0.1),
                 std::invalid_argument);
}

TEST(Kalman, PinnedPriorModeStaysAtPriorMean) {
    const WavenumberLattice lat(2, 5);
    const AdvectionOperator op(VelocityPath::constant({0.1, 0.2}));
    const CovarianceSpec pinned(LaplacianPower{1.0, 2.0, 0.0});
    const CovarianceSpec gamma(GridWhite{1e-2});
    AssimilationState s = make_initial_state(SpectralField::zero(lat), pinned, op, 0.1);
    std::vector<SpectralField> obs;
    for (int l = 0; l < 12; ++l) {
        obs.push_back(random_hermitian_field(lat, 700 + static_cast<std::uint64_t>(l)));
        s = assimilate_step(s, obs.back(), gamma);
    }
    EXPECT_EQ(s.smoother_mean.coeff({0, 0}), (Complex{0.0, 0.0}));
    EXPECT_EQ(s.variance[lat.index({0, 0})], 0.0);
    const auto closed = smoother_closed_form(SpectralField::zero(lat), pinned, gamma, op, obs, 0.1);
    EXPECT_EQ(closed.smoother_mean.coeff({0, 0}), (Complex{0.0, 0.0}));
    EXPECT_LT(max_coeff_diff(closed.smoother_mean, s.smoother_mean), 1e-10);
}

}  // namespace
}  // namespace wavefilter
