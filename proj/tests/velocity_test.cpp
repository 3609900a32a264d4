#include "wavefilter/velocity.hpp"

#include <cmath>

#include "gtest/gtest.h"
#include "wavefilter/asymptotics.hpp"

namespace wavefilter {
namespace {

TEST(ConstantPath, LinearDisplacement) {
    const VelocityPath path = VelocityPath::constant({-0.5, -1.0});
    const Vec2 d = path.displacement(2.0);
    EXPECT_DOUBLE_EQ(d.x, -1.0);
    EXPECT_DOUBLE_EQ(d.y, -2.0);
    EXPECT_DOUBLE_EQ(path.displacement(0.0).x, 0.0);
}

TEST(IntegrableDrift, AccumulatedDifferenceApproachesAlpha) {
    const Vec2 c{-0.5, -1.0};
    const Vec2 alpha{0.5, 0.5};
    const double beta = 1.0;
    const double dt = 0.1;
    const VelocityPath model = VelocityPath::constant(c);
    const VelocityPath truth(IntegrableDriftVelocity{c, alpha, beta, dt});

    // D(0) = 0 for every kind.
    EXPECT_EQ(norm(truth.displacement(0.0)), 0.0);

    // int_0^t delta_c = alpha (1 - (t0/(t+t0))^beta) in closed form.
    for (double t : {0.1, 1.0, 10.0, 1000.0}) {
        const Vec2 got = delta_displacement(model, truth, t);
        const double expect = 0.5 * (1.0 - dt / (t + dt));
        EXPECT_NEAR(got.x, expect, 1e-14);
        EXPECT_NEAR(got.y, expect, 1e-14);
    }
    const Vec2 tail = delta_displacement(model, truth, 1e6) - alpha;
    EXPECT_LT(norm(tail), 1e-6);
}

TEST(IntegrableDrift, RemainderDecaysAtRateBeta) {
    const Vec2 c{0.0, 0.0};
    for (double beta : {0.5, 1.0, 2.0}) {
        const VelocityPath model = VelocityPath::constant(c);
        const VelocityPath truth(IntegrableDriftVelocity{c, {0.5, 0.5}, beta, 0.1});
        std::vector<double> log_t, log_r;
        for (double t : {1.0, 4.0, 16.0, 64.0, 256.0, 1024.0}) {
            const Vec2 remainder = Vec2{0.5, 0.5} - delta_displacement(model, truth, t);
            log_t.push_back(std::log(t));
            log_r.push_back(std::log(norm(remainder)));
        }
        double slope = 0.0, intercept = 0.0, r2 = 0.0;
        least_squares(log_t, log_r, slope, intercept, r2);
        EXPECT_LE(slope, -beta + 0.1);
    }
}

TEST(Brownian, ZeroAmplitudeReducesToConstantExactly) {
    const Vec2 c{0.3, -0.7};
    const VelocityPath plain = VelocityPath::constant(c);
    const VelocityPath frozen(BrownianPerturbedVelocity{c, 0.0, 99, 0.1, 200});
    for (int j = 0; j <= 200; j += 13) {
        const double t = j * 0.1;
        EXPECT_EQ(frozen.displacement(t).x, plain.displacement(t).x);
        EXPECT_EQ(frozen.displacement(t).y, plain.displacement(t).y);
    }
}

TEST(Brownian, SameSeedSamePath) {
    const BrownianPerturbedVelocity spec{{0.0, 0.0}, 0.25, 1234, 0.1, 300};
    const VelocityPath a(spec);
    const VelocityPath b(spec);
    for (int j = 0; j <= 300; ++j) {
        const double t = j * 0.1;
        EXPECT_EQ(a.displacement(t).x, b.displacement(t).x);
        EXPECT_EQ(a.displacement(t).y, b.displacement(t).y);
    }
}

TEST(Brownian, IncrementVarianceMatchesDt) {
    const double dt = 0.1;
    const int n = 800;
    const VelocityPath path(BrownianPerturbedVelocity{{0.0, 0.0}, 1.0, 77, dt, n});
    double sum = 0.0, sum_sq = 0.0;
    int count = 0;
    for (int j = 1; j <= n; ++j) {
        const Vec2 w_prev = -1.0 * path.displacement((j - 1) * dt);
        const Vec2 w_cur = -1.0 * path.displacement(j * dt);
        for (double inc : {w_cur.x - w_prev.x, w_cur.y - w_prev.y}) {
            sum += inc;
            sum_sq += inc * inc;
            ++count;
        }
    }
    const double mean = sum / count;
    const double var = sum_sq / count - mean * mean;
    EXPECT_NEAR(var, dt, 0.2 * dt);
}

TEST(Brownian, OffGridQueryRejected) {
    const VelocityPath path(BrownianPerturbedVelocity{{0.0, 0.0}, 0.1, 5, 0.1, 10});
    EXPECT_THROW(path.displacement(0.05), std::invalid_argument);
    EXPECT_THROW(path.displacement(1.0001), std::invalid_argument);
    EXPECT_THROW(path.displacement(1.1), std::invalid_argument);  // beyond n_steps
    EXPECT_NO_THROW(path.displacement(1.0));
}

TEST(DeltaDisplacement, IdenticalPathsVanish) {
    const VelocityPath p = VelocityPath::constant({1.0, 2.0});
    EXPECT_EQ(norm(delta_displacement(p, p, 3.7)), 0.0);
}

TEST(DeltaDisplacement, RationalShiftGrowsLinearly) {
    const double dt = 0.1;
    const Vec2 c{-0.5, -1.0};
    const Vec2 delta_c{0.5 / dt, 0.5 / dt};  // dt * delta_c = (1/2, 1/2)
    const VelocityPath model = VelocityPath::constant(c);
    const VelocityPath truth = VelocityPath::constant(c - delta_c);
    for (int l = 1; l <= 20; ++l) {
        const Vec2 d = delta_displacement(model, truth, l * dt);
        EXPECT_NEAR(d.x, 0.5 * l, 1e-12);
        EXPECT_NEAR(d.y, 0.5 * l, 1e-12);
    }
}

TEST(DeltaDisplacement, BrownianTruthGivesEpsW) {
    const double dt = 0.1;
    const Vec2 c{0.2, 0.4};
    const double eps = 0.3;
    const VelocityPath model = VelocityPath::constant(c);
    const VelocityPath truth(BrownianPerturbedVelocity{c, eps, 11, dt, 100});
    const VelocityPath unit(BrownianPerturbedVelocity{{0.0, 0.0}, 1.0, 11, dt, 100});
    for (int j = 0; j <= 100; j += 7) {
        const double t = j * dt;
        const Vec2 got = delta_displacement(model, truth, t);
        const Vec2 eps_w = -eps * unit.displacement(t);  // displacement = -W for c=0, eps=1
        EXPECT_NEAR(got.x, eps_w.x, 1e-13);
        EXPECT_NEAR(got.y, eps_w.y, 1e-13);
    }
}

TEST(VelocityPath, InvalidParametersRejected) {
    EXPECT_THROW(VelocityPath(IntegrableDriftVelocity{{0, 0}, {1, 1}, -1.0, 0.1}),
                 std::invalid_argument);
    EXPECT_THROW(VelocityPath(IntegrableDriftVelocity{{0, 0}, {1, 1}, 1.0, 0.0}),
                 std::invalid_argument);
    EXPECT_THROW(VelocityPath(BrownianPerturbedVelocity{{0, 0}, -0.1, 1, 0.1, 10}),
                 std::invalid_argument);
}

}  // namespace
}  // namespace wavefilter
