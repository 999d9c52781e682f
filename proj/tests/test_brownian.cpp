#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lmd/brownian.hpp"

using namespace lmd;

TEST(Walk, FromIncrementsCountsZeros) {
    const std::vector<int> inc{1, -1, -1, 1, 1, 1, -1, -1};
    const WalkPath p = walk_from_increments(inc);
    EXPECT_EQ(p.positions, (std::vector<std::int64_t>{0, 1, 0, -1, 0, 1, 2, 1, 0}));
    const DiscreteLocalTime lt = discrete_local_time(p);
    EXPECT_EQ(lt.lambda, (std::vector<std::int64_t>{0, 0, 1, 1, 2, 2, 2, 2, 3}));
}

TEST(Walk, RejectsBadIncrements) {
    const std::vector<int> inc{1, 0};
    EXPECT_THROW(walk_from_increments(inc), std::invalid_argument);
}

TEST(Walk, EndpointMatchesFullPathLaw) {
    // Exact law at n = 4: P(Y_4 = 0) = 6/16, E[Lambda_4] = P(Y_2=0) + P(Y_4=0) = 1/2 + 3/8.
    RngStream r(5, 5);
    const int m = 200000;
    double zero = 0, lam = 0;
    for (int i = 0; i < m; ++i) {
        const WalkEndpoint e = walk_endpoint(0, 4, r);
        zero += e.position == 0;
        lam += static_cast<double>(e.local_time);
    }
    EXPECT_NEAR(zero / m, 0.375, 0.005);
    EXPECT_NEAR(lam / m, 0.875, 0.01);
}

TEST(Walk, LongWalkParityAndMean) {
    RngStream r(6, 6);
    const std::size_t n = 1001;
    double sq = 0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) {
        const WalkEndpoint e = walk_endpoint(0, n, r);
        ASSERT_EQ(std::abs(e.position) % 2, 1);
        sq += static_cast<double>(e.position * e.position);
    }
    EXPECT_NEAR(sq / m / static_cast<double>(n), 1.0, 0.04);
}

TEST(JointLaw, MarginalsAndReflectionConstraint) {
    // L_t ~ |N(0, t)| and |W_t| ~ |N(0, t)|; E[L_t] = sqrt(2t/pi).
    RngStream r(8, 8);
    const double t = 2.0;
    const int m = 200000;
    double sl = 0, sw2 = 0;
    for (int i = 0; i < m; ++i) {
        const JointSample s = sample_joint_wl(t, r);
        ASSERT_GE(s.l, 0.0);
        sl += s.l;
        sw2 += s.w * s.w;
    }
    EXPECT_NEAR(sl / m, std::sqrt(2 * t / std::numbers::pi), 0.01);
    EXPECT_NEAR(sw2 / m, t, 0.03);
}

TEST(JointLaw, JointTailMatchesReflection) {
    // P(L_1 > l, W_1 > w) for w, l >= 0 equals P(N > l + w).
    RngStream r(9, 9);
    const int m = 400000;
    int hits = 0;
    for (int i = 0; i < m; ++i) {
        const JointSample s = sample_joint_wl(1.0, r);
        hits += s.l > 0.5 && s.w > 0.3;
    }
    const double expected = 0.5 * std::erfc(0.8 / std::numbers::sqrt2);
    EXPECT_NEAR(static_cast<double>(hits) / m, expected, 0.003);
}

TEST(KilledEndpoint, StaysOnStartingSide) {
    RngStream r(10, 10);
    for (int i = 0; i < 10000; ++i) {
        ASSERT_GT(sample_killed_endpoint(0.7, 1.0, r), 0.0);
        ASSERT_LT(sample_killed_endpoint(-0.2, 1.0, r), 0.0);
    }
}

TEST(KilledEndpoint, MeanMatchesImageDensity) {
    // Killed density (phi_t(y-b) - phi_t(y+b)) on y > 0 normalised by erf(b/sqrt(2t)); its
    // unnormalised mean is b, so the conditional mean is b / erf(b / sqrt(2t)).
    RngStream r(11, 11);
    const double b = 0.5, t = 1.0;
    double s = 0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) s += sample_killed_endpoint(b, t, r);
    EXPECT_NEAR(s / m, b / std::erf(b / std::sqrt(2 * t)), 0.01);
}

TEST(Quadrature, TrapezoidIntegratesPolynomials) {
    const QuadratureRule q = trapezoid_rule(2.0, 41);
    EXPECT_NEAR(q.weights.sum(), 4.0, 1e-12);
    EXPECT_NEAR((q.weights * q.nodes).sum(), 0.0, 1e-12);
    EXPECT_NEAR((q.weights * q.nodes * q.nodes).sum(), 16.0 / 3.0, 0.01);
}

TEST(Occupation, SmallRunNearOne) {
    const OccupationEstimate e = occupation_identity_check(2000, trapezoid_rule(4.0, 41), RngStream(12, 12), 2000);
    EXPECT_NEAR(e.value, 1.0, 0.05);
    EXPECT_GT(e.std_error, 0.0);
}
