#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lmd/flow.hpp"
#include "lmd/process.hpp"

using namespace lmd;

TEST(PointFromLocalTime, MapsThroughFlow) {
    const PowerLawDrive d = PowerLawDrive::make(-1, 0.0);
    const ProcessPoint p = point_from_local_time(d, 1.0, 0.5, 0.3, 1.0);
    const double a = std::pow(1.0 - 1.5 * 0.3 / std::numbers::sqrt2, 2.0 / 3.0);
    EXPECT_NEAR(p.a, a, 1e-14);
    EXPECT_NEAR(p.x, std::sqrt(2 * a) * 0.5, 1e-14);
    EXPECT_EQ(point_from_local_time(d, 1.0, 0.5, 2.0, 1.0).status, Status::trapped);
    EXPECT_EQ(point_from_local_time(PowerLawDrive::make(1, 2.0), 1.0, 0.5, 5.0, 1.0).status, Status::exploded);
}

TEST(PointFromLocalTime, InertDriveIsScaledBrownian) {
    const ProcessPoint p = point_from_local_time(PowerLawDrive::zero(), 2.0, -0.4, 3.0, 1.0);
    EXPECT_DOUBLE_EQ(p.a, 2.0);
    EXPECT_DOUBLE_EQ(p.x, -0.8);
}

TEST(SampleExact, TrappedFractionMatchesSurvival) {
    const PowerLawDrive d = PowerLawDrive::make(-1, 0.5);
    const ProcessEnsemble e = sample_exact_ensemble(d, 1.0, 2.0, 100000, RngStream(1, 1));
    const double s = survival_probability(d, 2.0);
    EXPECT_NEAR(s, std::erf(1.0 / std::sqrt(2.0)), 1e-15);
    EXPECT_NEAR(e.fraction(Status::alive), s, 4 * std::sqrt(s * (1 - s) / 1e5));
}

TEST(SampleExact, InertSecondMoment) {
    const ProcessEnsemble e = sample_exact_ensemble(PowerLawDrive::zero(), 0.5, 3.0, 100000, RngStream(2, 2));
    EXPECT_NEAR(e.x.square().mean(), 2 * 0.5 * 3.0, 0.05);
}

TEST(SampleExact, ThreadCountDoesNotChangeDraws) {
    const PowerLawDrive d = PowerLawDrive::make(1, 0.5);
    const ProcessEnsemble a = sample_exact_ensemble(d, 1.0, 1.0, 10000, RngStream(3, 3), 1);
    const ProcessEnsemble b = sample_exact_ensemble(d, 1.0, 1.0, 10000, RngStream(3, 3), 4);
    EXPECT_TRUE((a.x == b.x).all());
    EXPECT_TRUE((a.a == b.a).all());
}

TEST(GeneralStart, NoDriveReducesToBrownian) {
    // With f = 0 the process is x0 + sqrt(2 a0) W.
    RngStream r(4, 4);
    const int m = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < m; ++i) {
        const ProcessPoint p = sample_from_general_start(PowerLawDrive::zero(), 1.0, 0.5, 2.0, r);
        s += p.x;
        s2 += p.x * p.x;
    }
    EXPECT_NEAR(s / m, 1.0, 0.02);
    EXPECT_NEAR(s2 / m - (s / m) * (s / m), 2.0, 0.05);
}

TEST(GeneralStart, NeverHittingKeepsStartingA) {
    // Far from 0 over short time: a stays at a0 for nearly every draw.
    RngStream r(5, 5);
    MeanderStats stats;
    int unchanged = 0;
    for (int i = 0; i < 2000; ++i) {
        unchanged += sample_from_general_start(PowerLawDrive::make(-1, 0.0), 3.0, 1.0, 0.01, r, &stats).a == 1.0;
    }
    EXPECT_EQ(unchanged, 2000);
    EXPECT_EQ(stats.killed_branch, 2000u);
    EXPECT_THROW(sample_from_general_start(PowerLawDrive::zero(), 0.0, 1.0, 1.0, r), std::invalid_argument);
}

TEST(Discrete, RecursionOnKnownPath) {
    // Drive f = -1 (sigma=-1, gamma=0), unscaled law, t = n = 4: dt factor sqrt(t/n) = 1.
    RngStream r(6, 6);
    const DiscreteTrajectory tr =
        simulate_discrete([](double) { return -0.1; }, 1.0, 4.0, 4, FlowLaw::unscaled, r);
    ASSERT_EQ(tr.as.size(), 5u);
    double a = 1.0;
    for (std::size_t k = 1; k <= 4; ++k) {
        if (tr.walk[k] == 0) a -= 0.1;
        EXPECT_NEAR(tr.as[k], a, 1e-15);
        EXPECT_NEAR(tr.xs[k], std::sqrt(2 * a) * static_cast<double>(tr.walk[k]), 1e-15);
    }
}

TEST(Discrete, EndpointAgreesWithTrajectory) {
    const PowerLawDrive d = PowerLawDrive::make(-1, 0.5);
    auto f = [d](double a) { return d(a); };
    for (std::uint64_t s = 0; s < 50; ++s) {
        RngStream r1(7, s), r2(7, s);
        const DiscreteTrajectory tr = simulate_discrete(f, 1.0, 1.0, 5000, FlowLaw::sde_consistent, r1);
        const ProcessPoint p = simulate_discrete_endpoint(f, 1.0, 1.0, 5000, FlowLaw::sde_consistent, r2);
        EXPECT_EQ(p.status, tr.status);
        if (p.status == Status::alive) {
            EXPECT_DOUBLE_EQ(p.x, tr.xs.back());
            EXPECT_DOUBLE_EQ(p.a, tr.as.back());
        }
    }
}

TEST(Discrete, ConsistentModeApproachesExactTrapping) {
    const PowerLawDrive d = PowerLawDrive::make(-1, 0.0);
    const ProcessEnsemble e =
        simulate_discrete_ensemble(d, 1.0, 1.0, 4000, FlowLaw::sde_consistent, 20000, RngStream(8, 8));
    EXPECT_NEAR(e.fraction(Status::trapped), std::erfc(1.0 / 1.5), 0.02);
}

TEST(Survival, Preconditions) {
    EXPECT_THROW(survival_probability(PowerLawDrive::make(1, 0.0), 1.0), std::invalid_argument);
    EXPECT_THROW(survival_probability(PowerLawDrive::make(-1, 1.5), 1.0), std::invalid_argument);
}

TEST(Regime, Table) {
    EXPECT_EQ(classify_regime(PowerLawDrive::make(-1, 1.0)).regime, Regime::trapped_finite_time);
    EXPECT_EQ(classify_regime(PowerLawDrive::make(-1, 1.75)).regime, Regime::decays_never_trapped);
    EXPECT_EQ(classify_regime(PowerLawDrive::make(-1, 2.5)).regime, Regime::recurrent);
    EXPECT_EQ(classify_regime(PowerLawDrive::make(1, 0.5)).regime, Regime::grows_forever);
    EXPECT_EQ(classify_regime(PowerLawDrive::make(1, 1.8)).regime, Regime::explodes_oscillating);
    EXPECT_EQ(classify_regime(PowerLawDrive::make(1, 2.0)).regime, Regime::explodes_x_to_0);
    EXPECT_TRUE(classify_regime(PowerLawDrive::make(-1, 1.0)).tau_finite);
    EXPECT_FALSE(classify_regime(PowerLawDrive::make(1, 1.0)).tau_finite);
    const auto r = classify_regime(PowerLawDrive::make(1, 0.0));
    ASSERT_TRUE(r.rate_exponent.has_value());
    EXPECT_NEAR(*r.rate_exponent, 2.0 / 3.0, 1e-15);
}
