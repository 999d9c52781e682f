#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lmd/limits.hpp"

using namespace lmd;

namespace {
Eigen::ArrayXd arr(std::initializer_list<double> v) {
    Eigen::ArrayXd a(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) a(i++) = x;
    return a;
}
}  // namespace

TEST(Ks, DisjointSamples) {
    EXPECT_DOUBLE_EQ(ks_two_sample(arr({1, 2, 3}), arr({4, 5, 6})).d_statistic, 1.0);
}

TEST(Ks, HandComputedValues) {
    EXPECT_DOUBLE_EQ(ks_two_sample(arr({1, 2, 3, 4}), arr({2.5})).d_statistic, 0.5);
    // Ties: at x = 1 the CDFs are 2/3 and 1/3.
    EXPECT_NEAR(ks_two_sample(arr({1, 1, 2}), arr({1, 2, 2})).d_statistic, 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(ks_two_sample(arr({3, 1, 2}), arr({2, 3, 1})).d_statistic, 0.0);
}

TEST(Ks, CriticalValues) {
    const KsReport r = ks_two_sample(arr({1, 2, 3, 4}), arr({1, 2, 3, 4}));
    EXPECT_NEAR(r.critical_5pct, 1.36 * std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(r.critical(0.05), 1.3581 * std::sqrt(0.5), 1e-4);
    EXPECT_NEAR(r.critical(0.01), 1.6276 * std::sqrt(0.5), 1e-4);
    EXPECT_THROW(ks_two_sample(arr({}), arr({1})), std::invalid_argument);
}

TEST(LimitLawTest, AccelerationConstantFromLargeLocalTime) {
    // sigma=+1, gamma=0: A ~ (1.5 L / sqrt2)^{2/3}, X = sqrt(2A) W, and t^{-2/3} X -> c L1^{1/3} W1
    // with c = sqrt2 (1.5 / sqrt2)^{1/3}.
    const LimitLaw law = LimitLaw::forward(PowerLawDrive::make(1, 0.0));
    EXPECT_NEAR(law.constant, std::numbers::sqrt2 * std::cbrt(1.5 / std::numbers::sqrt2), 1e-14);
    EXPECT_NEAR(law.l_exponent, 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(law.time_exponent, -2.0 / 3.0, 1e-15);
}

TEST(LimitLawTest, DecelerationConstantFromLargeLocalTime) {
    // sigma=-1, gamma=1.75, k=-1/4: A = (1 + L / (4 sqrt2))^{-4} ~ (4 sqrt2)^4 L^{-4}, so
    // X ~ sqrt2 (4 sqrt2)^2 L^{-2} W = 32 sqrt2 t^{-1/2} L1^{-2} W1, and the t^{1/2} rescaling leaves
    // constant 32 sqrt2, exponent -2.
    const LimitLaw law = LimitLaw::forward(PowerLawDrive::make(-1, 1.75));
    EXPECT_NEAR(law.constant, 32.0 * std::numbers::sqrt2, 1e-12);
    EXPECT_NEAR(law.l_exponent, -2.0, 1e-15);
    const LimitLaw v = LimitLaw::half_exponent_variant(PowerLawDrive::make(-1, 1.75));
    EXPECT_NEAR(v.l_exponent, -1.0, 1e-15);
    EXPECT_NEAR(v.constant, std::pow(2.0, 1.5) * 4.0, 1e-12);
}

TEST(LimitLawTest, RegimeChecks) {
    EXPECT_THROW(LimitLaw::forward(PowerLawDrive::make(-1, 1.0)), std::invalid_argument);
    EXPECT_THROW(LimitLaw::forward(PowerLawDrive::make(1, 1.2)), std::invalid_argument);
    EXPECT_THROW(LimitLaw::reversed(PowerLawDrive::make(1, 0.5)), std::invalid_argument);
    EXPECT_NO_THROW(LimitLaw::reversed(PowerLawDrive::make(-1, 0.5)));
}

TEST(LimitLawTest, RescaledAccelerationConvergesAtLargeTime) {
    const PowerLawDrive d = PowerLawDrive::make(1, 0.5);
    const Eigen::ArrayXd emp = rescaled_empirical(d, 1e8, 20000, RngStream(1, 1));
    const Eigen::ArrayXd ref = limit_law_sample(LimitLaw::forward(d), 20000, RngStream(1, 2));
    EXPECT_FALSE(ks_two_sample(emp, ref).rejects(0.01));
}

TEST(LimitLawTest, ReversedBlowupMatchesLawAtSmallTime) {
    const PowerLawDrive d = PowerLawDrive::make(-1, 0.5);
    ReversedOptions opt;
    opt.n_steps = 20000;
    const Eigen::ArrayXd emp = reversed_blowup_empirical(d, 1e-4, 20000, RngStream(2, 1), opt);
    const Eigen::ArrayXd ref = limit_law_sample(LimitLaw::reversed(d), 20000, RngStream(2, 2));
    EXPECT_TRUE(emp.isFinite().all());
    EXPECT_FALSE(ks_two_sample(emp, ref).rejects(0.01));
}

TEST(Generator, ConstantHasZeroLhs) {
    GeneratorProbe p;
    p.h = [](double, double) { return 3.0; };
    p.phi = [](double x) { return std::abs(x) < 1 ? std::pow(1 - x * x, 3) : 0.0; };
    p.n_samples = 20000;
    const GeneratorCheck g = generator_check(p, PowerLawDrive::make(-1, 0.0), 1.0, RngStream(3, 3));
    EXPECT_EQ(g.lhs, 0.0);
    EXPECT_EQ(g.rhs, 0.0);
}

TEST(Generator, XSquaredAgainstQuadrature) {
    // rhs = int phi * a * 2 dx; with phi = (1 - x^2)^3 on [-1, 1], int phi = 32/35.
    GeneratorProbe p;
    p.h = [](double x, double) { return x * x; };
    p.phi = [](double x) { return std::abs(x) < 1 ? std::pow(1 - x * x, 3) : 0.0; };
    p.n_samples = 200000;
    const GeneratorCheck g = generator_check(p, PowerLawDrive::make(-1, 0.0), 0.5, RngStream(4, 4));
    EXPECT_NEAR(g.rhs, 32.0 / 35.0, 1e-6);
    EXPECT_NEAR(g.lhs, g.rhs, 5 * g.lhs_std_error + 0.02);
}

TEST(Generator, LocalTimePairDrift) {
    // h = l: rhs = phi(0) * 1 = 1 and the Brownian part vanishes.
    GeneratorProbe p;
    p.h = [](double, double l) { return l; };
    p.phi = [](double x) { return std::abs(x) < 1 ? std::pow(1 - x * x, 3) : 0.0; };
    p.n_samples = 200000;
    p.t_small = 1e-3;
    const GeneratorCheck g = local_time_generator_check(p, RngStream(5, 5));
    EXPECT_NEAR(g.rhs, 1.0, 1e-6);
    EXPECT_NEAR(g.lhs, 1.0, 4 * g.lhs_std_error + 0.01);
}
