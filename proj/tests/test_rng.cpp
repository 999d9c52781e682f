#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lmd/ensemble.hpp"
#include "lmd/rng.hpp"

using namespace lmd;

TEST(RngStream, SameSeedAndStreamReproduce) {
    RngStream a(7, 3), b(7, 3);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.bits(), b.bits());
}

TEST(RngStream, StreamsDiffer) {
    RngStream a(7, 3), b(7, 4);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a.bits() == b.bits();
    EXPECT_EQ(equal, 0);
}

TEST(RngStream, SubstreamIsDeterministicAndDistinct) {
    const RngStream root(11, 0);
    RngStream s1 = root.substream(5), s2 = root.substream(5), s3 = root.substream(6);
    const auto x = s1.bits();
    EXPECT_EQ(x, s2.bits());
    EXPECT_NE(x, s3.bits());
}

TEST(RngStream, UniformRange) {
    RngStream r(1, 1);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const double v = r.uniform_open_low();
        ASSERT_GT(v, 0.0);
        ASSERT_LE(v, 1.0);
    }
}

TEST(RngStream, NormalMoments) {
    RngStream r(2, 9);
    const int n = 400000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 5 * std::sqrt(1.0 / n));
    EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 5 * std::sqrt(96.0 / n));
}

TEST(Ensemble, ResultIndependentOfThreadCount) {
    const RngStream base(3, 3);
    const std::size_t m = 3 * kEnsembleBlock + 17;
    auto fill = [&](unsigned threads) {
        std::vector<double> out(m);
        for_each_block(m, base, threads, [&](std::size_t, std::size_t b, std::size_t e, RngStream& r) {
            for (std::size_t i = b; i < e; ++i) out[i] = r.uniform();
        });
        return out;
    };
    EXPECT_EQ(fill(1), fill(3));
}

TEST(Ensemble, PropagatesWorkerExceptions) {
    const RngStream base(3, 3);
    EXPECT_THROW(for_each_block(4 * kEnsembleBlock, base, 2,
                                [](std::size_t b, std::size_t, std::size_t, RngStream&) {
                                    if (b == 2) throw std::runtime_error("boom");
                                }),
                 std::runtime_error);
}
