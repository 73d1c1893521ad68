#include <gtest/gtest.h>

#include <cmath>

#include <kpzi/mc.hpp>

using namespace kpzi;

namespace {

MCOptions small(std::uint64_t seed = 42) {
    MCOptions o;
    o.n_samples = 10000;
    o.n_steps = 1024;
    o.seed = seed;
    return o;
}

}  // namespace

TEST(Paths, Construction) {
    auto rng = chunk_rng(7, 0);
    BrownianPath b{256, 2.0, {}, PathKind::bridge}, f{256, 2.0, {}, PathKind::free};
    sample_path(rng, b);
    sample_path(rng, f);
    ASSERT_EQ(b.values.size(), 257u);
    EXPECT_EQ(b.values.front(), 0.0);
    EXPECT_EQ(b.values.back(), 0.0);
    EXPECT_EQ(f.values.front(), 0.0);
    EXPECT_NE(f.values.back(), 0.0);
}

TEST(Paths, TrapezoidExactForLinear) {
    BrownianPath p{4, 2.0, {0.0, 1.0, 2.0, 3.0, 4.0}, PathKind::free};
    EXPECT_DOUBLE_EQ(trapezoid(p, [](double b, double) { return b; }), 4.0);
    EXPECT_DOUBLE_EQ(trapezoid(p, [](double, double x) { return x; }), 2.0);
}

TEST(Paths, BridgeMidpointVariance) {
    auto [var, se] = bridge_midpoint_variance(2.0, small());
    EXPECT_LT(std::fabs(var - 0.5), 3.0 * se);
}

TEST(Streams, DistinctPerChunk) {
    auto a = chunk_rng(42, 0), b = chunk_rng(42, 1), c = chunk_rng(43, 0);
    const auto x = a(), y = b(), z = c();
    EXPECT_NE(x, y);
    EXPECT_NE(x, z);
}

TEST(Periodic, Reproducible) {
    auto a = mc_c1_periodic(1.0, small()), b = mc_c1_periodic(1.0, small());
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stderr_, b.stderr_);
    EXPECT_EQ(a.n_samples, 10000u);
    EXPECT_EQ(a.seed, 42u);
    EXPECT_NE(mc_c1_periodic(1.0, small(43)).mean, a.mean);
}

TEST(Periodic, ParallelMatchesSequential) {
    auto o = small();
    auto a = mc_c1_periodic(1.0, o);
    o.parallel = true;
    auto b = mc_c1_periodic(1.0, o);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(Periodic, NearExactValue) {
    auto e = mc_c1_periodic(1.0, small());
    EXPECT_LT(std::fabs(e.mean + 13.0 / 24.0), 3.0 * e.stderr_);
}

TEST(Periodic, SmallLSanity) {
    const double L = 0.05;
    auto e = mc_c1_periodic(L, small());
    EXPECT_NEAR(e.mean / (-0.5 / L), 1.0, 0.05);
}

TEST(OpenLine, ExchangeSymmetry) {
    auto a = mc_c1_open_line(0.3, 1.0, small()), b = mc_c1_open_line(0.7, 1.0, small(99));
    EXPECT_LT(std::fabs(a.mean - b.mean), 3.0 * std::hypot(a.stderr_, b.stderr_));
    EXPECT_GT(a.denom_mean, 0.0);
    EXPECT_GT(a.denom_stderr, 0.0);
}

TEST(OpenLine, ParallelMatchesSequential) {
    auto o = small();
    o.n_samples = 3000;
    auto a = mc_c1_open_line(0.5, 1.0, o);
    o.parallel = true;
    auto b = mc_c1_open_line(0.5, 1.0, o);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.denom_mean, b.denom_mean);
}

TEST(Options, Rejected) {
    MCOptions o = small();
    o.n_samples = 1;
    EXPECT_THROW(mc_c1_periodic(1.0, o), domain_error);
    EXPECT_THROW(mc_c1_periodic(-1.0, small()), domain_error);
}
