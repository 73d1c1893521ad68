#include <gtest/gtest.h>

#include <cmath>

#include <kpzi/cumulants.hpp>
#include <kpzi/fixedpoint.hpp>
#include <kpzi/series.hpp>

using namespace kpzi;

namespace {

struct Setup {
    BoundaryParams p{1.0, 1.0, 1.0};
    ModelWeights mw = build_weights(p, 400);
    KernelMatrix kk = build_kk(mw.grid);
    double zm = zeta_max(mw, kk);
};

const Setup& setup() {
    static const Setup s;
    return s;
}

}  // namespace

TEST(Solve, ZeroZetaIsZero) {
    const auto& S = setup();
    auto fp = solve_U(S.mw, S.kk, 0.0);
    for (double u : fp.U.values) EXPECT_EQ(u, 0.0);
}

TEST(Solve, SmallZetaSeriesRemainder) {
    const auto& S = setup();
    auto Un = compute_U_coeffs(S.mw, S.kk, 3);
    auto err = [&](double z) {
        auto fp = solve_U(S.mw, S.kk, z);
        double e = 0.0;
        for (std::size_t i = 0; i < Un[0].size(); ++i)
            e = std::max(e, std::fabs(fp.U.values[i] - (z * Un[0][i] + z * z * Un[1][i] + z * z * z * Un[2][i])));
        return e;
    };
    const double a = err(0.004), b = err(0.002);
    EXPECT_GT(a / b, 15.0);
}

TEST(Solve, ResidualBelowTenTol) {
    const auto& S = setup();
    for (double z : {-0.05, 0.01, 0.5 * S.zm, 0.98 * S.zm}) {
        auto fp = solve_U(S.mw, S.kk, z);
        EXPECT_TRUE(fp.converged);
        EXPECT_LT(fp.residual, 1e-11);
    }
}

TEST(Solve, BoundaryContract) {
    const auto& S = setup();
    // the threshold sits near 1/(2 max Psi)
    EXPECT_NEAR(S.zm, 0.0968842, 2e-4);
    EXPECT_TRUE(solve_U(S.mw, S.kk, S.zm).converged);
    EXPECT_THROW(solve_U(S.mw, S.kk, 1.01 * S.zm), domain_error);
}

TEST(Solve, WarmStartSameAnswer) {
    const auto& S = setup();
    auto a = solve_U(S.mw, S.kk, 0.6 * S.zm);
    auto b = solve_U(S.mw, S.kk, 0.65 * S.zm);
    auto c = solve_U(S.mw, S.kk, 0.65 * S.zm, {}, &a.U.values);
    for (std::size_t i = 0; i < b.U.values.size(); ++i) EXPECT_NEAR(b.U.values[i], c.U.values[i], 1e-11);
}

TEST(Solve, NonConvergenceReported) {
    const auto& S = setup();
    SolveOptions o;
    o.max_iter = 2;
    EXPECT_THROW(solve_U(S.mw, S.kk, 0.9 * S.zm, o), convergence_error);
}

TEST(Curve, NegativeZetaGivesNegativeS) {
    const auto& S = setup();
    auto c = curve_point(S.mw, S.kk, -0.03);
    EXPECT_LT(c.s, 0.0);
}

TEST(Curve, EnergyBoundForPositiveZeta) {
    const auto& S = setup();
    auto c = trace_curve_window(S.mw, S.kk, 12);
    for (const auto& p : c.points) {
        EXPECT_TRUE(p.converged);
        EXPECT_LE(p.E + p.s / 24.0, 0.0);
    }
}

TEST(Curve, ChordSlopeIsFirstCumulant) {
    const auto& S = setup();
    auto c = curve_point(S.mw, S.kk, 1e-7);
    EXPECT_NEAR(c.E / c.s, c1_closed(S.p), 1e-6);
}

TEST(Curve, ThreePointCurvatureIsSecondCumulant) {
    const auto& S = setup();
    auto m = curve_point(S.mw, S.kk, -1e-3), p = curve_point(S.mw, S.kk, 1e-3);
    const double d2 = 2.0 * (p.E / p.s - m.E / m.s) / (p.s - m.s);
    EXPECT_NEAR(d2, c2_closed(S.p), 1e-4);
}

TEST(Curve, TangentMatchesDifferences) {
    const auto& S = setup();
    const double z = 0.5 * S.zm, h = 1e-5 * S.zm;
    auto a = curve_point(S.mw, S.kk, z - h), b = curve_point(S.mw, S.kk, z), c = curve_point(S.mw, S.kk, z + h);
    EXPECT_NEAR((c.s - a.s) / (2 * h), b.ds, 1e-6 * b.ds);
    EXPECT_NEAR((c.E - a.E) / (2 * h), b.dE, 1e-6 * std::fabs(b.dE));
}

TEST(Curve, SmoothOnGrid) {
    const auto& S = setup();
    auto c = trace_curve_window(S.mw, S.kk, 30);
    for (std::size_t i = 1; i + 1 < c.points.size(); ++i) {
        const auto &a = c.points[i - 1], &b = c.points[i], &d = c.points[i + 1];
        EXPECT_GT(d.s, b.s);
        // secant slope bracketed by the tangents (s is convex in zeta)
        const double sec = (d.s - a.s) / (d.zeta - a.zeta);
        EXPECT_GE(sec, a.ds);
        EXPECT_LE(sec, d.ds);
    }
}

TEST(Legendre, OriginAndConvexity) {
    const auto& S = setup();
    auto c = trace_curve_window(S.mw, S.kk, 25);
    auto r = legendre(c);
    ASSERT_FALSE(r.samples.empty());
    EXPECT_EQ(r.samples.front().s, 0.0);
    EXPECT_EQ(r.samples.front().Phi, 0.0);
    EXPECT_NEAR(r.samples.front().H, c1_closed(S.p) + 1.0 / 24.0, 1e-6);
    EXPECT_TRUE(is_convex(r));
    for (const auto& x : r.samples) EXPECT_GE(x.Phi, -1e-14);
}

TEST(Legendre, RoundTrip) {
    const auto& S = setup();
    auto c = trace_curve_window(S.mw, S.kk, 400);
    auto r = legendre(c);
    for (std::size_t i = 1; i + 1 < c.points.size(); i += 37)
        EXPECT_NEAR(legendre_inverse(r, c.points[i].s), c.points[i].E, 1e-6);
}

TEST(Legendre, RejectsNonMonotone) {
    ParametricCurve c;
    c.points = {{0.0, 0.0, 0.0, 1.0, -1.0, true, 0}, {0.1, 0.2, -0.1, 1.0, -1.0, true, 1},
                {0.2, 0.1, -0.1, 1.0, -1.0, true, 1}};
    EXPECT_THROW(legendre(c), numerical_error);
}

TEST(Legendre, QuadraticNearMinimum) {
    const auto& S = setup();
    const double c1 = c1_closed(S.p), c2 = c2_closed(S.p);
    const double dH = 0.1 * std::sqrt(c2);
    auto pt = point_at_H(S.mw, S.kk, c1 + 1.0 / 24.0 + dH, 0.0, 0.98 * S.zm);
    const double H = pt.dE / pt.ds + 1.0 / 24.0;
    const double Phi = pt.s * H - pt.E - pt.s / 24.0;
    const double q = (H - c1 - 1.0 / 24.0) * (H - c1 - 1.0 / 24.0) / (2.0 * c2);
    EXPECT_NEAR(Phi / q, 1.0, 0.1);
}
