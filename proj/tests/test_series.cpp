#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <kpzi/series.hpp>

using namespace kpzi;

namespace {

std::vector<double> random_s(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.2, 2.0);
    return {U(rng), U(rng) - 1.0, U(rng) - 1.0, U(rng) - 1.0};
}

}  // namespace

TEST(DMatrix, MatchesExplicitFourByFour) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        auto s = random_s(rng);
        const double s1 = s[0], s2 = s[1], s3 = s[2], s4 = s[3];
        auto d = d_matrix(s, 4);
        const double ref[4][4] = {{s1, 0, 0, 0},
                                  {s2, s1 * s1, 0, 0},
                                  {s3, 2 * s1 * s2, s1 * s1 * s1, 0},
                                  {s4, s2 * s2 + 2 * s1 * s3, 3 * s1 * s1 * s2, s1 * s1 * s1 * s1}};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) EXPECT_NEAR(d[i + 1][j + 1], ref[i][j], 1e-14);
    }
}

TEST(DMatrix, InverseMatchesClosedForm) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        auto s = random_s(rng);
        const double s1 = s[0], s2 = s[1], s3 = s[2], s4 = s[3];
        auto inv = d_inverse(s, 4);
        const double ref[4][4] = {
            {1 / s1, 0, 0, 0},
            {-s2 / std::pow(s1, 3), 1 / (s1 * s1), 0, 0},
            {(2 * s2 * s2 - s1 * s3) / std::pow(s1, 5), -2 * s2 / std::pow(s1, 4), 1 / std::pow(s1, 3), 0},
            {-(5 * s2 * s2 * s2 - 5 * s1 * s3 * s2 + s1 * s1 * s4) / std::pow(s1, 7),
             (5 * s2 * s2 - 2 * s1 * s3) / std::pow(s1, 6), -3 * s2 / std::pow(s1, 5), 1 / std::pow(s1, 4)}};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                EXPECT_NEAR(inv[i + 1][j + 1], ref[i][j], 1e-11 * std::max(1.0, std::fabs(ref[i][j])));
    }
}

TEST(Inversion, MatchesExplicitCumulants) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        CoeffSeries cs;
        cs.K = 4;
        cs.s = random_s(rng);
        cs.eps = {U(rng), U(rng), U(rng), U(rng)};
        const double s1 = cs.s[0], s2 = cs.s[1], s3 = cs.s[2], s4 = cs.s[3];
        const double e1 = cs.eps[0], e2 = cs.eps[1], e3 = cs.eps[2], e4 = cs.eps[3];
        auto r = invert_to_cumulants(cs);
        const double c1 = -1.0 / 24.0 + e1 / s1;
        const double c2 = 2 * (e2 * s1 - e1 * s2) / std::pow(s1, 3);
        const double c3 = 6 * (e3 * s1 * s1 - 2 * e2 * s2 * s1 + e1 * (2 * s2 * s2 - s1 * s3)) / std::pow(s1, 5);
        const double c4 = 24 *
                          (e4 * s1 * s1 * s1 - 3 * e3 * s2 * s1 * s1 + e2 * s1 * (5 * s2 * s2 - 2 * s1 * s3) -
                           e1 * (5 * s2 * s2 * s2 - 5 * s1 * s3 * s2 + s1 * s1 * s4)) /
                          std::pow(s1, 7);
        const double ref[4] = {c1, c2, c3, c4};
        for (int k = 0; k < 4; ++k) EXPECT_NEAR(r.c[k], ref[k], 1e-9 * std::max(1.0, std::fabs(ref[k])));
    }
}

TEST(Inversion, ShiftFlag) {
    CoeffSeries cs{1, {2.0}, {1.0}, false};
    EXPECT_DOUBLE_EQ(invert_to_cumulants(cs).c[0], 0.5);
    cs.include_shift = true;
    EXPECT_DOUBLE_EQ(invert_to_cumulants(cs).c[0], 0.5 - 1.0 / 24.0);
    cs.s[0] = 0.0;
    EXPECT_THROW(invert_to_cumulants(cs), numerical_error);
}

TEST(UCoeffs, RoutesAgree) {
    auto mw = build_weights({0.7, 1.3, 1.0}, 200);
    auto kk = build_kk(mw.grid);
    auto a = compute_U_coeffs(mw, kk, 6, URoute::exp_series);
    auto b = compute_U_coeffs(mw, kk, 6, URoute::multinomial);
    for (int n = 0; n < 6; ++n)
        for (std::size_t i = 0; i < a[n].size(); ++i)
            EXPECT_NEAR(a[n][i], b[n][i], 1e-12 * std::max(1.0, std::fabs(a[n][i])));
}

TEST(UCoeffs, LowOrdersExplicit) {
    // U_1 = Psi, U_2 = Psi^2 + Psi (kk Psi)
    auto mw = build_weights({1.0, 1.0, 1.0}, 200);
    auto kk = build_kk(mw.grid);
    auto U = compute_U_coeffs(mw, kk, 2);
    std::vector<double> kp;
    kk_apply_raw(kk, mw.W, mw.psi, kp);
    for (std::size_t i = 0; i < U[0].size(); ++i) {
        EXPECT_EQ(U[0][i], mw.psi[i]);
        EXPECT_NEAR(U[1][i], mw.psi[i] * mw.psi[i] + mw.psi[i] * kp[i], 1e-13 * std::max(1.0, std::fabs(U[1][i])));
    }
}

TEST(UCoeffs, RejectsShiftedKernel) {
    auto mw = build_weights({1.0, 1.0, 1.0}, 64);
    auto K = build_K_shifted(mw.grid, make_grid({1, 1, 1}, 64, 0.25));
    EXPECT_THROW(compute_U_coeffs(mw, K, 3), domain_error);
}

TEST(SeriesCumulants, FrozenPrototypeValues) {
    // independent numpy prototype (plain Gauss-Legendre grid)
    struct R { BoundaryParams p; double c1, c2, c3; };
    for (auto r : {R{{1, 1, 1}, -1.0321887313531635, 1.1315986995475806, 0.02831714707525061},
                   R{{0.7, 1.3, 1}, -1.0060822433309753, 1.1415286236854214, 0.03552233827149357},
                   R{{0.5, 2, 0.5}, -2.291666666666668, 2.189049550032538, 0.03816176753884486}}) {
        auto c = series_cumulants(r.p, 3).c;
        EXPECT_NEAR(c[0], r.c1, 1e-10);
        EXPECT_NEAR(c[1], r.c2, 1e-9);
        EXPECT_NEAR(c[2], r.c3, 1e-9);
    }
}

TEST(SeriesCumulants, GridRefinement) {
    auto a = series_cumulants({1, 1, 1}, 4, 400), b = series_cumulants({1, 1, 1}, 4, 800);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(a.c[k], b.c[k], 1e-9);
}

TEST(SeriesCumulants, ExchangeSymmetry) {
    auto a = series_cumulants({0.4, 1.9, 0.6}, 4), b = series_cumulants({1.9, 0.4, 0.6}, 4);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(a.c[k], b.c[k], 1e-10 * std::max(1.0, std::fabs(a.c[k])));
}

TEST(SeriesCumulants, HalfLineGaussianFirstCumulant) {
    // Psi = 4 pi e^{L w^2}: <w^2> = -1/(2L)
    const double L = 1.7;
    EXPECT_NEAR(series_cumulants({0.0, 0.5, L}, 1).c[0], -1.0 / 24.0 - 1.0 / (4.0 * L), 1e-9);
}
