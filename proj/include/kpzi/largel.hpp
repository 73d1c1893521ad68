#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/differentiation/autodiff.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include "cumulants.hpp"
#include "error.hpp"
#include "fixedpoint.hpp"
#include "parallel.hpp"
#include "series.hpp"
#include "specfun.hpp"

namespace kpzi {

struct ScaledParams {
    double u_t = 1.0;
    double v_t = 1.0;
};

struct ScaledSeries {
    int K = 0;
    std::vector<double> phi_k, psi_k, c_t;
};

/// phi(y) = 4 y^2 e^{-y^2} / ((u~^2 + y^2)(v~^2 + y^2))
inline double phi_scaled(const ScaledParams& sp, double y) {
    const double y2 = y * y;
    const double a = sp.u_t * sp.u_t, b = sp.v_t * sp.v_t;
    // y^2/(b+y^2) = 1 when v~ = 0, also at y = 0
    const double r = b == 0.0 ? 1.0 : y2 / (b + y2);
    return 4.0 * r * std::exp(-y2) / (a + y2);
}

namespace detail {

inline void check_scaled(const ScaledParams& sp) {
    require(sp.u_t >= 0.0 && sp.v_t >= 0.0, "scaled parameters must be >= 0");
    require(std::max(sp.u_t, sp.v_t) > 0.0, "u~ = v~ = 0 is only reached as a limit");
}

// int_0^inf f with breakpoints around u~, v~ (where phi varies fastest).
template <class F>
double half_line_integral(const ScaledParams& sp, F&& f) {
    std::vector<double> br{0.0};
    for (double q : {sp.u_t, sp.v_t})
        for (double c : {0.25 * q, q, 4.0 * q})
            if (c > 0.0 && c < 4.0) br.push_back(c);
    br.push_back(4.0);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) s += GK::integrate(f, br[i], br[i + 1], 10, 1e-12);
    boost::math::quadrature::exp_sinh<double> tail;
    s += tail.integrate(f, br.back(), std::numeric_limits<double>::infinity(), 1e-12);
    return s;
}

}  // namespace detail

/// phi_k = int dy/(2 pi) phi^k, psi_k = int dy/(2 pi) y^2 phi^k over R.
inline std::pair<double, double> phi_moment(const ScaledParams& sp, int k) {
    require(k >= 1, "k must be >= 1");
    detail::check_scaled(sp);
    const double p = detail::half_line_integral(sp, [&](double y) { return std::pow(phi_scaled(sp, y), k); });
    const double q =
        detail::half_line_integral(sp, [&](double y) { return y * y * std::pow(phi_scaled(sp, y), k); });
    return {p / std::numbers::pi, q / std::numbers::pi};
}

/// u~ = v~ closed forms through Tricomi U.
inline std::pair<double, double> phi_moment_equal(double ut, int k) {
    const double x = k * ut * ut, f = std::pow(4.0, k) / (2.0 * std::numbers::pi);
    return {f * std::tgamma(k + 0.5) * std::pow(ut, 1.0 - 2 * k) * tricomi_u(k + 0.5, 1.5 - k, x),
            f * std::tgamma(k + 1.5) * std::pow(ut, 3.0 - 2 * k) * tricomi_u(k + 1.5, 2.5 - k, x)};
}

/// v~ = 0 closed forms.
inline std::pair<double, double> phi_moment_v0(double ut, int k) {
    const double x = k * ut * ut, f = std::pow(4.0, k) / std::sqrt(std::numbers::pi);
    return {f / 2.0 * std::pow(ut, 1.0 - 2 * k) * tricomi_u(0.5, 1.5 - k, x),
            f / 4.0 * std::pow(ut, 3.0 - 2 * k) * tricomi_u(1.5, 2.5 - k, x)};
}

/// k = 1, u~ = v~, in erfc form.
inline std::pair<double, double> phi_moment_equal_k1(double ut) {
    const double a = ut * ut, e = std::exp(a) * std::erfc(ut), sp = std::sqrt(std::numbers::pi);
    return {e * (2.0 * a + 1.0) / ut - 2.0 / sp, 2.0 * (a + 1.0) / sp - e * ut * (2.0 * a + 3.0)};
}

/// c~_1 on v~ = 0 through exponential integrals.
inline double c1_scaled_v0(double ut) {
    const double a = ut * ut;
    return -exp_integral_E(1.5, a) / (4.0 * exp_integral_E(0.5, a));
}

/// phi_k, psi_k from the mixed derivatives of t^{1/2} (f(at) - f(bt))/(b - a),
/// f(a) = e^a erfc(sqrt a)/(2 sqrt a): (-d_t)^k for phi_k, (-d_t)^{k+1} for psi_k.
/// Needs u~ != v~, both positive; k = 1, 2.
inline std::pair<double, double> phi_moment_derivative(const ScaledParams& sp, int k) {
    using namespace boost::math::differentiation;
    require(k == 1 || k == 2, "derivative route implemented for k <= 2");
    require(sp.u_t > 0.0 && sp.v_t > 0.0 && sp.u_t != sp.v_t, "derivative route needs distinct u~, v~ > 0");
    const double a0 = sp.u_t * sp.u_t, b0 = sp.v_t * sp.v_t;
    auto f = [](auto x) { return exp(x) * erfc(sqrt(x)) / (2.0 * sqrt(x)); };
    auto eval = [&](auto const& vars, int nt) {
        auto const& t = std::get<0>(vars);
        auto const& a = std::get<1>(vars);
        auto const& b = std::get<2>(vars);
        auto F = sqrt(t) * (f(a * t) - f(b * t)) / (b - a);
        return F.derivative(nt, k - 1, k - 1);
    };
    const double g = std::pow(std::tgamma(double(k)), 2), c = std::pow(4.0, k) / g;
    if (k == 1) {
        auto v = make_ftuple<double, 2, 0, 0>(1.0, a0, b0);
        return {-c * eval(v, 1), c * eval(v, 2)};
    }
    auto v = make_ftuple<double, 3, 1, 1>(2.0, a0, b0);
    return {c * eval(v, 2), -c * eval(v, 3)};
}

/// c~_1..c~_K by series inversion with s_k = phi_k/(2k), eps_k = -psi_k/(4k), no shift.
inline ScaledSeries scaled_cumulants(const ScaledParams& sp, int K) {
    require(K >= 1 && K <= 8, "K must be in 1..8");
    ScaledSeries r;
    r.K = K;
    r.phi_k.resize(K);
    r.psi_k.resize(K);
    parallel_for(std::size_t(K), [&](std::size_t i) {
        auto [p, q] = phi_moment(sp, int(i) + 1);
        r.phi_k[i] = p;
        r.psi_k[i] = q;
    });
    CoeffSeries cs;
    cs.K = K;
    cs.include_shift = false;
    for (int k = 1; k <= K; ++k) {
        cs.s.push_back(r.phi_k[k - 1] / (2.0 * k));
        cs.eps.push_back(-r.psi_k[k - 1] / (4.0 * k));
    }
    r.c_t = invert_to_cumulants(cs).c;
    return r;
}

/// Closed forms in phi_k, psi_k for c~_1..c~_3.
inline std::vector<double> scaled_closed_forms(const ScaledSeries& s) {
    require(s.K >= 3, "need three moments");
    const double p1 = s.phi_k[0], p2 = s.phi_k[1], p3 = s.phi_k[2];
    const double q1 = s.psi_k[0], q2 = s.psi_k[1], q3 = s.psi_k[2];
    return {-q1 / (2.0 * p1), (q1 * p2 - q2 * p1) / (p1 * p1 * p1),
            2.0 / std::pow(p1, 5) * (-2.0 * q3 * p1 * p1 - 3.0 * q1 * p2 * p2 + 3.0 * q2 * p2 * p1 + 2.0 * q1 * p3 * p1)};
}

enum class MinimumMode { equal, v_zero };

struct Minimum {
    double u_star = 0.0;
    double value = 0.0;
    bool interior = false;
};

inline double c2_scaled(const ScaledParams& sp) {
    auto a = phi_moment(sp, 1), b = phi_moment(sp, 2);
    return (a.second * b.first - b.second * a.first) / std::pow(a.first, 3);
}

/// Minimum of c~_2 over u~ in [0.01, 10]; Brent's golden-section/parabolic search.
inline Minimum find_c2_minimum(MinimumMode mode) {
    auto f = [mode](double u) { return c2_scaled({u, mode == MinimumMode::equal ? u : 0.0}); };
    const double lo = 0.01, hi = 10.0;
    // 1e-4 absolute in u~ near u* ~ 1 corresponds to ~14 bits
    auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, 20);
    Minimum m{x, fx, false};
    const double d = 1e-2;
    m.interior = x - d > lo && x + d < hi && f(x - d) > fx && f(x + d) > fx;
    return m;
}

// --- scaled parametric curve ------------------------------------------------

inline double phi_max(const ScaledParams& sp) {
    detail::check_scaled(sp);
    double best = 0.0, yb = 0.0;
    for (int i = 1; i <= 4000; ++i) {
        const double y = 6.0 * i / 4000.0;
        const double v = phi_scaled(sp, y);
        if (v > best) { best = v; yb = y; }
    }
    const double h = 6.0 / 4000.0;
    auto [y, neg] = boost::math::tools::brent_find_minima(
        [&](double t) { return -phi_scaled(sp, t); }, std::max(0.0, yb - h), yb + h, 50);
    return std::max(best, -neg);
}

/// s~ = -(1/2) int dy/2pi log(1 - z phi), E~ = (1/4) int dy/2pi y^2 log(1 - z phi), with z-derivatives.
inline CurvePoint scaled_curve_point(const ScaledParams& sp, double zt, double pmax) {
    if (!(zt * pmax < 1.0)) throw domain_error("scaled curve: zeta above threshold");
    auto L = [&](double y) { return std::log1p(-zt * phi_scaled(sp, y)); };
    auto D = [&](double y) {
        const double p = phi_scaled(sp, y);
        return p / (1.0 - zt * p);
    };
    const double ip = 1.0 / std::numbers::pi;  // int_R dy/2pi = (1/pi) int_0^inf
    CurvePoint c;
    c.zeta = zt;
    c.s = -0.5 * ip * detail::half_line_integral(sp, L);
    c.E = 0.25 * ip * detail::half_line_integral(sp, [&](double y) { return y * y * L(y); });
    c.ds = 0.5 * ip * detail::half_line_integral(sp, D);
    c.dE = -0.25 * ip * detail::half_line_integral(sp, [&](double y) { return y * y * D(y); });
    c.converged = true;
    return c;
}

inline ParametricCurve scaled_curve(const ScaledParams& sp, const std::vector<double>& zetas) {
    const double pm = phi_max(sp);
    ParametricCurve c;
    c.zeta_max = 1.0 / pm;
    c.points.resize(zetas.size());
    parallel_for(zetas.size(), [&](std::size_t i) { c.points[i] = scaled_curve_point(sp, zetas[i], pm); });
    return c;
}

inline RateFunction scaled_rate(const ParametricCurve& c) { return legendre(c, 0.0); }

/// (1/(4 sqrt pi)) sum_k z^k (2k)! / (k! k^{3/2+k})
inline double maximal_current_series(double zh) {
    double s = 0.0;
    for (int k = 1; k < 200; ++k) {
        const double lt = k * std::log(zh) + std::lgamma(2.0 * k + 1) - std::lgamma(k + 1.0) -
                          (1.5 + k) * std::log(double(k));
        const double t = std::exp(lt);
        s += t;
        if (t < 1e-18) break;
    }
    return s / (4.0 * std::sqrt(std::numbers::pi));
}

struct FiniteLReport {
    double L = 0.0;
    double c1_scaled_est = 0.0;  // L (c_1 + 1/24)
    double c2_scaled_est = 0.0;  // sqrt(L) c_2
    double c1_t = 0.0, c2_t = 0.0;
    double dev1 = 0.0, dev2 = 0.0;  // relative deviations
};

inline FiniteLReport finite_L_consistency(const ScaledParams& sp, double L, std::size_t n = default_nodes) {
    require(L > 0.0, "L must be positive");
    const double r = std::sqrt(L);
    const BoundaryParams p{sp.u_t / r, sp.v_t / r, L};
    auto mw = build_weights(p, n);
    auto kk = build_kk(mw.grid);
    auto ss = scaled_cumulants(sp, 2);
    FiniteLReport rep;
    rep.L = L;
    rep.c1_scaled_est = L * (c1_from_weights(mw) + 1.0 / 24.0);
    rep.c2_scaled_est = r * c2_from_weights(mw, kk);
    rep.c1_t = ss.c_t[0];
    rep.c2_t = ss.c_t[1];
    rep.dev1 = std::fabs(rep.c1_scaled_est - rep.c1_t) / std::fabs(rep.c1_t);
    rep.dev2 = std::fabs(rep.c2_scaled_est - rep.c2_t) / std::fabs(rep.c2_t);
    return rep;
}

}  // namespace kpzi
