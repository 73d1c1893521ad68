#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "error.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "series.hpp"
#include "specfun.hpp"

namespace kpzi {

inline constexpr std::size_t default_nodes = 400;

namespace detail {

inline void require_direct(const BoundaryParams& p) {
    require(p.L > 0.0, "L must be positive");
    require(p.u >= 0.0 && p.v >= 0.0 && p.u + p.v > 0.0,
            "closed forms need u, v >= 0 (not both zero); use the continuation");
}

// Weights at a different L on the same nodes.
inline ModelWeights reweight(const ModelWeights& mw, double L) {
    BoundaryParams q = mw.params;
    q.L = L;
    return build_weights(q, mw.grid);
}

// g_i = sum_j nu_j kk_ij + Psi_i / Z1
inline std::vector<double> kbar_row_means(const ModelWeights& mw, const KernelMatrix& kk) {
    const std::size_t n = mw.psi.size();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = &kk.entries[i * n];
        for (std::size_t j = 0; j < n; ++j) s += row[j] * mw.nu[j];
        g[i] = s + mw.psi[i] / mw.Z1;
    }
    return g;
}

}  // namespace detail

/// <kbar> = <kk> + (1/Z1^2) int Psi^2
inline double kbar_mean(const ModelWeights& mw, const KernelMatrix& kk) {
    auto g = detail::kbar_row_means(mw, kk);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += mw.nu[i] * g[i];
    return s;
}

inline double c1_from_weights(const ModelWeights& mw) { return -1.0 / 24.0 + 0.5 * mw.w2_mean; }

inline double c1_closed(const BoundaryParams& p, std::size_t n = default_nodes) {
    detail::require_direct(p);
    return c1_from_weights(build_weights(p, n));
}

/// -1/24 + (1/2) d/dL log Z, central difference on fixed nodes.
inline double c1_dL(const BoundaryParams& p, std::size_t n = default_nodes, double rel_h = 1e-4) {
    detail::require_direct(p);
    auto mw = build_weights(p, n);
    const double h = rel_h * p.L;
    const double zp = detail::reweight(mw, p.L + h).Z1, zm = detail::reweight(mw, p.L - h).Z1;
    return -1.0 / 24.0 + 0.5 * (std::log(zp) - std::log(zm)) / (2.0 * h);
}

/// kk-route: sum nu_i nu_j kk_ij (x_i - m) + sum W_i (Psi_i/Z1)^2 (x_i - m).
inline double c2_from_weights(const ModelWeights& mw, const KernelMatrix& kk) {
    const std::size_t n = mw.psi.size();
    const double m = mw.w2_mean;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        const double* row = &kk.entries[i * n];
        for (std::size_t j = 0; j < n; ++j) r += row[j] * mw.nu[j];
        const double rho = mw.psi[i] / mw.Z1;
        s += (mw.nu[i] * r + mw.W[i] * rho * rho) * (mw.x[i] - m);
    }
    return s;
}

inline double c2_closed(const BoundaryParams& p, std::size_t n = default_nodes) {
    detail::require_direct(p);
    auto mw = build_weights(p, n);
    return c2_from_weights(mw, build_kk(mw.grid));
}

/// (1/2) d/dL <kbar> by central difference on fixed nodes.
inline double c2_dL(const BoundaryParams& p, std::size_t n = default_nodes, double rel_h = 1e-4) {
    detail::require_direct(p);
    auto mw = build_weights(p, n);
    auto kk = build_kk(mw.grid);
    const double h = rel_h * p.L;
    const double kp = kbar_mean(detail::reweight(mw, p.L + h), kk);
    const double km = kbar_mean(detail::reweight(mw, p.L - h), kk);
    return 0.5 * (kp - km) / (2.0 * h);
}

/// (3/2)<kbar_12 kbar_13> - (3/2)<kbar>^2 - (1/6)<delta delta>
inline double c3_bracket_value(const ModelWeights& mw, const KernelMatrix& kk) {
    auto g = detail::kbar_row_means(mw, kk);
    double kk2 = 0.0, k1 = 0.0, dd = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        kk2 += mw.nu[i] * g[i] * g[i];
        k1 += mw.nu[i] * g[i];
        const double rho = mw.psi[i] / mw.Z1;
        dd += mw.W[i] * rho * rho * rho;
    }
    return 1.5 * kk2 - 1.5 * k1 * k1 - dd / 6.0;
}

inline double c3_closed(const BoundaryParams& p, std::size_t n = default_nodes) {
    detail::require_direct(p);
    auto mw = build_weights(p, n);
    auto kk = build_kk(mw.grid);
    const double h = 1e-4 * p.L;
    const double bp = c3_bracket_value(detail::reweight(mw, p.L + h), kk);
    const double bm = c3_bracket_value(detail::reweight(mw, p.L - h), kk);
    return (bp - bm) / (2.0 * h);
}

struct KernelKResult {
    double c2 = 0.0;
    double imag = 0.0;
    std::vector<double> delta_odd_residual;  // Delta(iy) + Delta(-iy) per node pair
};

inline constexpr double kernel_K_shift = 0.25;

/// 2 int nu(dw1) int_{delta + iR} nu(dw2) K(w1,w2) (w1^2 - <w^2>).
inline KernelKResult c2_kernelK_full(const BoundaryParams& p, std::size_t n = default_nodes,
                                     double delta = kernel_K_shift) {
    detail::require_direct(p);
    if (!(std::min(p.u, p.v) > delta))
        throw domain_error("kernel-K route needs min(u, v) > shift");
    GridOptions opt;
    opt.max_panel = 0.5 * delta;
    auto g1 = make_grid(p, n, 0.0, opt);
    auto g2 = make_grid(p, n, delta, opt);
    auto mw = build_weights(p, g1);
    const std::size_t n2 = g2->count();
    std::vector<cplx> nu2(n2);
    for (std::size_t j = 0; j < n2; ++j)
        nu2[j] = g2->weights[j] / (2.0 * std::numbers::pi) * psi_weight(p, g2->w(j)) / mw.Z1;

    const std::size_t n1 = g1->count();
    std::vector<cplx> row_sum(n1), inv_sum(n1);
    parallel_for(n1, [&](std::size_t i) {
        cplx s = 0.0, t = 0.0;
        const cplx w1 = g1->w(i);
        for (std::size_t j = 0; j < n2; ++j) {
            s += nu2[j] * kernel_K(w1, g2->w(j));
            t += nu2[j] * 2.0 / (w1 + g2->w(j));
        }
        row_sum[i] = s;
        inv_sum[i] = t;
    });
    cplx total = 0.0;
    for (std::size_t i = 0; i < n1; ++i) total += mw.nu[i] * row_sum[i] * (mw.x[i] - mw.w2_mean);
    total *= 2.0;
    KernelKResult r;
    r.c2 = total.real();
    r.imag = total.imag();
    // Delta(w1) = int nu(dw2) 2/(w1+w2) - Psi(w1)/Z1 is odd in w1
    for (std::size_t i = 0; i < n1 / 2; ++i) {
        const std::size_t k = n1 - 1 - i;
        const cplx di = inv_sum[i] - mw.psi[i] / mw.Z1;
        const cplx dk = inv_sum[k] - mw.psi[k] / mw.Z1;
        r.delta_odd_residual.push_back(std::abs(di + dk));
    }
    return r;
}

inline double c2_kernelK(const BoundaryParams& p, std::size_t n = default_nodes) {
    auto r = c2_kernelK_full(p, n);
    if (std::fabs(r.imag) > 1e-9) throw numerical_error("kernel-K route: imaginary part too large");
    return r.c2;
}

// ---------------------------------------------------------------------------
// Continuation to u <= 0 or v <= 0

struct ResidueTerm {
    double location = 0.0;  // pole p + i that crossed the contour
    double value = 0.0;     // contribution to Ztilde
    double dvalue = 0.0;    // contribution to d/dL Ztilde
    int index = 0;
};

namespace detail {

// Residues from poles p + i, i <= floor(-p); q is the other parameter.
// Gamma(2p+i)/(Gamma(2(p+i)) Gamma(-2(p+i))) = rgamma(-2(p+i)) / (2p+i)_i keeps half-integer p finite.
inline std::vector<ResidueTerm> residues(double p, double q, double L) {
    std::vector<ResidueTerm> out;
    if (p >= 0.0) return out;
    const int imax = int(std::floor(-p));
    for (int i = 0; i <= imax; ++i) {
        const double g_arg = q - p - i;
        if (g_arg <= 0.0 && std::fabs(g_arg - std::round(g_arg)) < 1e-12)
            throw pole_error("continuation: coinciding poles (double pole)");
        const double sign = i % 2 ? -1.0 : 1.0;
        const double pi_ = p + i;
        const double val = 2.0 * sign / std::tgamma(i + 1.0) * std::tgamma(g_arg) * rgamma(-2.0 * pi_) /
                           pochhammer(2.0 * p + i, i) * std::exp(L * pi_ * pi_) * pochhammer(p + q, i);
        out.push_back({pi_, val, val * pi_ * pi_, i});
    }
    return out;
}

inline bool near_negative_integer(double x) {
    return x < -0.5 && std::fabs(x - std::round(x)) < 1e-6;
}

}  // namespace detail

struct ZtildeResult {
    double Z = 0.0;
    double dZ = 0.0;
    double integral = 0.0;   // rgamma(u+v) int Psi
    double dintegral = 0.0;  // rgamma(u+v) int w^2 Psi
    std::vector<ResidueTerm> terms;
};

/// Ztilde and d/dL Ztilde: integral over iR plus residues of poles that crossed it.
inline ZtildeResult ztilde_continued(const BoundaryParams& p, std::size_t n = default_nodes) {
    require(p.L > 0.0, "L must be positive");
    require(!(p.u == 0.0 && p.v == 0.0), "u = v = 0 has no finite normalization");
    if (detail::near_negative_integer(p.u) || detail::near_negative_integer(p.v))
        throw domain_error("continuation: parameter at a negative integer");
    ZtildeResult r;
    const double rg = rgamma(p.u + p.v);
    if (rg != 0.0) {
        auto g = make_grid(p, n);
        double I = 0.0, dI = 0.0;
        for (std::size_t i = 0; i < g->count(); ++i) {
            const double y = g->nodes[i];
            const double ps = g->weights[i] * psi_line(p, y);
            I += ps;
            dI -= ps * y * y;
        }
        r.integral = rg * I / (2.0 * std::numbers::pi);
        r.dintegral = rg * dI / (2.0 * std::numbers::pi);
    }
    r.Z = r.integral;
    r.dZ = r.dintegral;
    for (auto&& t : detail::residues(p.u, p.v, p.L)) r.terms.push_back(t);
    for (auto&& t : detail::residues(p.v, p.u, p.L)) r.terms.push_back(t);
    for (const auto& t : r.terms) {
        r.Z += t.value;
        r.dZ += t.dvalue;
    }
    if (!std::isfinite(r.Z) || !std::isfinite(r.dZ) || r.Z == 0.0)
        throw numerical_error("continuation: Ztilde not finite");
    return r;
}

/// c_1 = -1/24 + (1/2) dZ/Z. At a negative-integer parameter the value is the
/// symmetric limit, Richardson-extrapolated from offsets eta and 2 eta.
inline double c1_continued(const BoundaryParams& p, std::size_t n = default_nodes) {
    auto at = [n](BoundaryParams q) {
        auto z = ztilde_continued(q, n);
        return -1.0 / 24.0 + 0.5 * z.dZ / z.Z;
    };
    const bool iu = detail::near_negative_integer(p.u), iv = detail::near_negative_integer(p.v);
    if (!iu && !iv) return at(p);
    const double eta = 1e-3;
    auto avg = [&](double e) {
        BoundaryParams a = p, b = p;
        if (iu) { a.u = std::round(p.u) + e; b.u = std::round(p.u) - e; }
        if (iv) { a.v = std::round(p.v) + e; b.v = std::round(p.v) - e; }
        return 0.5 * (at(a) + at(b));
    };
    return (4.0 * avg(eta) - avg(2.0 * eta)) / 3.0;
}

/// c_1 from whichever route applies.
inline double c1_any(const BoundaryParams& p, std::size_t n = default_nodes) {
    if (p.u >= 0.0 && p.v >= 0.0 && p.u + p.v > 0.0) return c1_closed(p, n);
    return c1_continued(p, n);
}

// ---------------------------------------------------------------------------
// u + v = 0 line and the origin

/// c_2(0,0,L) = int_R x coth(pi x) e^{-L x^2} dx
inline double c2_origin(double L) {
    require(L > 0.0, "L must be positive");
    auto f = [L](double x) {
        if (x == 0.0) return 1.0 / std::numbers::pi;
        return x / std::tanh(std::numbers::pi * x) * std::exp(-L * x * x);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return 2.0 * integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

/// c_2(u,-u,L) = |u| - (1/(2 e^{L u^2})) int Psi|_{v=-u} (w^2 - u^2), using
/// Psi (w^2 - u^2) = -Gamma(u+w)Gamma(u-w)Gamma(1-u+w)Gamma(1-u-w) e^{L w^2}/(Gamma(2w)Gamma(-2w)).
inline double c2_line_uv0(const BoundaryParams& p, std::size_t n = default_nodes) {
    require(p.L > 0.0, "L must be positive");
    require(p.u + p.v == 0.0, "c2_line_uv0 needs u + v = 0");
    const double u = p.u;
    if (u == 0.0) return c2_origin(p.L);  // the integrand's closed form at u = 0
    auto g = make_grid(p, n);
    double I = 0.0;
    for (std::size_t i = 0; i < g->count(); ++i) {
        const double y = g->nodes[i];
        const double lg = log_gamma_abs2_line(u, y) + log_gamma_abs2_line(1.0 - u, y) +
                          log_recip_gamma_pair_line(y) - p.L * y * y;
        I -= g->weights[i] * std::exp(lg);
    }
    I /= 2.0 * std::numbers::pi;
    return std::fabs(u) - 0.5 * std::exp(-p.L * u * u) * I;
}

/// Same integral on the grid, also at u = 0 (used to check the limit against c2_origin).
inline double c2_line_uv0_grid(double u, double L, std::size_t n = default_nodes) {
    BoundaryParams p{u, -u, L};
    auto g = make_grid(p, n);
    double I = 0.0;
    for (std::size_t i = 0; i < g->count(); ++i) {
        const double y = g->nodes[i];
        const double lg = log_gamma_abs2_line(u, y) + log_gamma_abs2_line(1.0 - u, y) +
                          log_recip_gamma_pair_line(y) - L * y * y;
        I -= g->weights[i] * std::exp(lg);
    }
    I /= 2.0 * std::numbers::pi;
    return std::fabs(u) - 0.5 * std::exp(-L * u * u) * I;
}

/// c_2 sweep u -> c_2(u, u, L); parallel over points, output in input order.
inline std::vector<double> c2_sweep_equal(const std::vector<double>& us, double L,
                                          std::size_t n = default_nodes) {
    std::vector<double> out(us.size());
    parallel_for(us.size(), [&](std::size_t i) { out[i] = c2_closed({us[i], us[i], L}, n); });
    return out;
}

}  // namespace kpzi
