#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace kpzi {

struct SolveOptions {
    double tol = 1e-12;
    int max_iter = 10000;
};

struct FixedPoint {
    GridFunction<double> U;
    std::vector<double> kU;  // kk U on the nodes
    int iterations = 0;
    double residual = 0.0;   // sup |U + (1/2) log(1 - 2 zeta Psi e^{kk U})|
    bool converged = false;
};

namespace detail {

// T(U) = -(1/2) log(1 - 2 zeta Psi e^{kU}); false if the log argument leaves (0, inf).
inline bool fp_map(const ModelWeights& mw, double zeta, const std::vector<double>& kU,
                   std::vector<double>& out) {
    const std::size_t n = kU.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * zeta * mw.psi[i] * std::exp(kU[i]);
        if (!(a < 1.0)) return false;
        out[i] = -0.5 * std::log1p(-a);
    }
    return true;
}

}  // namespace detail

/// Fixed point of U <- -(1/2) log(1 - 2 zeta Psi e^{kk U}). Plain iteration; the step is
/// halved for good once an update grows.
inline FixedPoint solve_U(const ModelWeights& mw, const KernelMatrix& kk, double zeta,
                          const SolveOptions& opt = {}, const std::vector<double>* start = nullptr) {
    require(opt.tol > 0.0, "tol must be positive");
    require(std::isfinite(zeta), "zeta must be finite");
    if (kk.variant != KernelVariant::KK) throw domain_error("solve_U needs the kk kernel");
    const std::size_t n = mw.psi.size();
    if (kk.n != n) throw grid_mismatch_error("solve_U: kernel and weights differ");
    FixedPoint fp;
    fp.U.grid = mw.grid;
    fp.U.values = start ? *start : std::vector<double>(n, 0.0);
    std::vector<double>& U = fp.U.values;
    std::vector<double> kU, T;
    double step = 1.0, last = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        kk_apply_raw(kk, mw.W, U, kU);
        if (!detail::fp_map(mw, zeta, kU, T)) throw domain_error("solve_U: log argument <= 0");
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::fabs(T[i] - U[i]));
        if (d > last) step = 0.5;
        last = d;
        for (std::size_t i = 0; i < n; ++i) U[i] += step * (T[i] - U[i]);
        fp.iterations = it;
        if (!std::isfinite(d)) break;
        if (d < opt.tol) {
            fp.converged = true;
            break;
        }
    }
    if (!fp.converged) throw convergence_error("solve_U: no convergence");
    kk_apply_raw(kk, mw.W, U, kU);
    if (!detail::fp_map(mw, zeta, kU, T)) throw domain_error("solve_U: log argument <= 0");
    for (std::size_t i = 0; i < n; ++i) fp.residual = std::max(fp.residual, std::fabs(U[i] - T[i]));
    fp.kU = std::move(kU);
    return fp;
}

/// dU/dzeta from U' = G (1 + zeta kk U'), G = Psi e^{kU} / (1 - 2 zeta Psi e^{kU}).
inline std::vector<double> tangent_U(const ModelWeights& mw, const KernelMatrix& kk, double zeta,
                                     const FixedPoint& fp) {
    const std::size_t n = mw.psi.size();
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd G(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = mw.psi[i] * std::exp(fp.kU[i]);
        G[i] = e / (1.0 - 2.0 * zeta * e);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            A(i, j) = (i == j ? 1.0 : 0.0) - zeta * G[i] * kk.entries[i * n + j] * mw.W[j];
    Eigen::VectorXd d = A.partialPivLu().solve(G);
    return {d.data(), d.data() + n};
}

struct CurvePoint {
    double zeta = 0.0;
    double s = 0.0;
    double E = 0.0;
    double ds = 0.0;  // ds/dzeta
    double dE = 0.0;  // dE/dzeta
    bool converged = false;
    int iterations = 0;
};

struct ParametricCurve {
    std::vector<CurvePoint> points;
    double zeta_max = 0.0;
};

struct RatePoint {
    double H = 0.0;
    double Phi = 0.0;
    double s = 0.0;
};

struct RateFunction {
    std::vector<RatePoint> samples;
};

/// One curve point: s = int U, E = -s/24 + (1/2) int w^2 U, with exact zeta-derivatives.
inline CurvePoint curve_point(const ModelWeights& mw, const KernelMatrix& kk, double zeta,
                              const SolveOptions& opt = {}) {
    CurvePoint c;
    c.zeta = zeta;
    const std::size_t n = mw.psi.size();
    if (zeta == 0.0) {
        c.converged = true;
        for (std::size_t i = 0; i < n; ++i) {
            c.ds += mw.W[i] * mw.psi[i];
            c.dE += 0.5 * mw.W[i] * mw.x[i] * mw.psi[i];
        }
        c.dE -= c.ds / 24.0;
        return c;
    }
    auto fp = solve_U(mw, kk, zeta, opt);
    auto dU = tangent_U(mw, kk, zeta, fp);
    double xU = 0.0, xdU = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        c.s += mw.W[i] * fp.U.values[i];
        xU += mw.W[i] * mw.x[i] * fp.U.values[i];
        c.ds += mw.W[i] * dU[i];
        xdU += mw.W[i] * mw.x[i] * dU[i];
    }
    c.E = -c.s / 24.0 + 0.5 * xU;
    c.dE = -c.ds / 24.0 + 0.5 * xdU;
    c.converged = fp.converged;
    c.iterations = fp.iterations;
    return c;
}

/// Largest zeta > 0 where solve_U succeeds, bisected to relative width rel.
inline double zeta_max(const ModelWeights& mw, const KernelMatrix& kk, double rel = 1e-3,
                       const SolveOptions& opt = {}) {
    auto ok = [&](double z) {
        try {
            solve_U(mw, kk, z, opt);
            return true;
        } catch (const domain_error&) {
            return false;
        } catch (const numerical_error&) {
            return false;
        }
    };
    const double pmax = *std::max_element(mw.psi.begin(), mw.psi.end());
    double lo = 0.0, hi = 0.5 / pmax;
    while (ok(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6 / pmax) throw numerical_error("zeta_max: no upper bound found");
    }
    while (hi - lo > rel * hi) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? lo : hi) = mid;
    }
    return lo;
}

inline ParametricCurve trace_curve(const ModelWeights& mw, const KernelMatrix& kk,
                                   const std::vector<double>& zetas, const SolveOptions& opt = {}) {
    ParametricCurve c;
    c.points.resize(zetas.size());
    parallel_for(zetas.size(), [&](std::size_t i) { c.points[i] = curve_point(mw, kk, zetas[i], opt); });
    return c;
}

/// zeta in [zmin, frac * zeta_max] on an even grid, zmin >= 0.
inline ParametricCurve trace_curve_window(const ModelWeights& mw, const KernelMatrix& kk, int steps,
                                          double frac = 0.98, double zmin = 0.0,
                                          const SolveOptions& opt = {}) {
    require(steps >= 2, "need at least 2 zeta steps");
    const double zm = zeta_max(mw, kk, 1e-3, opt);
    const double top = frac * zm;
    if (!(top > zmin)) throw numerical_error("empty zeta window");
    std::vector<double> zs(steps);
    for (int i = 0; i < steps; ++i) zs[i] = zmin + (top - zmin) * i / (steps - 1);
    auto c = trace_curve(mw, kk, zs, opt);
    c.zeta_max = zm;
    return c;
}

/// H = dE/ds + shift, Phi = s H - E - shift s. shift = 1/24 at finite L, 0 in the scaled theory.
inline RateFunction legendre(const ParametricCurve& curve, double shift = 1.0 / 24.0) {
    RateFunction r;
    double last_s = -std::numeric_limits<double>::infinity();
    for (const auto& p : curve.points) {
        if (p.s < 0.0) continue;
        if (!(p.s > last_s) || !(p.ds > 0.0)) throw numerical_error("legendre: s not increasing");
        last_s = p.s;
        const double H = p.dE / p.ds + shift;
        r.samples.push_back({H, p.s * H - p.E - shift * p.s, p.s});
    }
    return r;
}

/// Slopes of Phi between consecutive samples never decrease (up to tol).
inline bool is_convex(const RateFunction& r, double tol = 1e-8) {
    const auto& s = r.samples;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        const double a = (s[i].Phi - s[i - 1].Phi) / (s[i].H - s[i - 1].H);
        const double b = (s[i + 1].Phi - s[i].Phi) / (s[i + 1].H - s[i].H);
        if (b - a < -tol) return false;
    }
    return true;
}

/// max_j { s H_j - Phi_j } - shift s, the inverse transform on the samples.
inline double legendre_inverse(const RateFunction& r, double s, double shift = 1.0 / 24.0) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : r.samples) best = std::max(best, s * p.H - p.Phi);
    return best - shift * s;
}

/// Solve H(zeta) = target by bisection on [z0, z1] (H monotone in zeta).
inline CurvePoint point_at_H(const ModelWeights& mw, const KernelMatrix& kk, double target,
                             double z0, double z1, const SolveOptions& opt = {}) {
    auto H = [](const CurvePoint& c) { return c.dE / c.ds + 1.0 / 24.0; };
    CurvePoint a = curve_point(mw, kk, z0, opt), b = curve_point(mw, kk, z1, opt);
    if ((H(a) - target) * (H(b) - target) > 0.0) throw numerical_error("point_at_H: not bracketed");
    for (int it = 0; it < 80 && std::fabs(b.zeta - a.zeta) > 1e-15 * std::fabs(b.zeta); ++it) {
        CurvePoint m = curve_point(mw, kk, 0.5 * (a.zeta + b.zeta), opt);
        ((H(m) - target) * (H(a) - target) > 0.0 ? a : b) = m;
    }
    return a;
}

}  // namespace kpzi
