#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "error.hpp"
#include "specfun.hpp"

namespace kpzi {

struct BoundaryParams {
    double u = 1.0;
    double v = 1.0;
    double L = 1.0;
};

/// Quadrature nodes y_i for the contour shift + i y. Weights are plain dy weights;
/// the 1/(2 pi) of dw/(2 i pi) is applied by integrate().
struct ContourGrid {
    std::vector<double> nodes;
    std::vector<double> weights;
    double cutoff = 0.0;
    double shift = 0.0;

    std::size_t count() const { return nodes.size(); }
    std::complex<double> w(std::size_t i) const { return {shift, nodes[i]}; }
};

using GridPtr = std::shared_ptr<const ContourGrid>;

template <class T>
struct GridFunction {
    GridPtr grid;
    std::vector<T> values;
};

struct GridOptions {
    double max_panel = 0.5;   // widest outer panel
    int min_per_panel = 8;
    double threshold = 1e-18; // envelope cutoff
};

namespace detail {

// Gauss-Legendre on [-1,1]; m <= 64 covers every panel we build.
inline void gl_rule(int m, std::vector<double>& x, std::vector<double>& w) {
    x.assign(m, 0.0);
    w.assign(m, 0.0);
    // Newton on P_m
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= m; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = m * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

// Distance from the line Re w = shift to the nearest pole of Psi.
inline double pole_distance(const BoundaryParams& p, double shift) {
    double a = INFINITY;
    for (double q : {p.u, p.v}) {
        for (int i = 0; i < 64; ++i) {
            const double r = q + i;
            if (std::fabs(r) < 1e-15) continue;  // u = 0 is a removable point
            a = std::min({a, std::fabs(r - shift), std::fabs(-r - shift)});
        }
    }
    return a;
}

}  // namespace detail

/// Cutoff Y: smallest Y on the decreasing branch with e^{-L Y^2} max(1,Y)^{2(u+v)+6} < threshold.
inline double envelope_cutoff(const BoundaryParams& p, double threshold = 1e-18) {
    require(p.L > 0.0, "L must be positive");
    const double e = 2.0 * (p.u + p.v) + 6.0;
    auto log_env = [&](double Y) { return -p.L * Y * Y + e * std::log(std::max(1.0, Y)); };
    const double target = std::log(threshold);
    double lo = e > 2.0 * p.L ? std::sqrt(e / (2.0 * p.L)) : 0.0;
    double hi = std::max(1.0, 2.0 * lo);
    while (log_env(hi) >= target) hi *= 2.0;
    if (log_env(lo) < target) return lo;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (log_env(mid) < target ? hi : lo) = mid;
    }
    return hi;
}

/// Composite Gauss-Legendre grid on [-Y, Y], symmetric, no node at 0.
/// Panels are graded geometrically toward 0 down to the pole distance of Psi and are
/// uniform further out; the node count per panel is raised until at least n_nodes nodes.
inline ContourGrid build_grid(const BoundaryParams& p, std::size_t n_nodes, double shift = 0.0,
                              const GridOptions& opt = {}) {
    require(p.L > 0.0 && std::isfinite(p.L), "L must be positive");
    require(std::isfinite(p.u) && std::isfinite(p.v), "u, v must be finite");
    require(n_nodes >= 32, "need at least 32 nodes");
    ContourGrid g;
    g.shift = shift;
    g.cutoff = envelope_cutoff(p, opt.threshold);
    const double Y = g.cutoff;

    double h = std::min(opt.max_panel, 1.0 / std::sqrt(p.L));
    if (shift > 0.0) h = std::min(h, 0.5 * shift);
    h = std::min(h, Y);
    double a = detail::pole_distance(p, shift);
    if (shift > 0.0) a = std::min(a, shift);

    std::vector<double> br{0.0};
    for (double x = a / 8.0; x < h; x *= 2.0) br.push_back(x);
    const int outer = std::max(1, int(std::ceil((Y - br.back()) / h - 1e-9)));
    const double step = (Y - br.back()) / outer;
    const double start = br.back();
    for (int k = 1; k <= outer; ++k) br.push_back(start + k * step);

    const std::size_t panels = br.size() - 1;
    const int m = std::max<int>(opt.min_per_panel, int((n_nodes + 2 * panels - 1) / (2 * panels)));
    std::vector<double> x, w;
    detail::gl_rule(m, x, w);

    std::vector<double> ys, ws;
    for (std::size_t k = 0; k < panels; ++k) {
        const double c = 0.5 * (br[k] + br[k + 1]), r = 0.5 * (br[k + 1] - br[k]);
        for (int j = 0; j < m; ++j) {
            ys.push_back(c + r * x[j]);
            ws.push_back(r * w[j]);
        }
    }
    const std::size_t half = ys.size();
    g.nodes.resize(2 * half);
    g.weights.resize(2 * half);
    for (std::size_t i = 0; i < half; ++i) {
        g.nodes[half - 1 - i] = -ys[i];
        g.weights[half - 1 - i] = ws[i];
        g.nodes[half + i] = ys[i];
        g.weights[half + i] = ws[i];
    }
    return g;
}

inline GridPtr make_grid(const BoundaryParams& p, std::size_t n_nodes, double shift = 0.0,
                         const GridOptions& opt = {}) {
    return std::make_shared<const ContourGrid>(build_grid(p, n_nodes, shift, opt));
}

/// sum_i w_i f(y_i) / (2 pi): the contour integral with dw/(2 i pi) -> dy/(2 pi).
template <class T>
T integrate(const ContourGrid& g, const std::vector<T>& f) {
    if (f.size() != g.count()) throw grid_mismatch_error("integrate: size mismatch");
    T s{};
    for (std::size_t i = 0; i < f.size(); ++i) s += g.weights[i] * f[i];
    return s / (2.0 * std::numbers::pi);
}

template <class T>
T integrate(const GridFunction<T>& f) {
    return integrate(*f.grid, f.values);
}

template <class F>
auto integrate2(F&& fn, const ContourGrid& ga, const ContourGrid& gb) {
    using R = decltype(fn(0.0, 0.0));
    R s{};
    for (std::size_t i = 0; i < ga.count(); ++i) {
        R row{};
        for (std::size_t j = 0; j < gb.count(); ++j)
            row += gb.weights[j] * fn(ga.nodes[i], gb.nodes[j]);
        s += ga.weights[i] * row;
    }
    const double tp = 2.0 * std::numbers::pi;
    return s / (tp * tp);
}

/// Sample f(y) on the nodes.
template <class F>
auto sample(const GridPtr& g, F&& f) {
    using T = decltype(f(0.0));
    GridFunction<T> out{g, std::vector<T>(g->count())};
    for (std::size_t i = 0; i < g->count(); ++i) out.values[i] = f(g->nodes[i]);
    return out;
}

/// Composite Gauss-Legendre on [a, b] for real integrands.
template <class F>
double gauss_legendre(F&& f, double a, double b, int panels = 64) {
    double s = 0.0;
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h;
        s += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, lo + h);
    }
    return s;
}

}  // namespace kpzi
