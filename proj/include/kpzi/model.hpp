#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace kpzi {

/// log Psi(iy), real for all real u, v (conjugate pairs).
inline double log_psi_line(const BoundaryParams& p, double y) {
    return log_gamma_abs2_line(p.u, y) + log_gamma_abs2_line(p.v, y) +
           log_recip_gamma_pair_line(y) - p.L * y * y;
}

inline double psi_line(const BoundaryParams& p, double y) {
    if (y == 0.0) return 0.0;
    return std::exp(log_psi_line(p, y));
}

/// Psi(w) = Gamma(u+w)Gamma(u-w)Gamma(v+w)Gamma(v-w) e^{w^2 L} / (Gamma(2w)Gamma(-2w)).
inline cplx psi_weight(const BoundaryParams& p, cplx w) {
    if (w == 0.0) return 0.0;
    if (w.real() == 0.0) return psi_line(p, w.imag());
    const cplx lg = log_gamma(p.u + w) + log_gamma(p.u - w) + log_gamma(p.v + w) +
                    log_gamma(p.v - w) + p.L * w * w - log_gamma(2.0 * w) - log_gamma(-2.0 * w);
    return std::exp(lg);
}

struct ModelWeights {
    BoundaryParams params;
    GridPtr grid;
    std::vector<double> psi;    // Psi(i y_i)
    std::vector<double> W;      // w_i / (2 pi)
    std::vector<double> nu;     // nu-mass per node, W_i Psi_i / Z1; sums to 1
    std::vector<double> x;      // w^2 = -y^2
    double Z1 = 0.0;            // int dw/(2 i pi) Psi
    double Zcal = 0.0;          // Z1 / 2
    std::optional<double> Ztilde;  // Z1 / Gamma(u+v), when u+v > 0
    double w2_mean = 0.0;

    std::vector<double> nu_density() const {
        std::vector<double> d(psi.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = psi[i] / Z1;
        return d;
    }
};

/// Weights from arbitrary Psi samples on an unshifted grid.
inline ModelWeights weights_from_psi(const BoundaryParams& p, GridPtr g, std::vector<double> psi) {
    if (g->shift != 0.0) throw domain_error("weights need the unshifted contour");
    if (psi.size() != g->count()) throw grid_mismatch_error("psi size mismatch");
    ModelWeights m;
    m.params = p;
    m.grid = g;
    m.psi = std::move(psi);
    const std::size_t n = g->count();
    m.W.resize(n);
    m.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.W[i] = g->weights[i] / (2.0 * std::numbers::pi);
        m.x[i] = -g->nodes[i] * g->nodes[i];
        if (!std::isfinite(m.psi[i])) throw numerical_error("Psi not finite on grid");
    }
    m.Z1 = integrate(*g, m.psi);
    if (!(m.Z1 > 0.0) || !std::isfinite(m.Z1)) throw numerical_error("normalization not positive");
    m.Zcal = 0.5 * m.Z1;
    if (p.u + p.v > 0.0) m.Ztilde = m.Z1 * rgamma(p.u + p.v);
    m.nu.resize(n);
    m.w2_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m.nu[i] = m.W[i] * m.psi[i] / m.Z1;
        m.w2_mean += m.nu[i] * m.x[i];
    }
    return m;
}

inline ModelWeights build_weights(const BoundaryParams& p, GridPtr g) {
    std::vector<double> psi(g->count());
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = psi_line(p, g->nodes[i]);
    return weights_from_psi(p, std::move(g), std::move(psi));
}

inline ModelWeights build_weights(const BoundaryParams& p, std::size_t n_nodes = 400) {
    return build_weights(p, make_grid(p, n_nodes));
}

/// kk(w1,w2) = -2 (psi(1+w1-w2) + psi(1+w2-w1)).
inline cplx kernel_kk(cplx w1, cplx w2) {
    if (w1 == w2) return 4.0 * euler_gamma;
    return -2.0 * (digamma(1.0 + w1 - w2) + digamma(1.0 + w2 - w1));
}

/// On the contour: -4 Re psi(1 + i(y1 - y2)); diagonal 4 gamma_E.
inline double kernel_kk_line(double y1, double y2) {
    if (y1 == y2) return 4.0 * euler_gamma;
    return -4.0 * digamma(cplx(1.0, y1 - y2)).real();
}

/// K(w1,w2) = 1/(w1+w2) - psi(1+w1-w2) - psi(1+w2-w1).
inline cplx kernel_K(cplx w1, cplx w2) {
    if (std::abs(w1 + w2) == 0.0) throw domain_error("kernel_K: w1 + w2 = 0");
    return 1.0 / (w1 + w2) - digamma(1.0 + w1 - w2) - digamma(1.0 + w2 - w1);
}

enum class KernelVariant { KK, KKBAR_DELTA_SEPARATE, K_SHIFTED };

struct KernelMatrix {
    KernelVariant variant = KernelVariant::KK;
    GridPtr rows, cols;
    std::size_t n = 0, m = 0;
    std::vector<double> entries;      // real variants, row-major n x m
    std::vector<cplx> centries;       // K_SHIFTED
    std::vector<double> delta_term;   // KKBAR: density Psi/Z1 carrying the delta part

    double operator()(std::size_t i, std::size_t j) const { return entries[i * m + j]; }
};

inline KernelMatrix build_kk(GridPtr g, double diag = 4.0 * euler_gamma) {
    KernelMatrix k;
    k.variant = KernelVariant::KK;
    k.rows = k.cols = g;
    k.n = k.m = g->count();
    k.entries.assign(k.n * k.m, 0.0);
    // kk depends on y_i - y_j only; fill each row independently
    parallel_for(k.n, [&](std::size_t i) {
        for (std::size_t j = 0; j < k.m; ++j)
            k.entries[i * k.m + j] = i == j ? diag : kernel_kk_line(g->nodes[i], g->nodes[j]);
    });
    return k;
}

inline KernelMatrix build_kkbar(const ModelWeights& mw) {
    KernelMatrix k = build_kk(mw.grid);
    k.variant = KernelVariant::KKBAR_DELTA_SEPARATE;
    k.delta_term = mw.nu_density();
    return k;
}

/// K(w1, w2) with w1 on rows (unshifted) and w2 on cols (shifted).
inline KernelMatrix build_K_shifted(GridPtr rows, GridPtr cols) {
    if (rows->shift != 0.0 || !(cols->shift > 0.0))
        throw domain_error("K kernel needs an unshifted and a shifted contour");
    KernelMatrix k;
    k.variant = KernelVariant::K_SHIFTED;
    k.rows = rows;
    k.cols = cols;
    k.n = rows->count();
    k.m = cols->count();
    k.centries.resize(k.n * k.m);
    parallel_for(k.n, [&](std::size_t i) {
        for (std::size_t j = 0; j < k.m; ++j)
            k.centries[i * k.m + j] = kernel_K(rows->w(i), cols->w(j));
    });
    return k;
}

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
    if (a == b) return true;
    return a && b && a->shift == b->shift && a->nodes == b->nodes && a->weights == b->weights;
}

/// (kk f)(y_i) = sum_j w_j/(2 pi) kk(y_i, y_j) f(y_j). The KKBAR variant adds f itself
/// (the delta contribution), never a discretized delta.
template <class T>
GridFunction<T> kk_apply(const KernelMatrix& k, const GridFunction<T>& f) {
    if (!same_grid(k.cols, f.grid)) throw grid_mismatch_error("kk_apply: grid mismatch");
    if (k.variant == KernelVariant::K_SHIFTED)
        throw domain_error("kk_apply: use the real kernels");
    const auto& g = *k.cols;
    std::vector<T> wf(k.m);
    for (std::size_t j = 0; j < k.m; ++j) wf[j] = g.weights[j] / (2.0 * std::numbers::pi) * f.values[j];
    GridFunction<T> out{k.rows, std::vector<T>(k.n)};
    for (std::size_t i = 0; i < k.n; ++i) {
        T s{};
        const double* row = &k.entries[i * k.m];
        for (std::size_t j = 0; j < k.m; ++j) s += row[j] * wf[j];
        out.values[i] = s;
    }
    if (k.variant == KernelVariant::KKBAR_DELTA_SEPARATE)
        for (std::size_t i = 0; i < k.n; ++i) out.values[i] += f.values[i];
    return out;
}

/// Plain vector form used by the solvers: y = K (W .* f).
inline void kk_apply_raw(const KernelMatrix& k, const std::vector<double>& W,
                         const std::vector<double>& f, std::vector<double>& out) {
    const std::size_t n = k.n, m = k.m;
    std::vector<double> wf(m);
    for (std::size_t j = 0; j < m; ++j) wf[j] = W[j] * f[j];
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &k.entries[i * m];
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += row[j] * wf[j];
        out[i] = s;
    }
}

struct IdentityCheck {
    double max_abs_error = 0.0;  // over interior nodes
    std::size_t interior_nodes = 0;
};

/// kk phi = 2 f(1+w) + 2 g(1-w) for phi(w) = f(w) - f(w+1) + g(-w) - g(1-w), with
/// f, g Laplace transforms of narrow Gaussians: f(w) = exp(t0 - t0 w + sigma^2 w^2 / 2).
/// Pure exponentials do not decay on iR, so the smeared form is used.
inline IdentityCheck kernel_identity_check(double tf = 8.0, double tg = 9.0, double sigma = 1.0,
                                           std::size_t n = 400, double interior = 0.5,
                                           double diag = 4.0 * euler_gamma) {
    auto lap = [sigma](double t0) {
        return [=](cplx w) { return std::exp(t0 - t0 * w + 0.5 * sigma * sigma * w * w); };
    };
    auto f = lap(tf), g = lap(tg);
    auto grid = make_grid({0.0, 0.0, 0.5 * sigma * sigma}, n);
    auto phi = sample(grid, [&](double y) {
        const cplx w(0.0, y);
        return f(w) - f(w + 1.0) + g(-w) - g(1.0 - w);
    });
    auto out = kk_apply(build_kk(grid, diag), phi);
    IdentityCheck r;
    const double ymax = interior * grid->cutoff;
    for (std::size_t i = 0; i < grid->count(); ++i) {
        const double y = grid->nodes[i];
        if (std::fabs(y) > ymax) continue;
        const cplx w(0.0, y);
        const cplx expect = 2.0 * f(1.0 + w) + 2.0 * g(1.0 - w);
        r.max_abs_error = std::max(r.max_abs_error, std::abs(out.values[i] - expect));
        ++r.interior_nodes;
    }
    return r;
}

}  // namespace kpzi
