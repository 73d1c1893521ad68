#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "fixedpoint.hpp"
#include "model.hpp"
#include "quadrature.hpp"
#include "series.hpp"

namespace kpzi {

/// Grid for the Gaussian weight e^{-L y^2 / 2}; u = v = 0 keeps the envelope exponent minimal.
inline GridPtr periodic_grid(double L, std::size_t n = 400) {
    require(L > 0.0, "L must be positive");
    return make_grid({0.0, 0.0, 0.5 * L}, n);
}

/// Model weights with Psi(w) replaced by e^{L w^2 / 2}.
inline ModelWeights periodic_weights(double L, std::size_t n = 400) {
    auto g = periodic_grid(L, n);
    std::vector<double> psi(g->count());
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::exp(-0.5 * L * g->nodes[i] * g->nodes[i]);
    return weights_from_psi({0.0, 0.0, L}, g, std::move(psi));
}

/// c_k^per = c_k|_{Psi -> e^{L w^2/2}} / 2^{k-1}, shift included in c_1.
inline CumulantResult periodic_cumulants(double L, int K, std::size_t n = 400) {
    require(K >= 1 && K <= 8, "K must be in 1..8");
    auto mw = periodic_weights(L, n);
    auto kk = build_kk(mw.grid);
    auto r = invert_to_cumulants(extract_coeffs(compute_U_coeffs(mw, kk, K), mw));
    for (int k = 2; k <= K; ++k) r.c[k - 1] = std::ldexp(r.c[k - 1], -(k - 1));
    r.method = Method::periodic;
    r.params = {0.0, 0.0, L};
    r.grid_size = mw.grid->count();
    return r;
}

/// (1/2) [nu kk nu (x - m) + delta term], evaluated directly.
inline double c2_periodic_direct(double L, std::size_t n = 400) {
    auto mw = periodic_weights(L, n);
    auto kk = build_kk(mw.grid);
    const std::size_t m = mw.psi.size();
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < m; ++j) r += kk.entries[i * m + j] * mw.nu[j];
        const double rho = mw.psi[i] / mw.Z1;
        s += (mw.nu[i] * r + mw.W[i] * rho * rho) * (mw.x[i] - mw.w2_mean);
    }
    return 0.5 * s;
}

/// (1/2) d/dL <kbar>_per by central difference on fixed nodes.
inline double c2_periodic_dL(double L, std::size_t n = 400, double rel_h = 1e-4) {
    auto g = periodic_grid(L, n);
    auto kk = build_kk(g);
    auto kbar = [&](double Lx) {
        std::vector<double> psi(g->count());
        for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::exp(-0.5 * Lx * g->nodes[i] * g->nodes[i]);
        auto mw = weights_from_psi({0.0, 0.0, Lx}, g, std::move(psi));
        const std::size_t m = mw.psi.size();
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double r = 0.0;
            for (std::size_t j = 0; j < m; ++j) r += kk.entries[i * m + j] * mw.nu[j];
            const double rho = mw.psi[i] / mw.Z1;
            s += mw.nu[i] * r + mw.W[i] * rho * rho;
        }
        return s;
    };
    const double h = rel_h * L;
    return 0.5 * (kbar(L + h) - kbar(L - h)) / (2.0 * h);
}

namespace detail {

// int_0^inf f(t) dt with t = s/(1-s), Gauss-Legendre on s in (0, 1).
template <class F>
double half_line_gl(F&& f, int panels = 400) {
    auto g = [&](double s) {
        const double o = 1.0 - s;
        return f(s / o) / (o * o);
    };
    return gauss_legendre(g, 0.0, 1.0, panels);
}

}  // namespace detail

struct BDCheck {
    double res1 = 0.0;
    double res2 = 0.0;
};

/// Two closed forms of c_2^per: the L-derivative of the first one is taken analytically.
inline BDCheck bd_crosscheck(double L) {
    require(L > 0.0, "L must be positive");
    BDCheck r;
    const double a = detail::half_line_gl([L](double t) {
        if (t < 1e-4) return t * (1.0 - 0.5 * t) * std::exp(-t * t / L);  // t^2/(e^t - 1)
        return t * t * std::exp(-t * t / L) / std::expm1(t);
    });
    r.res1 = 2.0 * a / (L * L) + std::sqrt(std::numbers::pi) / (4.0 * std::sqrt(L));
    const double c = std::sqrt(L) / (2.0 * std::numbers::sqrt2);
    const double b = detail::half_line_gl([c](double l) {
        if (l == 0.0) return 0.0;
        return l * l / std::tanh(c * l) * std::exp(-0.5 * l * l);
    });
    r.res2 = b / (2.0 * std::sqrt(2.0 * L));
    return r;
}

/// Solve U_per = -log(1 - 2 zeta Psi e^{(1/2) kk U_per}) directly by iteration.
inline std::vector<double> solve_U_periodic(const ModelWeights& mw, const KernelMatrix& kk, double zeta,
                                            const SolveOptions& opt = {}) {
    const std::size_t n = mw.psi.size();
    std::vector<double> U(n, 0.0), kU;
    for (int it = 0; it < opt.max_iter; ++it) {
        kk_apply_raw(kk, mw.W, U, kU);
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = 2.0 * zeta * mw.psi[i] * std::exp(0.5 * kU[i]);
            if (!(a < 1.0)) throw domain_error("solve_U_periodic: log argument <= 0");
            const double t = -std::log1p(-a);
            d = std::max(d, std::fabs(t - U[i]));
            U[i] = t;
        }
        if (d < opt.tol) return U;
    }
    throw convergence_error("solve_U_periodic: no convergence");
}

}  // namespace kpzi
