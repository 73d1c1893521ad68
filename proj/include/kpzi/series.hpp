#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"

namespace kpzi {

struct CoeffSeries {
    int K = 0;
    std::vector<double> s;    // s_1..s_K
    std::vector<double> eps;  // eps_1..eps_K
    bool include_shift = true;
};

enum class Method { series, closed_form, continuation, large_L, periodic, monte_carlo };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::series: return "series";
        case Method::closed_form: return "closed_form";
        case Method::continuation: return "continuation";
        case Method::large_L: return "large_L";
        case Method::periodic: return "periodic";
        case Method::monte_carlo: return "monte_carlo";
    }
    return "?";
}

struct CumulantResult {
    std::vector<double> c;  // c_1..c_K
    Method method = Method::series;
    BoundaryParams params;
    std::size_t grid_size = 0;
    double refinement_delta = 0.0;
};

enum class URoute { exp_series, multinomial };

using NodeSeries = std::vector<std::vector<double>>;  // [order-1][node]

namespace detail {

// Coefficients 1..M of (sum_j a_j z^j)^i, node-wise, for i = 1..M. P[i][m][node].
inline std::vector<NodeSeries> composition_powers(const NodeSeries& A, int M, std::size_t n) {
    std::vector<NodeSeries> P(M + 1, NodeSeries(M + 1, std::vector<double>(n, 0.0)));
    for (int m = 1; m <= M; ++m) P[1][m] = A[m - 1];
    for (int i = 2; i <= M; ++i)
        for (int m = i; m <= M; ++m)
            for (int p = 1; p <= m - i + 1; ++p)
                for (std::size_t k = 0; k < n; ++k) P[i][m][k] += A[p - 1][k] * P[i - 1][m - p][k];
    return P;
}

}  // namespace detail

/// U_1..U_K on the nodes. U_1 = Psi; higher orders from the functional equation.
inline NodeSeries compute_U_coeffs(const ModelWeights& mw, const KernelMatrix& kk, int K,
                                   URoute route = URoute::exp_series) {
    require(K >= 1, "series order must be >= 1");
    if (kk.variant == KernelVariant::K_SHIFTED) throw domain_error("series needs the kk kernel");
    const std::size_t n = mw.psi.size();
    if (kk.n != n) throw grid_mismatch_error("kernel and weights differ in size");
    NodeSeries U{mw.psi};
    NodeSeries A;  // A_p = kk U_p
    for (int order = 2; order <= K; ++order) {
        std::vector<double> a;
        kk_apply_raw(kk, mw.W, U[order - 2], a);
        A.push_back(std::move(a));
        std::vector<double> un(n, 0.0);
        if (route == URoute::exp_series) {
            for (int l = 1; l <= order; ++l) {
                const int M = order - l;
                // E_m of exp(l sum_j A_j z^j):  m E_m = l sum_j j A_j E_{m-j}
                NodeSeries E{std::vector<double>(n, 1.0)};
                for (int m = 1; m <= M; ++m) {
                    std::vector<double> e(n, 0.0);
                    for (int j = 1; j <= m; ++j)
                        for (std::size_t k = 0; k < n; ++k) e[k] += j * A[j - 1][k] * E[m - j][k];
                    for (double& x : e) x *= double(l) / m;
                    E.push_back(std::move(e));
                }
                const double c = std::ldexp(1.0, l - 1) / l;
                for (std::size_t k = 0; k < n; ++k)
                    un[k] += c * std::pow(mw.psi[k], l) * E[M][k];
            }
        } else {
            const int M = order - 1;
            auto P = detail::composition_powers(A, M, n);
            for (std::size_t k = 0; k < n; ++k)
                un[k] = std::ldexp(1.0, order - 1) / order * std::pow(mw.psi[k], order);
            for (int l = 1; l <= order - 1; ++l) {
                const double c = std::ldexp(1.0, l - 1) / l;
                double fact = 1.0, lp = 1.0;
                for (int i = 1; i <= order - l; ++i) {
                    fact *= i;
                    lp *= l;
                    for (std::size_t k = 0; k < n; ++k)
                        un[k] += c * std::pow(mw.psi[k], l) * lp / fact * P[i][order - l][k];
                }
            }
        }
        U.push_back(std::move(un));
    }
    return U;
}

/// s_k = int U_k, eps_k = (1/2) int w^2 U_k.
inline CoeffSeries extract_coeffs(const NodeSeries& U, const ModelWeights& mw,
                                  bool include_shift = true) {
    require(!U.empty(), "empty U list");
    CoeffSeries cs;
    cs.K = int(U.size());
    cs.include_shift = include_shift;
    for (const auto& u : U) {
        double s = 0.0, e = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            s += mw.W[i] * u[i];
            e += mw.W[i] * mw.x[i] * u[i];
        }
        cs.s.push_back(s);
        cs.eps.push_back(0.5 * e);
    }
    return cs;
}

/// d_{k,l} = [z^k] s(z)^l for 1 <= l <= k <= K; zero above the diagonal.
inline std::vector<std::vector<double>> d_matrix(const std::vector<double>& s, int K) {
    std::vector<std::vector<double>> d(K + 1, std::vector<double>(K + 1, 0.0));
    // pow[k] holds [z^k] s^l for the current l
    std::vector<double> pw(K + 1, 0.0);
    for (int k = 1; k <= K; ++k) pw[k] = s[k - 1];
    for (int l = 1; l <= K; ++l) {
        for (int k = 1; k <= K; ++k) d[k][l] = pw[k];
        std::vector<double> nx(K + 1, 0.0);
        for (int k = 1; k <= K; ++k)
            for (int j = 1; j < k; ++j) nx[k] += s[j - 1] * pw[k - j];
        pw = nx;
    }
    return d;
}

/// Lower-triangular inverse of D (1-based, K x K).
inline std::vector<std::vector<double>> d_inverse(const std::vector<double>& s, int K) {
    auto d = d_matrix(s, K);
    std::vector<std::vector<double>> inv(K + 1, std::vector<double>(K + 1, 0.0));
    for (int j = 1; j <= K; ++j) {
        for (int i = j; i <= K; ++i) {
            double r = i == j ? 1.0 : 0.0;
            for (int l = j; l < i; ++l) r -= d[i][l] * inv[l][j];
            inv[i][j] = r / d[i][i];
        }
    }
    return inv;
}

/// c_k / k! = (eps_k - sum_{l<k} d_{k,l} c_l / l!) / s_1^k; -1/24 added to c_1 if requested.
inline CumulantResult invert_to_cumulants(const CoeffSeries& cs) {
    const int K = cs.K;
    if (cs.s.empty() || cs.s[0] == 0.0) throw numerical_error("invert: s_1 = 0");
    auto d = d_matrix(cs.s, K);
    CumulantResult r;
    r.method = Method::series;
    std::vector<double> ck(K + 1, 0.0);  // c_k / k!
    double fact = 1.0;
    for (int k = 1; k <= K; ++k) {
        double acc = cs.eps[k - 1];
        for (int l = 1; l < k; ++l) acc -= d[k][l] * ck[l];
        ck[k] = acc / std::pow(cs.s[0], k);
        fact *= k;
        r.c.push_back(ck[k] * fact);
    }
    if (cs.include_shift) r.c[0] -= 1.0 / 24.0;
    return r;
}

/// Series-route cumulants c_1..c_K at a parameter point.
inline CumulantResult series_cumulants(const BoundaryParams& p, int K, std::size_t n_nodes = 400) {
    auto mw = build_weights(p, n_nodes);
    auto kk = build_kk(mw.grid);
    auto r = invert_to_cumulants(extract_coeffs(compute_U_coeffs(mw, kk, K), mw));
    r.params = p;
    r.grid_size = mw.grid->count();
    return r;
}

}  // namespace kpzi
