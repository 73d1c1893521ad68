#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"

namespace kpzi {

enum class PathKind { bridge, free };

struct BrownianPath {
    std::size_t n = 0;
    double L = 0.0;
    std::vector<double> values;  // n + 1 points, values[0] = 0
    PathKind kind = PathKind::free;
};

struct MCEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::size_t n_steps = 0;
    // open line only: the tilt normalization E[tilt] and its error
    double denom_mean = 0.0;
    double denom_stderr = 0.0;
};

struct MCOptions {
    std::size_t n_samples = 100000;
    std::size_t n_steps = 4096;
    std::uint64_t seed = 42;
    bool parallel = false;
    std::size_t chunk = 1000;  // samples per RNG stream
};

/// Independent stream per (seed, chunk).
inline std::mt19937_64 chunk_rng(std::uint64_t seed, std::size_t chunk) {
    std::seed_seq ss{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(chunk),
                     std::uint32_t(std::uint64_t(chunk) >> 32)};
    return std::mt19937_64(ss);
}

/// Unit-diffusion path on [0, L] with n steps: increments N(0, L/n).
template <class Rng>
void sample_path(Rng& rng, BrownianPath& p) {
    std::normal_distribution<double> N(0.0, std::sqrt(p.L / double(p.n)));
    p.values.resize(p.n + 1);
    p.values[0] = 0.0;
    for (std::size_t i = 1; i <= p.n; ++i) p.values[i] = p.values[i - 1] + N(rng);
    if (p.kind == PathKind::bridge) {
        const double end = p.values[p.n];
        for (std::size_t i = 1; i <= p.n; ++i) p.values[i] -= end * double(i) / double(p.n);
        p.values[p.n] = 0.0;
    }
}

/// Trapezoid for int_0^L f(B(x), x) dx on the path grid.
template <class F>
double trapezoid(const BrownianPath& p, F&& f) {
    const double dx = p.L / double(p.n);
    double s = 0.5 * (f(p.values[0], 0.0) + f(p.values[p.n], p.L));
    for (std::size_t i = 1; i < p.n; ++i) s += f(p.values[i], dx * double(i));
    return s * dx;
}

namespace detail {

// Sums over one chunk: sum a, sum b, sum a^2, sum b^2, sum a b.
struct Moments {
    double a = 0, b = 0, aa = 0, bb = 0, ab = 0;
    std::size_t n = 0;
    void add(double x, double y) {
        a += x; b += y; aa += x * x; bb += y * y; ab += x * y; ++n;
    }
    void merge(const Moments& o) {
        a += o.a; b += o.b; aa += o.aa; bb += o.bb; ab += o.ab; n += o.n;
    }
};

// Runs sampler(rng, moments, count) per chunk; merges in chunk order so the result is
// identical with or without threads.
template <class Sampler>
Moments run_chunks(const MCOptions& o, Sampler&& sampler) {
    require(o.n_samples >= 2 && o.n_steps >= 1 && o.chunk >= 1, "bad Monte Carlo options");
    const std::size_t nc = (o.n_samples + o.chunk - 1) / o.chunk;
    std::vector<Moments> parts(nc);
    auto body = [&](std::size_t c) {
        auto rng = chunk_rng(o.seed, c);
        const std::size_t cnt = std::min(o.chunk, o.n_samples - c * o.chunk);
        sampler(rng, parts[c], cnt);
    };
    if (o.parallel)
        parallel_for(nc, body);
    else
        for (std::size_t c = 0; c < nc; ++c) body(c);
    Moments m;
    for (const auto& p : parts) m.merge(p);
    return m;
}

}  // namespace detail

/// c_1^per = -(L/2) E[(int_0^L e^{B})^{-2}], B a bridge.
inline MCEstimate mc_c1_periodic(double L, const MCOptions& o = {}) {
    require(L > 0.0, "L must be positive");
    auto m = detail::run_chunks(o, [&](std::mt19937_64& rng, detail::Moments& acc, std::size_t cnt) {
        BrownianPath p{o.n_steps, L, {}, PathKind::bridge};
        for (std::size_t k = 0; k < cnt; ++k) {
            sample_path(rng, p);
            const double I = trapezoid(p, [](double b, double) { return std::exp(b); });
            acc.add(-0.5 * L / (I * I), 0.0);
        }
    });
    MCEstimate e;
    const double n = double(m.n);
    e.mean = m.a / n;
    e.stderr_ = std::sqrt(std::max(0.0, m.aa / n - e.mean * e.mean) / (n - 1.0));
    e.n_samples = m.n;
    e.seed = o.seed;
    e.n_steps = o.n_steps;
    return e;
}

/// c_1(u, 1-u, L) = E[tilt F] / E[tilt], with D = B1 - B2,
/// tilt = e^{-v D(L)} / int e^{-D},
/// F = (u - 1/2)^2/2 - (1/2) int phi^2 e^{2 B1} / (int phi e^{B1})^2, phi = e^{(u-1/2)x}.
inline MCEstimate mc_c1_open_line(double u, double L, const MCOptions& o = {}) {
    require(L > 0.0, "L must be positive");
    require(std::isfinite(u), "u must be finite");
    const double v = 1.0 - u, g = u - 0.5;
    auto m = detail::run_chunks(o, [&](std::mt19937_64& rng, detail::Moments& acc, std::size_t cnt) {
        BrownianPath b1{o.n_steps, L, {}, PathKind::free}, b2 = b1, d = b1;
        d.values.resize(o.n_steps + 1);
        for (std::size_t k = 0; k < cnt; ++k) {
            sample_path(rng, b1);
            sample_path(rng, b2);
            for (std::size_t i = 0; i <= o.n_steps; ++i) d.values[i] = b1.values[i] - b2.values[i];
            const double tilt = std::exp(-v * d.values[o.n_steps]) /
                                trapezoid(d, [](double x, double) { return std::exp(-x); });
            // int phi e^{B1} and int phi^2 e^{2 B1} in one pass
            const double dx = L / double(o.n_steps);
            double i1 = 0.0, i2 = 0.0;
            for (std::size_t i = 0; i <= o.n_steps; ++i) {
                const double e = std::exp(g * dx * double(i) + b1.values[i]);
                const double w = i == 0 || i == o.n_steps ? 0.5 : 1.0;
                i1 += w * e;
                i2 += w * e * e;
            }
            i1 *= dx;
            i2 *= dx;
            const double F = 0.5 * g * g - 0.5 * i2 / (i1 * i1);
            acc.add(tilt * F, tilt);
        }
    });
    MCEstimate e;
    const double n = double(m.n);
    const double A = m.a / n, B = m.b / n;
    const double va = m.aa / n - A * A, vb = m.bb / n - B * B, cab = m.ab / n - A * B;
    const double R = A / B;
    e.mean = R;
    // delta method for the ratio of means
    e.stderr_ = std::sqrt(std::max(0.0, va - 2.0 * R * cab + R * R * vb) / (n - 1.0)) / std::fabs(B);
    e.denom_mean = B;
    e.denom_stderr = std::sqrt(std::max(0.0, vb) / (n - 1.0));
    e.n_samples = m.n;
    e.seed = o.seed;
    e.n_steps = o.n_steps;
    return e;
}

/// Sample variance of B(L/2) over bridge paths, with its standard error.
inline std::pair<double, double> bridge_midpoint_variance(double L, const MCOptions& o = {}) {
    require(o.n_steps % 2 == 0, "need an even step count");
    auto m = detail::run_chunks(o, [&](std::mt19937_64& rng, detail::Moments& acc, std::size_t cnt) {
        BrownianPath p{o.n_steps, L, {}, PathKind::bridge};
        for (std::size_t k = 0; k < cnt; ++k) {
            sample_path(rng, p);
            const double x = p.values[o.n_steps / 2];
            acc.add(x * x, 0.0);
        }
    });
    const double n = double(m.n), mean = m.a / n;
    return {mean, std::sqrt(std::max(0.0, m.aa / n - mean * mean) / (n - 1.0))};
}

}  // namespace kpzi
