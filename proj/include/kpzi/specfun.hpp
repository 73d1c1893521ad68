#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "error.hpp"

namespace kpzi {

using cplx = std::complex<double>;

inline constexpr double euler_gamma = 0.57721566490153286060651209008240243;

namespace detail {

inline bool is_nonpositive_integer(double x) {
    return x <= 0.0 && x == std::round(x);
}

inline void check_pole(cplx z, const char* who) {
    if (z.imag() == 0.0 && is_nonpositive_integer(z.real()))
        throw pole_error(std::string(who) + ": pole at non-positive integer");
}

}  // namespace detail

/// Principal branch of log Gamma. Upward recurrence to Re z >= 10, then Stirling.
inline cplx log_gamma(cplx z) {
    detail::check_pole(z, "log_gamma");
    cplx shift = 0.0;
    while (z.real() < 10.0) {
        shift += std::log(z);
        z += 1.0;
    }
    // Bernoulli terms B_{2k} / (2k (2k-1))
    static constexpr double c[] = {1.0 / 12.0,        -1.0 / 360.0,    1.0 / 1260.0,
                                   -1.0 / 1680.0,     1.0 / 1188.0,    -691.0 / 360360.0,
                                   1.0 / 156.0,       -3617.0 / 122400.0};
    const cplx iz = 1.0 / z;
    const cplx iz2 = iz * iz;
    cplx sum = 0.0;
    cplx p = iz;
    for (double ck : c) {
        sum += ck * p;
        p *= iz2;
    }
    const double half_log_2pi = 0.91893853320467274178032973640562;
    return (z - 0.5) * std::log(z) - z + half_log_2pi + sum - shift;
}

inline cplx digamma(cplx z) {
    detail::check_pole(z, "digamma");
    cplx shift = 0.0;
    while (z.real() < 10.0) {
        shift += 1.0 / z;
        z += 1.0;
    }
    // B_{2k} / (2k)
    static constexpr double c[] = {1.0 / 12.0,  -1.0 / 120.0,      1.0 / 252.0, -1.0 / 240.0,
                                   1.0 / 132.0, -691.0 / 32760.0,  1.0 / 12.0};
    const cplx iz2 = 1.0 / (z * z);
    cplx sum = 0.0;
    cplx p = iz2;
    for (double ck : c) {
        sum += ck * p;
        p *= iz2;
    }
    return std::log(z) - 0.5 / z - sum - shift;
}

/// log |Gamma(a + iy)|^2, even in y.
inline double log_gamma_abs2_line(double a, double y) {
    y = std::fabs(y);
    if (y == 0.0 && detail::is_nonpositive_integer(a))
        throw pole_error("gamma_abs2_line: pole");
    return 2.0 * log_gamma(cplx(a, y)).real();
}

inline double gamma_abs2_line(double a, double y) {
    return std::exp(log_gamma_abs2_line(a, y));
}

/// log of 1/(Gamma(2iy) Gamma(-2iy)) = log(2|y| sinh(2 pi |y|) / pi); -inf at y = 0.
inline double log_recip_gamma_pair_line(double y) {
    using std::numbers::pi;
    y = std::fabs(y);
    if (y == 0.0) return -INFINITY;
    const double t = 2.0 * pi * y;
    // log sinh t = t - log 2 + log(1 - e^{-2t})
    return std::log(2.0 * y / pi) + t - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * t));
}

/// 1/Gamma(x), entire; zero at the poles of Gamma.
inline double rgamma(double x) {
    if (detail::is_nonpositive_integer(x)) return 0.0;
    if (x > 171.0) return 0.0;
    return 1.0 / std::tgamma(x);
}

/// (a)_n = a (a+1) ... (a+n-1)
inline double pochhammer(double a, int n) {
    double p = 1.0;
    for (int k = 0; k < n; ++k) p *= a + k;
    return p;
}

inline double erfc(double x) { return std::erfc(x); }

/// Tricomi U(a, b, x) from its Laplace integral, a > 0, x > 0.
inline double tricomi_u(double a, double b, double x) {
    if (!(a > 0.0) || !(x > 0.0)) throw domain_error("tricomi_u: need a > 0 and x > 0");
    // s = x t puts the exponential on unit scale
    const double e = b - a - 1.0;
    auto f = [=](double s) {
        if (s == 0.0) return 0.0;
        return std::exp((a - 1.0) * std::log(s) + e * std::log1p(s / x) - s);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    const double I = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-15,
                                          &err);
    return std::exp(-a * std::log(x) - std::lgamma(a)) * I;
}

/// Li_s(x) for |x| <= 1 - 1e-9. Direct series for |x| <= 1/2; for x near 1 the
/// expansion in mu = log x around the branch point; negative x by the duplication identity.
inline double polylog(double s, double x) {
    if (!(std::fabs(x) <= 1.0 - 1e-9)) throw domain_error("polylog: |x| must be <= 1 - 1e-9");
    if (s <= 1.0) throw domain_error("polylog: s must exceed 1");
    if (std::fabs(x) <= 0.5) {
        double sum = 0.0, p = x;
        for (int k = 1; k < 200; ++k) {
            const double t = p / std::pow(double(k), s);
            sum += t;
            if (std::fabs(t) < 1e-18 * std::fabs(sum)) break;
            p *= x;
        }
        return sum;
    }
    if (x < 0.0) return std::pow(2.0, 1.0 - s) * polylog(s, x * x) - polylog(s, -x);
    const double mu = std::log(x);
    double sum = std::tgamma(1.0 - s) * std::pow(-mu, s - 1.0);
    double p = 1.0;
    for (int k = 0; k < 80; ++k) {
        const double t = boost::math::zeta(s - k) * p;
        sum += t;
        if (k > 2 && std::fabs(t) < 1e-18) break;
        p *= mu / (k + 1);
    }
    return sum;
}

/// E_a(x) = int_1^inf e^{-xt} t^{-a} dt = e^{-x} U(1, 2-a, x).
inline double exp_integral_E(double a, double x) {
    if (!(x > 0.0)) throw domain_error("exp_integral_E: need x > 0");
    return std::exp(-x) * tricomi_u(1.0, 2.0 - a, x);
}

}  // namespace kpzi
