#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "classrep/errors.hpp"
#include "classrep/quadrature.hpp"

namespace classrep {

inline double ln_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive, got " + std::to_string(x));
    return std::lgamma(x);
}

inline double beta(double p, double q) {
    if (!(p > 0.0) || !(q > 0.0))
        throw DomainError("beta: arguments must be positive, got (" + std::to_string(p) + ", " +
                          std::to_string(q) + ")");
    return std::exp(std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q));
}

// Physicists' Hermite polynomial H_n, three-term recurrence.
inline double hermite(int n, double x) {
    if (n < 0) throw DomainError("hermite: order must be non-negative");
    double hm = 1.0;              // H_0
    if (n == 0) return hm;
    double h = 2.0 * x;           // H_1
    for (int k = 1; k < n; ++k) {
        const double hn = 2.0 * x * h - 2.0 * k * hm;
        hm = h;
        h = hn;
    }
    if (!std::isfinite(h)) throw RangeError("hermite: value overflowed for n=" + std::to_string(n));
    return h;
}

// Laguerre polynomial L_n.
inline double laguerre(int n, double x) {
    if (n < 0) throw DomainError("laguerre: order must be non-negative");
    double lm = 1.0;              // L_0
    if (n == 0) return lm;
    double l = 1.0 - x;           // L_1
    for (int k = 1; k < n; ++k) {
        const double ln = ((2.0 * k + 1.0 - x) * l - k * lm) / (k + 1.0);
        lm = l;
        l = ln;
    }
    if (!std::isfinite(l)) throw RangeError("laguerre: value overflowed for n=" + std::to_string(n));
    return l;
}

// k!! with the convention (−1)!! = 0!! = 1.  Exact product while it fits
// comfortably in a double, log-space via lgamma beyond that.
inline double double_factorial(int k) {
    if (k < -1) throw DomainError("double_factorial: argument must be ≥ −1");
    if (k <= 1) return 1.0;
    if (k <= 300) {
        double r = 1.0;
        for (int j = k; j > 1; j -= 2) r *= j;
        return r;
    }
    if (k % 2 == 0) {
        const double j = k / 2;
        return std::exp(j * std::log(2.0) + std::lgamma(j + 1.0));
    }
    const double j = (k - 1) / 2;
    return std::exp(std::lgamma(k + 1.0) - j * std::log(2.0) - std::lgamma(j + 1.0));
}

struct SeriesResult {
    double value = 0.0;
    int terms_used = 0;
    double tail_bound = 0.0;
};

namespace detail {

// Truncated asymptotic Hurwitz zeta ζ(s,a) for large a — plenty for the
// Euler–Maclaurin closure below (a ≥ 500, error < 1e-20 at s ≤ 9/2).
inline double hurwitz_zeta_asym(double s, double a) {
    const double as = std::pow(a, -s);
    return std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * as + s * as / (12.0 * a) -
           s * (s + 1.0) * (s + 2.0) * as / (720.0 * a * a * a);
}

inline int s_series_p_max(int m) { return (m % 2 == 0) ? m / 2 - 1 : (m - 1) / 2; }

} // namespace detail

// Σ_{k≥0} (2k−1)!!/[(2k)!! ((2k+1)m − 2p)].  Terms fall off only like
// k^{−3/2}, so a few thousand direct terms are followed by an
// Euler–Maclaurin tail built on the asymptotics of the summand; the
// remaining uncertainty is reported as tail_bound.
inline SeriesResult s_series(int m, int p) {
    if (m < 1 || p < 1) throw DomainError("s_series: require m ≥ 1 and p ≥ 1");
    const int p_max = detail::s_series_p_max(m);
    if (p > p_max)
        throw DomainError("s_series: p=" + std::to_string(p) + " outside validity range (p_max=" +
                          std::to_string(p_max) + " for m=" + std::to_string(m) + ")");
    // p ≤ p_max guarantees every denominator (2k+1)m − 2p is positive.
    double ratio = 1.0;                        // (2k−1)!!/(2k)!! at k=0
    double sum = 1.0 / (double(m) - 2.0 * p);
    long k = 0;
    const double delta = (double(m) - 2.0 * p) / (2.0 * m);
    const double c1 = -0.125 - delta;
    const double c2 = 1.0 / 128.0 + delta / 8.0 + delta * delta;
    const double pref = 1.0 / (2.0 * m * std::sqrt(M_PI));
    double tail = 0.0, bound = std::numeric_limits<double>::infinity();
    while (true) {
        for (int i = 0; i < 500; ++i) {
            ++k;
            ratio *= (2.0 * k - 1.0) / (2.0 * k);
            sum += ratio / ((2.0 * k + 1.0) * m - 2.0 * p);
        }
        const double a = double(k) + 1.0;
        tail = pref * (detail::hurwitz_zeta_asym(1.5, a) + c1 * detail::hurwitz_zeta_asym(2.5, a) +
                       c2 * detail::hurwitz_zeta_asym(3.5, a));
        bound = 1.5 * pref * detail::hurwitz_zeta_asym(4.5, a);
        if (bound < 1e-12) break;
        if (k >= 10'000'000)
            throw NumericError("s_series: term cap reached, tail bound still " + std::to_string(bound));
    }
    return {sum + tail, static_cast<int>(k) + 1, bound};
}

namespace detail {

// Direct power series Σ (a)_k (b)_k / ((c)_k k!) z^k, |z| < 1.
inline double hyp2f1_series(double a, double b, double c, double z) {
    double term = 1.0, sum = 1.0;
    int quiet = 0;
    for (int k = 0; k < 200000; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) {
            if (++quiet == 3) return sum;
        } else {
            quiet = 0;
        }
    }
    throw NumericError("gauss_2f1: series failed to converge, last term " + std::to_string(term));
}

inline bool is_nonpositive_int(double x) { return x <= 0.0 && x == std::floor(x); }

// Euler integral route: F = 1/B(b,c−b) ∫₀¹ t^{b−1}(1−t)^{c−b−1}(1−zt)^{−a} dt,
// valid for c > b > 0, z ≤ 0.  Both endpoint singularities are absorbed by
// power substitutions t = u^{1/b} (left half) and 1−t = w^{1/(c−b)} (right),
// which make the transformed integrands bounded.
inline double hyp2f1_euler(double a, double b, double c, double z) {
    const double cb = c - b;
    const double qa = 1.0 / b, qb = 1.0 / cb;
    auto left = [&](double u) {
        const double t = std::pow(u, qa);
        return qa * std::pow(1.0 - t, cb - 1.0) * std::pow(1.0 - z * t, -a);
    };
    auto right = [&](double w) {
        const double omt = std::pow(w, qb);   // 1 − t
        const double t = 1.0 - omt;
        return qb * std::pow(t, b - 1.0) * std::pow(1.0 - z * t, -a);
    };
    QuadOptions opt;
    opt.rel_tol = 1e-12;
    const double u_split = std::pow(0.5, b);
    const double w_split = std::pow(0.5, cb);
    const double I = integrate_gk(left, 0.0, u_split, opt).value +
                     integrate_gk(right, 0.0, w_split, opt).value;
    return I / beta(b, cb);
}

} // namespace detail

// Gauss hypergeometric F(a,b;c;z) on the half-line z ≤ 0.
//
// Dispatch: terminating polynomial when a or b is a non-positive integer;
// Pfaff transform z→z/(z−1) for moderate |z| (argument lands in [0,0.85));
// the 1/z connection formula for large |z|; and when the connection formula
// degenerates (a−b integer) an adaptive Euler-integral evaluation.
inline double gauss_2f1(double a, double b, double c, double z) {
    if (detail::is_nonpositive_int(c))
        throw DomainError("gauss_2f1: c must not be a non-positive integer");
    if (!(z <= 0.0)) throw DomainError("gauss_2f1: only z ≤ 0 is supported");
    if (z == 0.0) return 1.0;

    if (detail::is_nonpositive_int(a) || detail::is_nonpositive_int(b)) {
        if (detail::is_nonpositive_int(b) && (!detail::is_nonpositive_int(a) || b > a))
            std::swap(a, b);                  // terminate on the shorter index
        const int nterms = static_cast<int>(-a);
        double term = 1.0, sum = 1.0;
        for (int k = 0; k < nterms; ++k) {
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
            sum += term;
        }
        return sum;
    }

    if (z > -5.667) {
        const double w = z / (z - 1.0);       // in (0, 0.85)
        return std::pow(1.0 - z, -a) * detail::hyp2f1_series(a, c - b, c, w);
    }

    const double d = a - b;
    const bool degenerate = std::abs(d - std::round(d)) < 1e-8 ||
                            detail::is_nonpositive_int(1.0 - c + a) ||
                            detail::is_nonpositive_int(1.0 - c + b);
    if (!degenerate) {
        const double zi = 1.0 / z;
        const double t1 = std::tgamma(c) * std::tgamma(b - a) /
                          (std::tgamma(b) * std::tgamma(c - a)) * std::pow(-z, -a) *
                          detail::hyp2f1_series(a, 1.0 - c + a, 1.0 - b + a, zi);
        const double t2 = std::tgamma(c) * std::tgamma(a - b) /
                          (std::tgamma(a) * std::tgamma(c - b)) * std::pow(-z, -b) *
                          detail::hyp2f1_series(b, 1.0 - c + b, 1.0 - a + b, zi);
        return t1 + t2;
    }
    if (c > b && b > 0.0) return detail::hyp2f1_euler(a, b, c, z);
    if (c > a && a > 0.0) return detail::hyp2f1_euler(b, a, c, z);
    throw NumericError("gauss_2f1: degenerate parameters outside the supported Euler-integral domain");
}

} // namespace classrep
