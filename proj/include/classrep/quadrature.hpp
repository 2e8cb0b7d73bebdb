#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

#include "classrep/errors.hpp"

namespace classrep {

// 15-point Kronrod rule with the embedded 7-point Gauss rule.  Nodes and
// weights are the standard QUADPACK constants; the Gauss weights apply to
// every other Kronrod node (indices 1,3,5,7 of the positive half).
namespace gk15 {

inline constexpr double nodes[8] = {
    0.99145537112081263921, 0.94910791234275852453,
    0.86486442335976907279, 0.74153118559939443986,
    0.58608723546769113029, 0.40584515137739716691,
    0.20778495500789846760, 0.0,
};
inline constexpr double kronrod_w[8] = {
    0.02293532201052922496, 0.06309209262997855329,
    0.10479001032225018384, 0.14065325971552591875,
    0.16900472663926790283, 0.19035057806478540991,
    0.20443294007529889241, 0.20948214108472782801,
};
inline constexpr double gauss_w[4] = {
    0.12948496616886969327, 0.27970539148927666790,
    0.38183005050511894495, 0.41795918367346938776,
};

// One application of the rule on [a,b]; second element is the usual
// (200·|K15−G7|)^1.5 error estimate scaled to the interval.
template <class F>
std::pair<double, double> apply(F&& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double hl = 0.5 * (b - a);
    const double fc = f(mid);
    double acc_k = kronrod_w[7] * fc;
    double acc_g = gauss_w[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = hl * nodes[i];
        const double fv = f(mid - dx) + f(mid + dx);
        acc_k += kronrod_w[i] * fv;
        if (i % 2 == 1) acc_g += gauss_w[i / 2] * fv;
    }
    const double value = acc_k * hl;
    double err = std::abs((acc_k - acc_g) * hl);
    // QUADPACK-style sharpening of the raw difference.
    const double scale = std::abs(value) + 1e-300;
    if (err > 0) err = scale * std::pow(std::min(1.0, 200.0 * err / scale), 1.5);
    return {value, err};
}

} // namespace gk15

struct QuadOptions {
    double rel_tol = 1e-9;
    double abs_tol = 0.0;   // extra absolute floor on the target accuracy
    int max_intervals = 4000;
};

struct QuadOutcome {
    double value = 0.0;
    double error = 0.0;
    int intervals = 1;
};

// Globally adaptive bisection: always split the interval with the largest
// error estimate until the summed estimate meets max(abs_tol, rel_tol·|I|).
template <class F>
QuadOutcome integrate_gk(F&& f, double a, double b, QuadOptions opt = {}) {
    struct Seg {
        double a, b, value, error;
        bool operator<(const Seg& o) const { return error < o.error; }
    };
    auto [v0, e0] = gk15::apply(f, a, b);
    std::priority_queue<Seg> heap;
    heap.push({a, b, v0, e0});
    double total_v = v0, total_e = e0;
    int n = 1;
    while (total_e > std::max(opt.abs_tol, opt.rel_tol * std::abs(total_v))) {
        if (n >= opt.max_intervals)
            throw NumericError("adaptive quadrature: interval budget exhausted, error estimate " +
                               std::to_string(total_e));
        const Seg worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b) {
            // Interval at floating-point resolution; accept its estimate as is.
            if (heap.empty()) break;
            // Re-inserting with zero error retires the interval.
            heap.push({worst.a, worst.b, worst.value, 0.0});
            total_e -= worst.error;
            continue;
        }
        auto [v1, e1] = gk15::apply(f, worst.a, m);
        auto [v2, e2] = gk15::apply(f, m, worst.b);
        total_v += v1 + v2 - worst.value;
        total_e += e1 + e2 - worst.error;
        heap.push({worst.a, m, v1, e1});
        heap.push({m, worst.b, v2, e2});
        ++n;
    }
    return {total_v, total_e, n};
}

// Same, over a pre-split list of panels (breakpoints must be increasing).
// Useful when the integrand has known scale changes, e.g. geometric panels
// toward an integrable endpoint.
template <class F>
QuadOutcome integrate_panels(F&& f, std::span<const double> breaks, QuadOptions opt = {}) {
    if (breaks.size() < 2) throw DomainError("integrate_panels: need at least two breakpoints");
    QuadOutcome total;
    total.intervals = 0;
    // First pass at loose tolerance to learn the overall magnitude, so panel
    // absolute tolerances can be meaningful for near-zero panels.
    double rough = 0.0;
    for (size_t i = 0; i + 1 < breaks.size(); ++i)
        rough += gk15::apply(f, breaks[i], breaks[i + 1]).first;
    QuadOptions per = opt;
    per.abs_tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(rough)) /
                  static_cast<double>(breaks.size());
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
        auto out = integrate_gk(f, breaks[i], breaks[i + 1], per);
        total.value += out.value;
        total.error += out.error;
        total.intervals += out.intervals;
    }
    return total;
}

} // namespace classrep
