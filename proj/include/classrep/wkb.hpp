#pragma once

#include <cmath>
#include <utility>

#include "classrep/errors.hpp"
#include "classrep/special_functions.hpp"

namespace classrep {

struct WkbResult {
    int n = 0;
    int m = 1;
    int order = 0;
    double epsilon = 0.0;
    double b1 = 0.0;   // B(1/(2m), 3/2)
    double b2 = 0.0;   // B(1−1/(2m), 1/2)
};

namespace detail {
inline void wkb_check(int n, int m) {
    if (n < 0) throw DomainError("wkb: n must be ≥ 0");
    if (m < 1) throw DomainError("wkb: m must be ≥ 1");
}
} // namespace detail

// Zeroth order: ε^{(m+1)/(2m)} = π m (n + 1/2) / B₁.
inline WkbResult wkb0(int n, int m) {
    detail::wkb_check(n, m);
    WkbResult r{n, m, 0};
    r.b1 = beta(1.0 / (2.0 * m), 1.5);
    r.b2 = beta(1.0 - 1.0 / (2.0 * m), 0.5);
    const double X = M_PI * m * (n + 0.5) / r.b1;
    r.epsilon = std::pow(X, 2.0 * m / (m + 1.0));
    return r;
}

// Second order: the discriminant picks up the B₁B₂(2m−1)(m−1)/(6π²m²)
// correction; at m = 1 the correction vanishes and wkb2 == wkb0 == 2n+1.
inline WkbResult wkb2(int n, int m) {
    detail::wkb_check(n, m);
    WkbResult r{n, m, 2};
    r.b1 = beta(1.0 / (2.0 * m), 1.5);
    r.b2 = beta(1.0 - 1.0 / (2.0 * m), 0.5);
    const double q = n + 0.5;
    const double corr = r.b1 * r.b2 * (2.0 * m - 1.0) * (m - 1.0) / (6.0 * M_PI * M_PI * m * m);
    const double X = M_PI * m / (2.0 * r.b1) * (q + std::sqrt(q * q + corr));
    r.epsilon = std::pow(X, 2.0 * m / (m + 1.0));
    return r;
}

// Large-m asymptotes of the two orders, returned as a pair.  The first is a
// genuine constant, π²(n+1/2)²/4.  The second retains its m-dependence
// (4m/3π² under the root) and therefore diverges as m grows; it is evaluated
// verbatim as a function of both n and m.
inline std::pair<double, double> wkb_limits(int n, int m) {
    detail::wkb_check(n, m);
    const double q = n + 0.5;
    const double first = M_PI * M_PI * q * q / 4.0;
    const double root = std::sqrt(q * q + 4.0 * m / (3.0 * M_PI * M_PI));
    const double sum = q + root;
    const double second = M_PI * M_PI / 16.0 * sum * sum;
    return {first, second};
}

} // namespace classrep
