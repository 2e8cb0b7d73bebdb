#pragma once

#include <cmath>
#include <limits>

#include "classrep/errors.hpp"
#include "classrep/quadrature.hpp"

namespace classrep {

// Coordinate map x = sinh(c t) used for the sinc discretization.  A uniform
// t-grid on [−t_max, t_max] becomes an x-grid that is dense near the origin
// and geometrically stretched into the classically forbidden region, which is
// where the double-exponential decay of the transformed eigenfunctions lives.
struct SinhMap {
    double c = 1.0;

    double x(double t) const { return std::sinh(c * t); }
    double dx(double t) const { return c * std::cosh(c * t); }
    double d2x(double t) const { return c * c * std::sinh(c * t); }
    double d3x(double t) const { return c * c * c * std::cosh(c * t); }
    double d4x(double t) const { return c * c * c * c * std::sinh(c * t); }
    double t_of_x(double xv) const { return std::asinh(xv) / c; }

    // Schwarzian derivative {x; t} = x'''/x' − (3/2)(x''/x')², which for the
    // sinh map collapses to c²(1 − (3/2) tanh²(ct)).
    double schwarzian(double t) const {
        const double th = std::tanh(c * t);
        return c * c * (1.0 - 1.5 * th * th);
    }
};

inline SinhMap make_sinh_map(double x_cut, double t_max) {
    if (!(x_cut > 0.0) || !(t_max > 0.0))
        throw DomainError("make_sinh_map: x_cut and t_max must be positive");
    return SinhMap{std::asinh(x_cut) / t_max};
}

// Local momentum magnitude sqrt(|x^{2m} − ε|) in the forbidden region,
// organized so that x^{2m} may overflow where sqrt(x^{2m}) does not.
inline double forbidden_momentum(int m, double eps, double x) {
    const double w = std::pow(std::abs(x), m);   // sqrt of the potential
    if (w > 1e30) return w;                      // ε ≪ w², correction < 1e-60
    const double d = w * w - eps;
    return d > 0.0 ? std::sqrt(d) : 0.0;
}

// Tunneling action S(x) = ∫_{tp}^{x} sqrt(x'^{2m} − ε) dx' for x beyond the
// turning point tp = ε^{1/(2m)}.  The substitution x' = tp + u² removes the
// square-root vanishing at the lower endpoint.
inline double tunneling_action(int m, double eps, double x_outer) {
    if (!(eps > 0.0)) throw DomainError("tunneling_action: eps must be positive");
    const double tp = std::pow(eps, 1.0 / (2.0 * m));
    if (x_outer <= tp) return 0.0;
    const double u_max = std::sqrt(x_outer - tp);
    auto f = [&](double u) { return 2.0 * u * forbidden_momentum(m, eps, tp + u * u); };
    QuadOptions opt;
    opt.rel_tol = 1e-11;
    return integrate_gk(f, 0.0, u_max, opt).value;
}

// Smallest x with S(x) = target (monotonicity makes bisection safe).
inline double x_at_action(int m, double eps, double target) {
    if (!(target >= 0.0)) throw DomainError("x_at_action: target action must be ≥ 0");
    const double tp = std::pow(eps, 1.0 / (2.0 * m));
    if (target == 0.0) return tp;
    double hi = tp + 1.0;
    int guard = 0;
    while (tunneling_action(m, eps, hi) < target) {
        hi = tp + 2.0 * (hi - tp);
        if (++guard > 80) throw NumericError("x_at_action: failed to bracket the target action");
    }
    double lo = tp;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (tunneling_action(m, eps, mid) < target ? lo : hi) = mid;
        if (hi - lo < 1e-13 * hi) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace classrep
