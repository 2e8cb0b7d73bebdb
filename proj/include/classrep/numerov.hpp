#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "classrep/errors.hpp"
#include "classrep/mapping.hpp"
#include "classrep/wkb.hpp"

namespace classrep {

namespace detail {

// Fixed-step lattice for the oracle.  Numerov trajectories in double carry a
// relative noise of order steps^{3/2}·eps_machine (rounding of the second
// difference, integrated twice), which is ~3e-10 at h = 1e-4 and ruins the
// last two digits of an eigenvalue.  Everything here therefore runs in long
// double; the 80-bit significand pushes that floor below 1e-13.  The
// potential is tabulated once per solve so the sweeps are pure arithmetic.
struct NumerovLattice {
    long double h = 0.0L;
    int steps = 0;                   // lattice covers x = 0 .. steps·h
    std::vector<long double> v;      // v[k] = (k·h)^{2m}

    NumerovLattice(int m, double step, double x_end) {
        h = step;
        steps = static_cast<int>(x_end / step);
        v.resize(steps + 2);
        for (int k = 0; k < static_cast<int>(v.size()); ++k) {
            const long double x = k * h;
            v[k] = std::pow(x * x, static_cast<long double>(m));
        }
    }
};

// Count sign changes of the parity solution on (0, steps·h].  A nondecreasing
// step function of eps that jumps near each eigenvalue of the matching
// parity; used only for bracketing.  Near threshold the new node is a tail
// feature whose visibility is noise-limited, so the jump can sit noticeably
// off the eigenvalue (for m ~ 100 even a few percent): treat the result as a
// locator, never as the answer.
inline int numerov_node_count(const NumerovLattice& lat, bool even, double eps) {
    const long double h = lat.h, e = eps;
    long double y0, y1;
    if (even) {
        y0 = 1.0L;
        y1 = 1.0L - 0.5L * (e - lat.v[0]) * h * h;   // ψ(h)/ψ(0) to O(h⁴)
    } else {
        y0 = 0.0L;
        y1 = h;
    }
    int count = 0;
    long double fm = 1.0L + h * h * (e - lat.v[0]) / 12.0L;
    long double fc = 1.0L + h * h * (e - lat.v[1]) / 12.0L;
    for (int k = 1; k < lat.steps; ++k) {
        const long double fp = 1.0L + h * h * (e - lat.v[k + 1]) / 12.0L;
        const long double y2 = ((12.0L - 10.0L * fc) * y1 - fm * y0) / fp;
        if (y1 * y2 < 0.0L) ++count;
        y0 = y1;
        y1 = y2;
        fm = fc;
        fc = fp;
        if (std::abs(y1) > 1e250L) {
            y0 *= 1e-250L;
            y1 *= 1e-250L;
        }
    }
    return count;
}

// ψ'/ψ at x = K·h from the parity start at the origin (centered difference on
// the lattice).  K sits just past the turning point, so the sweep never
// enters the deep forbidden region where the decaying solution drowns.
inline long double log_derivative_out(const NumerovLattice& lat, bool even,
                                      double eps, int K) {
    const long double h = lat.h, e = eps;
    long double y0, y1;
    if (even) {
        y0 = 1.0L;
        y1 = 1.0L - 0.5L * (e - lat.v[0]) * h * h;
    } else {
        y0 = 0.0L;
        y1 = h;
    }
    long double fm = 1.0L + h * h * (e - lat.v[0]) / 12.0L;
    long double fc = 1.0L + h * h * (e - lat.v[1]) / 12.0L;
    long double below = 0.0L, at = 0.0L;
    for (int k = 1; k <= K; ++k) {
        const long double fp = 1.0L + h * h * (e - lat.v[k + 1]) / 12.0L;
        const long double y2 = ((12.0L - 10.0L * fc) * y1 - fm * y0) / fp;
        if (k == K - 1) below = y1;
        if (k == K) at = y1;
        y0 = y1;
        y1 = y2;
        fm = fc;
        fc = fp;
    }
    return (y1 - below) / (2.0L * h * at);   // y1 now holds the value at (K+1)h
}

// ψ'/ψ at x = K·h integrating inward from the far edge with a decaying WKB
// seed.  Inward is the stable direction: the physical solution grows toward
// the well, so seed contamination dies off.
inline long double log_derivative_in(const NumerovLattice& lat, double eps, int K) {
    const long double h = lat.h, e = eps;
    const int M = lat.steps - K;
    const long double kap = std::sqrt(lat.v[lat.steps] - e);
    long double y0 = 1.0L;
    long double y1 = y0 * (1.0L + kap * h);
    long double fm = 1.0L + h * h * (e - lat.v[lat.steps]) / 12.0L;
    long double fc = 1.0L + h * h * (e - lat.v[lat.steps - 1]) / 12.0L;
    long double above = 0.0L, at = 0.0L;
    for (int j = 1; j <= M; ++j) {
        const int k = lat.steps - (j + 1);   // x index of the freshly computed value
        const long double fp = 1.0L + h * h * (e - lat.v[k]) / 12.0L;
        const long double y2 = ((12.0L - 10.0L * fc) * y1 - fm * y0) / fp;
        if (k == K + 1) above = y2;
        if (k == K) at = y2;
        y0 = y1;
        y1 = y2;
        fm = fc;
        fc = fp;
        if (std::abs(y1) > 1e250L) {
            y0 *= 1e-250L;
            y1 *= 1e-250L;
            above *= 1e-250L;
            at *= 1e-250L;
        }
    }
    return (above - y1) / (2.0L * h * at);   // y1 now holds the value at (K−1)h
}

} // namespace detail

// Eigenvalue of state n for v = x^{2m} on a fixed-step Numerov lattice.
// Deliberately independent of the collocation solver: shares nothing with it
// beyond the closed-form order-0/order-2 phase-integral estimates used to
// seed the bracket.
//
// Two stages.  Node-counting bisection first, which is immune to index
// confusion but whose jump can sit off the eigenvalue by the tail-visibility
// displacement noted above.  Then the root of the log-derivative mismatch
// F(ε) = (ψ'/ψ)_outward − (ψ'/ψ)_inward at a matching point just outside the
// turning point.  F decreases strictly in ε between its poles and vanishes
// exactly at the spectrum; the poles sit a sizable fraction of the level
// spacing away, far beyond the node-count displacement, so growing a bracket
// around the node-count jump until F changes sign always isolates the right
// root.
inline double oracle_solve(int m, int n, double h = 1e-4) {
    if (m < 1) throw DomainError("oracle_solve: m must be ≥ 1");
    if (n < 0) throw DomainError("oracle_solve: n must be ≥ 0");
    if (!(h > 0.0) || h > 0.01) throw DomainError("oracle_solve: step must lie in (0, 0.01]");

    const double e0 = wkb0(n, m).epsilon;
    const double e2 = wkb2(n, m).epsilon;
    double lo = 0.5 * e0;
    double hi = 1.5 * e2 + 1.0;

    // Integration domain, fixed across the bisection so node counts at
    // different trial energies are comparable.  Three caps: the classically
    // forbidden span needed before truncation error is negligible (action
    // ≈ 35 ⇒ amplitude ratio e^{−35}), a generous fallback width, and the
    // lattice stability bound h²(v − ε) ≤ 1/2.
    const double tp_hi = std::pow(hi, 1.0 / (2.0 * m));
    double x_end = tp_hi + 10.0 * std::pow(hi, -(m - 1.0) / (2.0 * m));
    x_end = std::min(x_end, x_at_action(m, hi, 35.0));
    x_end = std::min(x_end, std::pow(0.5 / (h * h) + hi, 1.0 / (2.0 * m)));
    if (x_end <= tp_hi * (1.0 + 1e-9))
        throw NumericError("oracle_solve: stability cap leaves no forbidden region; reduce h");

    const detail::NumerovLattice lat(m, h, x_end);
    const bool even = (n % 2 == 0);
    const int target = even ? n / 2 + 1 : (n + 1) / 2;
    auto above = [&](double eps) {
        return detail::numerov_node_count(lat, even, eps) >= target;
    };

    int guard = 0;
    while (above(lo)) {
        lo *= 0.5;
        if (lo < 1e-12 || ++guard > 60)
            throw NumericError("oracle_solve: could not bracket from below");
    }
    guard = 0;
    while (!above(hi)) {
        hi *= 1.6;
        if (++guard > 60) throw NumericError("oracle_solve: could not bracket from above");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (above(mid) ? hi : lo) = mid;
        if (hi - lo < 1e-3 * hi) break;
    }
    const double flip = 0.5 * (lo + hi);

    // Matching point at tunneling action ≈ 0.3 past the turning point: deep
    // enough that the inward seed has relaxed, close enough that the outward
    // sweep stays well conditioned and the poles of F stay far away.
    int K = static_cast<int>(std::lround(x_at_action(m, flip, 0.3) / h));
    if (K < 2) K = 2;
    if (K > lat.steps - 3) K = lat.steps - 3;
    auto mismatch = [&](double eps) {
        return detail::log_derivative_out(lat, even, eps, K) -
               detail::log_derivative_in(lat, eps, K);
    };

    double delta = 1e-6 * std::max(1.0, flip);
    const double delta_cap = 0.04 * std::max(1.0, flip);
    double blo = flip - delta, bhi = flip + delta;
    while (!(mismatch(blo) > 0.0 && mismatch(bhi) < 0.0)) {
        delta *= 2.0;
        if (delta > delta_cap)
            throw NumericError("oracle_solve: mismatch bracket not found near node-count jump");
        blo = flip - delta;
        bhi = flip + delta;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (blo + bhi);
        if (mid == blo || mid == bhi) break;
        (mismatch(mid) > 0.0 ? blo : bhi) = mid;
    }
    return 0.5 * (blo + bhi);
}

} // namespace classrep
