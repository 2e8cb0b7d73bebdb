#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "classrep/errors.hpp"

namespace classrep {

// Energy grid for building f_n(ε).  Three segments:
//   [0, body_begin)   "singular": uniform in s = ε^{1/(2m)}, resolving the
//                     ε→0 divergence and (at large m) the nodes, which pile
//                     up at s = k/(n+1);
//   [body_begin, tail_begin)  linear in ε through the classically dominant
//                     range around ε_n;
//   [tail_begin, end) log-spaced tail out to the support edge of ρ_n, which
//                     the mean-energy integral needs.
// Segment indices are kept so integrals can run in the natural coordinate of
// each piece.
struct EnergyGrid {
    std::vector<double> eps;
    std::size_t body_begin = 0;
    std::size_t tail_begin = 0;
    std::string tag = "custom";
};

// The lower cutoff in s: the plain recipe ε_min = 1e-8·ε_n is kept whenever
// representable, but for large m the interesting structure lives at
// ε = s^{2m} with s of order one, and f ~ ε^{-1+3/(2m)} overflows a double
// once s drops much below 0.05.  The mass below the cutoff is completed
// analytically by the caller from the known small-ε form.
inline double grid_s_min(double eps_n, int m) {
    const double from_ratio = std::pow(1e-8 * eps_n, 1.0 / (2.0 * m));
    // keep ε = s^{2m} (and f ~ ε^{−1+3/2m}) inside double range at large m
    const double floor = std::exp(-690.0 / (2.0 * m));
    return std::max(std::min(0.02, from_ratio), floor);
}

inline EnergyGrid energy_grid(double eps_n, int m, double eps_max, int n) {
    if (!(eps_n > 0.0)) throw DomainError("energy_grid: eps_n must be positive");
    if (m < 1) throw DomainError("energy_grid: m must be >= 1");
    if (n < 0) throw DomainError("energy_grid: n must be >= 0");
    if (!(eps_max > eps_n)) throw DomainError("energy_grid: eps_max must exceed eps_n");

    EnergyGrid g;
    g.tag = "singular+linear+log";
    const double inv = 1.0 / (2.0 * m);
    const double s_min = grid_s_min(eps_n, m);
    const double eps_break = 0.1 * eps_n;
    const double s_break = std::pow(eps_break, inv);

    // s-uniform segment; point count grows with n so every arc between
    // adjacent nodes keeps ~40 samples.
    const int n_sing = 40 * (n + 1) + 81;
    for (int i = 0; i < n_sing; ++i) {
        const double s = s_min + (s_break - s_min) * i / double(n_sing - 1);
        g.eps.push_back(std::pow(s, 2.0 * m));
    }

    // linear body through the classical range
    g.body_begin = g.eps.size();
    const double eps_top = std::min(2.5 * eps_n, eps_max);
    const int n_body = 300;
    for (int i = 1; i <= n_body; ++i)
        g.eps.push_back(eps_break + (eps_top - eps_break) * i / double(n_body));

    // log tail to the support edge
    g.tail_begin = g.eps.size();
    if (eps_max > eps_top * 1.01) {
        const double decades = std::log10(eps_max / eps_top);
        const int n_tail = std::max(8, static_cast<int>(std::ceil(24.0 * decades)));
        for (int i = 1; i <= n_tail; ++i)
            g.eps.push_back(eps_top * std::pow(eps_max / eps_top, i / double(n_tail)));
    }
    return g;
}

} // namespace classrep
