#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "classrep/eigensolver.hpp"
#include "classrep/errors.hpp"
#include "classrep/grids.hpp"
#include "classrep/potential.hpp"
#include "classrep/quadrature.hpp"
#include "classrep/smoothing.hpp"
#include "classrep/special_functions.hpp"
#include "classrep/splines.hpp"

namespace classrep {

// Classical period of v = x^{2m} at energy ε, in the scaled units where the
// quantum problem reads ψ'' + (ε − x^{2m})ψ = 0.
inline double period(double epsilon, int m) {
    if (m < 1) throw DomainError("period: m must be >= 1");
    if (!(epsilon > 0.0)) throw DomainError("period: energy must be positive");
    return beta(1.0 / (2.0 * m), 0.5) * std::pow(epsilon, (1.0 - m) / (2.0 * m)) / m;
}

// Time-spent position density of the trajectory at energy ε.
inline double classical_density(double epsilon, double x, int m) {
    if (m < 1) throw DomainError("classical_density: m must be >= 1");
    if (!(epsilon > 0.0)) throw DomainError("classical_density: energy must be positive");
    const double v = std::pow(x * x, m);
    if (v >= epsilon)
        throw DomainError("classical_density: |x| at or beyond the turning point");
    return 1.0 / (period(epsilon, m) * std::sqrt(epsilon - v));
}

// c_{np} = ρ_n^{(2p)}(0)/(2p−1)!, generated from c_{n1} by the closed-form
// recursion.  Valid for 1 ≤ p ≤ m, which covers every use below.
inline double c_np_coefficient(int p, double eps_n, double c1) {
    if (p < 1) throw DomainError("c_np_coefficient: p must be >= 1");
    double odd_fact = 1.0;
    for (int j = 2; j <= 2 * p - 1; ++j) odd_fact *= j;
    return std::pow(-4.0 * eps_n, p - 1) / odd_fact * c1;
}

// Weight f_n(ε) attached to the classical trajectory of energy ε when the
// ensemble reproduces the quantum position density of state n.  Signed; for
// m > 1 it diverges (integrably) as ε → 0, so the mass and first moment of
// the region below eps_grid[0] are completed analytically and kept in
// mass_below / mean_below.
struct EnergyDistribution {
    int n = 0;
    int m = 1;
    std::vector<double> eps_grid;
    std::vector<double> f;
    std::string grid_type = "custom";
    double integral = 0.0;      // ∫ f dε including mass_below
    double mean_energy = 0.0;   // ∫ ε f dε including mean_below

    // segment layout (see EnergyGrid) plus bookkeeping reused downstream
    std::size_t body_begin = 0;
    std::size_t tail_begin = 0;
    double mass_below = 0.0;
    double mean_below = 0.0;
    double eps_n = 0.0;               // eigenvalue of the source state
    double c1 = 0.0;                  // ρ_n''(0)
    double mean_tail_fraction = 0.0;  // |top tenth-decade of ∫ ε f| / |mean|
};

struct CumulativeDistribution {
    int n = 0;
    int m = 1;
    std::vector<double> eps_grid;
    std::vector<double> F;
};

namespace detail {

// f·(dε/ds) in the singular-segment coordinate s = ε^{1/(2m)}.  At large m
// the Jacobian 2m·s^{2m−1} underflows while f overflows; their product is
// tame, so combine in log space.  extra_eps_powers appends ε^k factors for
// moment integrands.
inline double scaled_integrand(double f_val, double ln_s, int m, int extra_eps_powers) {
    if (f_val == 0.0) return 0.0;
    const double ln_mag = std::log(std::abs(f_val)) + std::log(2.0 * m) +
                          (2.0 * m - 1.0 + 2.0 * m * extra_eps_powers) * ln_s;
    return std::copysign(std::exp(ln_mag), f_val);
}

struct DistributionIntegrals {
    std::vector<double> cum_mass;   // ∫_{eps_grid[0]}^{eps_i} f dε
    double mass = 0.0;
    double mean = 0.0;
    double mean_top_window = 0.0;   // ∫ ε f over the top tenth-decade
};

// Segment-wise integration in each segment's natural coordinate: s in the
// singular part, ε in the body, ln ε in the tail.  Splines accommodate the
// uneven spacing, and each segment's spline includes the closing knot of the
// previous segment so the pieces tile [eps_grid[0], eps_grid.back()] exactly.
inline DistributionIntegrals integrate_distribution(const EnergyDistribution& d) {
    const std::size_t nn = d.eps_grid.size();
    if (nn < 3 || d.f.size() != nn)
        throw DomainError("distribution integration: need >= 3 samples and matching f");
    const std::size_t b = std::min(d.body_begin, nn);
    const std::size_t t = std::min(std::max(d.tail_begin, b), nn);

    DistributionIntegrals out;
    out.cum_mass.assign(nn, 0.0);
    double mass_so_far = 0.0;

    if (b > 0) {
        if (b < 3) throw DomainError("distribution integration: singular segment too small");
        std::vector<double> s(b), gm(b), ge(b);
        for (std::size_t i = 0; i < b; ++i) {
            const double ln_s = std::log(d.eps_grid[i]) / (2.0 * d.m);
            s[i] = std::exp(ln_s);
            gm[i] = scaled_integrand(d.f[i], ln_s, d.m, 0);
            ge[i] = scaled_integrand(d.f[i], ln_s, d.m, 1);
        }
        const CubicSpline sm(s, gm), se(s, ge);
        for (std::size_t i = 1; i < b; ++i) out.cum_mass[i] = sm.integral(s[0], s[i]);
        mass_so_far = out.cum_mass[b - 1];
        out.mean += se.integral(s.front(), s.back());
    }
    if (t > b) {
        const std::size_t k0 = (b > 0) ? b - 1 : 0;   // include closing knot
        std::vector<double> e(d.eps_grid.begin() + k0, d.eps_grid.begin() + t);
        if (e.size() < 3) throw DomainError("distribution integration: body segment too small");
        std::vector<double> gm(e.size()), ge(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) {
            gm[i] = d.f[k0 + i];
            ge[i] = d.f[k0 + i] * e[i];
        }
        const CubicSpline sm(e, gm), se(e, ge);
        for (std::size_t i = std::max<std::size_t>(b, 1); i < t; ++i)
            out.cum_mass[i] = mass_so_far + sm.integral(e.front(), d.eps_grid[i]);
        mass_so_far = out.cum_mass[t - 1];
        out.mean += se.integral(e.front(), e.back());
    }
    if (nn > t) {
        const std::size_t k0 = (t > 0) ? t - 1 : 0;
        std::vector<double> u(nn - k0), gm(nn - k0), ge(nn - k0);
        if (u.size() < 3) throw DomainError("distribution integration: tail segment too small");
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double eps = d.eps_grid[k0 + i];
            u[i] = std::log(eps);
            gm[i] = d.f[k0 + i] * eps;
            ge[i] = d.f[k0 + i] * eps * eps;
        }
        const CubicSpline sm(u, gm), se(u, ge);
        for (std::size_t i = std::max<std::size_t>(t, 1); i < nn; ++i)
            out.cum_mass[i] = mass_so_far + sm.integral(u.front(), std::log(d.eps_grid[i]));
        out.mean += se.integral(u.front(), u.back());
    }
    // Mean-energy contribution of the top tenth-decade of the grid: if the
    // integrand has not died off by there, the grid was truncated too early.
    const double lo_edge = d.eps_grid.back() * std::pow(10.0, -0.1);
    for (std::size_t i = nn - 1; i-- > 0;) {
        if (d.eps_grid[i + 1] <= lo_edge) break;
        out.mean_top_window += 0.5 *
                               (d.f[i] * d.eps_grid[i] + d.f[i + 1] * d.eps_grid[i + 1]) *
                               (d.eps_grid[i + 1] - d.eps_grid[i]);
    }
    out.mass = out.cum_mass[nn - 1];
    return out;
}

// f as log-magnitude plus sign: the only representation that survives the
// large-m regime, where f overflows while the Jacobians that tame it
// underflow.  sign == 0 encodes f == 0.
struct LogValue {
    double ln_mag = 0.0;
    double sign = 0.0;
};

// Piecewise evaluator of f over the three grid segments, addressed by the
// scale coordinate s = ε^{1/(2m)} (ε itself may underflow at large m).
//
// Raw f varies like s^{3−2m} near zero, far too curved to interpolate
// directly, so inside the singular segment the spline carries the tamed
// product w = f·s^{2m−3}.  Each spline extends three knots past its segment
// so the free-end boundary layers of the natural construction stay out of
// the evaluated range.
//
// Below the grid the small-ε expansion takes over.  Its rungs, measured in
// z = ε^{1/m} relative to the leading ε^{−1+3/(2m)} power, are the integer
// powers z^{p−1} of the local series plus one anomalous rung contributed by
// the non-local part of the transform through the 1/T(ε) prefactor:
// z^{(m−2)/2} for odd m (half-integer, between the others) and
// z^{m/2−1}·ln ε for even m (degenerate with an integer rung).  The series
// coefficients that have closed forms are used as-is; the next two rungs
// are fitted to the bottom grid samples, which makes the continuation exact
// at the matching points while only the exact leading term survives deep
// down.  Beyond the top of the grid f is zero.
struct DistributionEvaluator {
    int m = 1;
    double ln_s0 = 0.0, f0 = 0.0, ln_eps0 = 0.0;
    double s_sing_hi = 0.0, s_body_hi = 0.0, s_back = 0.0;
    double lead_exp = 0.0;             // leading power of ε below the grid
    double log_c = 0.0;                // m = 2: constant in ε^{−1/4}(ln ε + C)
    std::vector<double> amp;           // m > 2: series in z = ε^{1/m}
    double fit_d1 = 0.0, fit_d2 = 0.0; // fitted rung coefficients
    double fit_e1 = 0.0, fit_e2 = 0.0; // their exponents in z
    bool fit_l1 = false, fit_l2 = false;   // carries a ln ε factor?
    bool has_fit = false;
    CubicSpline sing, body, tail;
    bool has_sing = false, has_body = false, has_tail = false;

    explicit DistributionEvaluator(const EnergyDistribution& d) : m(d.m) {
        const std::size_t nn = d.eps_grid.size();
        if (nn < 3) throw DomainError("distribution evaluator: grid too small");
        std::vector<double> s(nn), ln_s(nn);
        for (std::size_t i = 0; i < nn; ++i) {
            ln_s[i] = std::log(d.eps_grid[i]) / (2.0 * d.m);
            s[i] = std::exp(ln_s[i]);
        }
        const std::size_t b = std::min(d.body_begin, nn);
        const std::size_t t = std::min(std::max(d.tail_begin, b), nn);
        ln_s0 = ln_s.front();
        ln_eps0 = std::log(d.eps_grid.front());
        f0 = d.f.front();
        s_back = s.back();
        if (b >= 3) {
            const std::size_t hi = std::min(b + 3, nn);
            std::vector<double> w(hi);
            for (std::size_t i = 0; i < hi; ++i) {
                if (m == 1 || d.f[i] == 0.0) {
                    w[i] = d.f[i];
                } else {
                    w[i] = std::copysign(
                        std::exp(std::log(std::abs(d.f[i])) + (2.0 * m - 3.0) * ln_s[i]),
                        d.f[i]);
                }
            }
            sing = CubicSpline(std::vector<double>(s.begin(), s.begin() + hi), w);
            has_sing = true;
            s_sing_hi = s[b - 1];
        }
        if (t > b) {
            const std::size_t k0 = (b >= 3) ? b - 3 : 0;
            const std::size_t hi = std::min(t + 3, nn);
            std::vector<double> e(d.eps_grid.begin() + k0, d.eps_grid.begin() + hi);
            std::vector<double> fv(d.f.begin() + k0, d.f.begin() + hi);
            if (e.size() >= 3) {
                body = CubicSpline(e, fv);
                has_body = true;
                s_body_hi = s[t - 1];
            }
        }
        if (nn > t) {
            const std::size_t k0 = (t >= 3) ? t - 3 : 0;
            std::vector<double> u(nn - k0), fv(nn - k0);
            for (std::size_t i = 0; i < u.size(); ++i) {
                u[i] = std::log(d.eps_grid[k0 + i]);
                fv[i] = d.f[k0 + i];
            }
            if (u.size() >= 3) {
                tail = CubicSpline(u, fv);
                has_tail = true;
            }
        }

        lead_exp = (m == 1) ? 0.0 : -1.0 + 3.0 / (2.0 * m);
        if (m == 2 && f0 != 0.0) {
            // fit C of ε^{−1/4}(ln ε + C) from the bottom sample and one a
            // few knots up (s grows by ≥ 1.3× for a usable lever arm)
            const double s0 = std::exp(ln_s0);
            for (std::size_t k = 1; k < nn; ++k) {
                if (s[k] < 1.3 * s0) continue;
                if (d.f[k] == 0.0) break;
                const double ln_epsk = 2.0 * m * ln_s[k];
                const double r = d.f[k] / f0 * std::exp(-lead_exp * (ln_epsk - ln_eps0));
                if (std::abs(r - 1.0) > 1e-6) {
                    const double c = (ln_epsk - r * ln_eps0) / (r - 1.0);
                    if (std::isfinite(c) && ln_eps0 + c < 0.0) log_c = c;
                }
                break;
            }
        } else if (m > 2 && f0 != 0.0) {
            int p_cont = 0;
            if (d.eps_n > 0.0 && d.c1 != 0.0) {
                const double bh = beta(1.0 / (2.0 * m), 0.5);
                p_cont = std::min(3, s_series_p_max(m));
                for (int p = 1; p <= p_cont; ++p)
                    amp.push_back(-bh / (m * std::numbers::pi) *
                                  c_np_coefficient(p, d.eps_n, d.c1) * s_series(m, p).value);
            }
            // the two lowest rungs not pinned by closed-form coefficients
            fit_e1 = p_cont;
            fit_e2 = p_cont + 1.0;
            if (m % 2 == 1) {
                const double r = 0.5 * (m - 2);
                if (r < p_cont) {
                    fit_e1 = r;
                    fit_e2 = p_cont;
                } else if (r < p_cont + 1.0) {
                    fit_e2 = r;
                }
            } else {
                const int r = m / 2 - 1;
                if (r == p_cont) {
                    fit_e1 = fit_e2 = r;
                    fit_l1 = true;
                } else if (r == p_cont + 1) {
                    fit_l2 = true;
                }
            }
            auto rung = [&](double e, bool wl, double ln_eps) {
                return std::exp(e / m * ln_eps) * (wl ? ln_eps : 1.0);
            };
            // f·ε^{−lead} with the known series removed (log-combined: the
            // factors overflow separately at large m)
            auto reduced = [&](double f_val, double ln_eps) {
                double g = std::copysign(
                    std::exp(std::log(std::abs(f_val)) - lead_exp * ln_eps), f_val);
                for (std::size_t p = 0; p < amp.size(); ++p)
                    g -= amp[p] * std::exp(double(p) / m * ln_eps);
                return g;
            };
            const double g0 = reduced(f0, ln_eps0);
            double d1 = g0 / rung(fit_e1, fit_l1, ln_eps0), d2 = 0.0;
            const double s0v = std::exp(ln_s0);
            for (std::size_t k = 1; k < nn; ++k) {
                if (s[k] < 1.3 * s0v) continue;
                if (d.f[k] != 0.0) {
                    const double ln_epsk = 2.0 * m * ln_s[k];
                    const double gk = reduced(d.f[k], ln_epsk);
                    const double a11 = rung(fit_e1, fit_l1, ln_eps0);
                    const double a12 = rung(fit_e2, fit_l2, ln_eps0);
                    const double a21 = rung(fit_e1, fit_l1, ln_epsk);
                    const double a22 = rung(fit_e2, fit_l2, ln_epsk);
                    const double det = a11 * a22 - a12 * a21;
                    d1 = (g0 * a22 - gk * a12) / det;
                    d2 = (a11 * gk - a21 * g0) / det;
                }
                break;
            }
            if (std::isfinite(d1) && std::isfinite(d2)) {
                fit_d1 = d1;
                fit_d2 = d2;
                has_fit = true;
            } else if (amp.empty()) {
                amp.assign(1, std::copysign(
                                  std::exp(std::log(std::abs(f0)) - lead_exp * ln_eps0), f0));
            }
        }
    }

    // the z-series (fitted rungs included) at ln ε, without the ε^{lead} factor
    double below_series(double ln_eps) const {
        double series = 0.0;
        for (std::size_t p = 0; p < amp.size(); ++p)
            series += amp[p] * std::exp(double(p) / m * ln_eps);
        if (has_fit) {
            series += fit_d1 * std::exp(fit_e1 / m * ln_eps) * (fit_l1 ? ln_eps : 1.0);
            series += fit_d2 * std::exp(fit_e2 / m * ln_eps) * (fit_l2 ? ln_eps : 1.0);
        }
        return series;
    }

    LogValue log_value(double s) const {
        LogValue v;
        if (s >= s_back) return v;
        const double ln_s = std::log(s);
        if (ln_s < ln_s0) {
            if (f0 == 0.0) return v;
            const double ln_eps = 2.0 * m * ln_s;
            if (!amp.empty() || has_fit) {
                const double series = below_series(ln_eps);
                if (series != 0.0) {
                    v.ln_mag = std::log(std::abs(series)) + lead_exp * ln_eps;
                    v.sign = (series > 0.0) ? 1.0 : -1.0;
                }
                return v;
            }
            v.ln_mag = std::log(std::abs(f0)) + lead_exp * (ln_eps - ln_eps0);
            v.sign = (f0 > 0.0) ? 1.0 : -1.0;
            if (m == 2)   // both shifted logs negative by construction
                v.ln_mag += std::log((ln_eps + log_c) / (ln_eps0 + log_c));
            return v;
        }
        double val = 0.0;
        if (has_sing && s <= s_sing_hi) {
            const double w = sing(s);
            if (w == 0.0) return v;
            v.ln_mag = std::log(std::abs(w)) - ((m == 1) ? 0.0 : (2.0 * m - 3.0) * ln_s);
            v.sign = (w > 0.0) ? 1.0 : -1.0;
            return v;
        } else if (has_body && s <= s_body_hi) {
            val = body(std::exp(2.0 * m * ln_s));
        } else if (has_tail) {
            val = tail(2.0 * m * ln_s);
        } else if (has_body) {
            val = body(std::exp(2.0 * m * ln_s));
        } else if (has_sing && m == 1) {
            val = sing(s);
        }
        if (val == 0.0) return v;
        v.ln_mag = std::log(std::abs(val));
        v.sign = (val > 0.0) ? 1.0 : -1.0;
        return v;
    }

    // ∫_0^δ ε^q dε and ∫_0^δ ε^q ln ε dε, q > −1
    static double power_moment(double q, double delta) {
        return std::exp((q + 1.0) * std::log(delta)) / (q + 1.0);
    }
    static double power_log_moment(double q, double delta) {
        const double q1 = q + 1.0;
        return std::exp(q1 * std::log(delta)) * (std::log(delta) * q1 - 1.0) / (q1 * q1);
    }

    // ∫_0^δ f dε and ∫_0^δ ε f dε of the below-grid continuation.  The grid
    // cannot start at ε = 0 (at large m it cannot even represent the
    // innermost region in double precision), so every distribution closes
    // its moments with this.
    void below_grid_moments(double delta, double& mass, double& mean) const {
        mass = 0.0;
        mean = 0.0;
        if (f0 == 0.0) return;
        if (m == 1) {
            mass = f0 * delta;
            mean = 0.5 * f0 * delta * delta;
            return;
        }
        if (m == 2) {
            const double c0 = f0 * std::exp(-lead_exp * ln_eps0) / (ln_eps0 + log_c);
            mass = c0 * (power_log_moment(lead_exp, delta) +
                         log_c * power_moment(lead_exp, delta));
            mean = c0 * (power_log_moment(lead_exp + 1.0, delta) +
                         log_c * power_moment(lead_exp + 1.0, delta));
            return;
        }
        for (std::size_t p = 0; p < amp.size(); ++p) {
            const double q = lead_exp + double(p) / m;
            mass += amp[p] * power_moment(q, delta);
            mean += amp[p] * power_moment(q + 1.0, delta);
        }
        if (has_fit) {
            const double q1 = lead_exp + fit_e1 / m, q2 = lead_exp + fit_e2 / m;
            mass += fit_d1 * (fit_l1 ? power_log_moment(q1, delta) : power_moment(q1, delta));
            mean += fit_d1 *
                    (fit_l1 ? power_log_moment(q1 + 1.0, delta) : power_moment(q1 + 1.0, delta));
            mass += fit_d2 * (fit_l2 ? power_log_moment(q2, delta) : power_moment(q2, delta));
            mean += fit_d2 *
                    (fit_l2 ? power_log_moment(q2 + 1.0, delta) : power_moment(q2 + 1.0, delta));
        }
    }
};

} // namespace detail

namespace detail {

// Support edge of the density: last abscissa where ρ is still above the
// truncation floor.  Scanned from the back so the interior nodes of ψ
// (where ρ also vanishes) cannot stop the scan early.
inline double density_support_edge(const EigenSolution& sol) {
    for (std::size_t i = sol.grid.size(); i-- > 1;) {
        if (sol.rho[i] >= 1e-14)
            return sol.grid[std::min(i + 1, sol.grid.size() - 1)];
    }
    return sol.grid.back();
}

} // namespace detail

// Highest potential value the density meaningfully reaches: the natural top
// of an energy grid for this state's distribution.
inline double support_energy(const EigenSolution& sol) {
    if (sol.box()) throw DomainError("support_energy: box states have no finite-m scale");
    return std::pow(detail::density_support_edge(sol), 2.0 * sol.exponent());
}

// f_n(ε) by the inverse Abel transform of the position density: for each ε,
// integrate dρ/dv against 1/√(v−ε) over the classically relevant range of
// v = x^{2m}.  The substitution v = ε + t² removes the endpoint singularity;
// geometric t-panels track the scale changes of dρ/dv near v = 0.
inline EnergyDistribution inverse_abel(const EigenSolution& sol, const EnergyGrid& grid) {
    if (sol.box())
        throw IntegrabilityError(
            "inverse_abel: the square-well limit concentrates non-integrable 1/eps weight "
            "at small energies; no distribution exists",
            -1.0);
    if (!sol.rep) throw DomainError("inverse_abel: solution lacks derivative data");
    if (grid.eps.size() < 8) throw DomainError("inverse_abel: energy grid too small");
    const int m = sol.exponent();
    const double inv2m = 1.0 / (2.0 * m);
    const double x_sup = detail::density_support_edge(sol);
    const double v_max = std::pow(x_sup, 2.0 * m);

    EnergyDistribution d;
    d.n = sol.n;
    d.m = m;
    d.eps_grid = grid.eps;
    d.grid_type = grid.tag;
    d.body_begin = grid.body_begin;
    d.tail_begin = grid.tail_begin;
    d.f.resize(grid.eps.size());
    d.eps_n = sol.epsilon;
    d.c1 = c_n1(sol);

    auto drho_dv = [&](double v) {
        const double x = std::exp(std::log(v) * inv2m);
        if (x >= x_sup) return 0.0;
        return sol.drho_at(x) * x / (2.0 * m * v);
    };
    for (std::size_t i = 0; i < grid.eps.size(); ++i) {
        const double eps = grid.eps[i];
        if (!(eps > 0.0)) throw DomainError("inverse_abel: energies must be positive");
        if (eps >= v_max * (1.0 - 1e-12)) {
            d.f[i] = 0.0;
            continue;
        }
        const double t_top = std::sqrt(v_max - eps);
        std::vector<double> br{0.0};
        for (double tb = std::sqrt(eps); tb < t_top; tb *= 2.0) br.push_back(tb);
        br.push_back(t_top);
        auto integrand = [&](double t) { return 2.0 * drho_dv(eps + t * t); };
        // 1e-11: knot-to-knot quadrature jitter is what limits third
        // derivatives taken from f later; the extra digits are nearly free.
        const auto out = integrate_panels(integrand, br, {1e-11, 0.0, 4000});
        d.f[i] = -period(eps, m) / std::numbers::pi * out.value;
    }

    const detail::DistributionEvaluator ev(d);
    ev.below_grid_moments(grid.eps.front(), d.mass_below, d.mean_below);
    const auto seg = detail::integrate_distribution(d);
    d.integral = d.mass_below + seg.mass;
    d.mean_energy = d.mean_below + seg.mean;
    d.mean_tail_fraction =
        std::abs(seg.mean_top_window) / std::max(std::abs(d.mean_energy), 1e-300);
    return d;
}

// Least-squares slope of log|f| vs log ε over the first decade of the grid
// (at least eight usable samples): measures how divergent f is at small ε.
inline double fitted_small_eps_exponent(const EnergyDistribution& d) {
    std::vector<double> xs, ys;
    const std::size_t cap = (d.body_begin > 0) ? d.body_begin : d.eps_grid.size();
    for (std::size_t i = 0; i < cap; ++i) {
        if (d.f[i] == 0.0) continue;
        if (d.eps_grid[i] > 10.0 * d.eps_grid.front() && xs.size() >= 8) break;
        xs.push_back(std::log(d.eps_grid[i]));
        ys.push_back(std::log(std::abs(d.f[i])));
    }
    if (xs.size() < 2) throw NumericError("exponent fit: not enough usable samples");
    return linear_fit(xs, ys).slope;
}

inline CumulativeDistribution cumulative(const EnergyDistribution& d) {
    if (d.m > 1) {
        const double slope = fitted_small_eps_exponent(d);
        if (slope <= -0.999)
            throw IntegrabilityError("cumulative: fitted small-energy exponent " +
                                         std::to_string(slope) + " is not integrable",
                                     slope);
    }
    const auto seg = detail::integrate_distribution(d);
    CumulativeDistribution c;
    c.n = d.n;
    c.m = d.m;
    c.eps_grid = d.eps_grid;
    c.F.resize(d.eps_grid.size());
    for (std::size_t i = 0; i < c.F.size(); ++i) c.F[i] = d.mass_below + seg.cum_mass[i];
    return c;
}

inline double mean_energy(const EnergyDistribution& d) {
    if (d.mean_tail_fraction > 1e-5)
        throw NumericError("mean_energy: tail not settled (last decade carries " +
                           std::to_string(d.mean_tail_fraction) + " of the mean)");
    return d.mean_energy;
}

// ---------------------------------------------------------------------------
// Small-ε asymptotics of f_n

struct AsymptoticForm {
    enum class Tag { finite_value, log_case, power };
    int n = 0;
    int m = 1;
    Tag case_tag = Tag::finite_value;
    double coefficient = 0.0;   // of the leading term
    double exponent = 0.0;      // leading power of ε
};

struct AsymptoticEstimate {
    AsymptoticForm form;
    double value = 0.0;
};

// Small-ε form of f_n(ε).  p_terms = 1 gives the leading behavior; larger
// values (m > 2 only, and requiring eps_n for the coefficient recursion)
// add the subleading powers, each carrying an extra ε^{1/m}.
inline AsymptoticEstimate asymptotic_f(double epsilon, int n, int m, double c1,
                                       int p_terms = 1, double eps_n = 0.0) {
    if (!(epsilon > 0.0)) throw DomainError("asymptotic_f: epsilon must be positive");
    if (m < 1) throw DomainError("asymptotic_f: m must be >= 1");
    if (n < 0) throw DomainError("asymptotic_f: n must be >= 0");
    if (p_terms < 1) throw DomainError("asymptotic_f: p_terms must be >= 1");

    AsymptoticEstimate est;
    est.form.n = n;
    est.form.m = m;
    if (m == 1) {
        if (p_terms > 1)
            throw DomainError("asymptotic_f: m = 1 has a single finite limiting value");
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        est.form.case_tag = AsymptoticForm::Tag::finite_value;
        est.form.coefficient = sign;
        est.value = sign;
        return est;
    }
    const double b = beta(1.0 / (2.0 * m), 0.5);
    if (m == 2) {
        if (p_terms > 1)
            throw DomainError("asymptotic_f: m = 2 has a single log-modified term");
        est.form.case_tag = AsymptoticForm::Tag::log_case;
        est.form.coefficient = -c1 * b / (2.0 * std::numbers::pi);
        est.form.exponent = -0.25;
        est.value = est.form.coefficient * std::pow(epsilon, -0.25) *
                    std::log(std::pow(epsilon, -0.25));
        return est;
    }
    const int p_max = detail::s_series_p_max(m);
    if (p_terms > p_max)
        throw DomainError("asymptotic_f: p = " + std::to_string(p_terms) +
                          " exceeds the convergence bound p_max = " + std::to_string(p_max));
    if (p_terms > 1 && !(eps_n > 0.0))
        throw DomainError("asymptotic_f: higher-p terms need the eigenvalue eps_n");
    est.form.case_tag = AsymptoticForm::Tag::power;
    est.form.exponent = -1.0 + 3.0 / (2.0 * m);
    for (int p = 1; p <= p_terms; ++p) {
        const double cnp = (p == 1) ? c1 : c_np_coefficient(p, eps_n, c1);
        const double amp = -b / (m * std::numbers::pi) * cnp * s_series(m, p).value;
        if (p == 1) est.form.coefficient = amp;
        est.value += amp * std::pow(epsilon, -1.0 + (2.0 * p + 1.0) / (2.0 * m));
    }
    return est;
}

// Scaled node positions of the common limiting distribution: ε_k^{1/(2m)}
// = k/(n+1) for k = 1..n.
inline std::vector<double> limit_nodes(int n) {
    if (n < 0) throw DomainError("limit_nodes: n must be >= 0");
    std::vector<double> out;
    out.reserve(n);
    for (int k = 1; k <= n; ++k) out.push_back(double(k) / (n + 1));
    return out;
}

// Large-m collapse coordinates: s = ε^{1/(2m)} against sgn(f)·|f|^{1/(2m)}.
struct ScaledCurve {
    int n = 0;
    int m = 1;
    std::vector<double> s;
    std::vector<double> g;
};

inline ScaledCurve scaled_distribution(const EnergyDistribution& d) {
    ScaledCurve c;
    c.n = d.n;
    c.m = d.m;
    c.s.resize(d.eps_grid.size());
    c.g.resize(d.eps_grid.size());
    for (std::size_t i = 0; i < d.eps_grid.size(); ++i) {
        c.s[i] = std::pow(d.eps_grid[i], 1.0 / (2.0 * d.m));
        c.g[i] = (d.f[i] == 0.0)
                     ? 0.0
                     : std::copysign(std::pow(std::abs(d.f[i]), 1.0 / (2.0 * d.m)), d.f[i]);
    }
    return c;
}

// Sign-change locations of f in the scaled coordinate s = ε^{1/(2m)}: linear
// first bracket between samples, refined by bisection on a local spline
// interpolant of f.
inline std::vector<double> distribution_nodes(const EnergyDistribution& d) {
    std::vector<double> s(d.eps_grid.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = std::pow(d.eps_grid[i], 1.0 / (2.0 * d.m));
    std::vector<double> nodes;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (!(d.f[i] * d.f[i + 1] < 0.0)) continue;
        const std::size_t w0 = (i >= 2) ? i - 2 : 0;
        const std::size_t w1 = std::min(i + 4, s.size());
        double lo = s[i], hi = s[i + 1];
        if (w1 - w0 >= 3) {
            const CubicSpline local(std::vector<double>(s.begin() + w0, s.begin() + w1),
                                    std::vector<double>(d.f.begin() + w0, d.f.begin() + w1));
            double flo = d.f[i];
            for (int it = 0; it < 80 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = local(mid);
                if (fm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if (flo * fm < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
        } else {
            lo = hi = s[i] + (s[i + 1] - s[i]) * d.f[i] / (d.f[i] - d.f[i + 1]);
        }
        nodes.push_back(0.5 * (lo + hi));
    }
    return nodes;
}

// ---------------------------------------------------------------------------
// Back to physical units

struct PhysicalDistribution {
    int n = 0;
    int m = 1;
    std::vector<double> energy;   // E = γ ε
    std::vector<double> f;        // f̃(E) = f(E/γ)/γ
    double integral = 0.0;
    double mean_energy = 0.0;     // physical units
};

inline PhysicalDistribution to_physical(const EnergyDistribution& d, const Potential& pot) {
    if (pot.box())
        throw DomainError("to_physical: the box limit has no finite-m energy scale");
    if (pot.exponent() != d.m)
        throw DomainError("to_physical: potential exponent does not match the distribution");
    const double gamma = pot.gamma_scale();
    PhysicalDistribution p;
    p.n = d.n;
    p.m = d.m;
    p.energy.resize(d.eps_grid.size());
    p.f.resize(d.f.size());
    for (std::size_t i = 0; i < d.eps_grid.size(); ++i) {
        p.energy[i] = gamma * d.eps_grid[i];
        p.f[i] = d.f[i] / gamma;
    }
    p.integral = d.integral;              // change of variables preserves mass
    p.mean_energy = gamma * d.mean_energy;
    return p;
}

// ---------------------------------------------------------------------------
// Forward Abel transform: rebuild the position density from f_n

struct DensityCurve {
    std::vector<double> x;
    std::vector<double> rho;
    std::string warning;   // non-empty if the grid under-resolves small ε
};

// ρ(x) = ∫ f(ε)/T(ε) / √(ε − x^{2m}) dε over ε above the local potential.
// Carried out in s = ε^{1/(2m)} with the endpoint removed by s = x + u²;
// factors that individually overflow at large m are combined in log space.
inline DensityCurve forward_abel(const EnergyDistribution& d, int points = 401) {
    if (d.eps_grid.size() < 8) throw DomainError("forward_abel: grid too small");
    if (points < 16) throw DomainError("forward_abel: need at least 16 output points");
    const int m = d.m;
    const detail::DistributionEvaluator fe(d);
    const double ln_beta_half = std::log(beta(1.0 / (2.0 * m), 0.5));

    DensityCurve out;
    if (m > 1 && std::pow(d.eps_grid.front(), 1.0 / (2.0 * m)) > 0.1)
        out.warning = "small-energy region under-resolved: grid starts at s = " +
                      std::to_string(std::pow(d.eps_grid.front(), 1.0 / (2.0 * m)));

    const double x_top = fe.s_back;
    out.x.resize(points);
    out.rho.resize(points);
    for (int i = 0; i < points; ++i) {
        const double x = x_top * double(i) / (points - 1);
        out.x[i] = x;
        if (i + 1 == points) {
            out.rho[i] = 0.0;
            break;
        }
        const double ln_x = (x > 0.0) ? std::log(x) : -std::numeric_limits<double>::infinity();
        auto integrand = [&](double u) {
            const double s = x + u * u;
            const auto fv = fe.log_value(s);
            if (fv.sign == 0.0) return 0.0;
            const double ln_s = std::log(s);
            const double ln_t = ln_beta_half + (1.0 - m) * ln_s - std::log(double(m));
            double ln_diff;   // ln(s^{2m} − x^{2m}), stable as s → x
            if (x == 0.0) {
                ln_diff = 2.0 * m * ln_s;
            } else {
                ln_diff = 2.0 * m * ln_s + std::log(-std::expm1(2.0 * m * (ln_x - ln_s)));
            }
            const double ln_mag = fv.ln_mag + std::log(2.0 * m) + (2.0 * m - 1.0) * ln_s -
                                  ln_t - 0.5 * ln_diff;
            return fv.sign * std::exp(ln_mag) * 2.0 * u;
        };
        const double u_top = std::sqrt(x_top - x);
        out.rho[i] = integrate_gk(integrand, 0.0, u_top, {1e-9, 1e-12, 4000}).value;
    }
    return out;
}

} // namespace classrep
