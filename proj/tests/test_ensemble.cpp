// Classical-ensemble layer: period/density, the transform pair, moment
// identities, small-energy asymptotics, node structure, physical units.
//
// Reference numbers are frozen 30-digit evaluations of the closed forms
// (Laguerre values, Beta-function periods, Laguerre-root node positions),
// fixed before the implementation ran.  Where no closed form exists, the
// checks compare independent numerical routes: defining-integral quadrature
// for the period and the density norm, Richardson finite differences for
// the Taylor recursion, and the transform round trip against the solved
// position density.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "classrep/eigensolver.hpp"
#include "classrep/ensemble.hpp"
#include "classrep/special_functions.hpp"

using namespace classrep;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const EigenSolution& state(int m, int n) {
    static std::map<std::pair<int, int>, EigenSolution> cache;
    const auto key = std::make_pair(m, n);
    auto it = cache.find(key);
    if (it == cache.end()) {
        if (m == 1) {
            it = cache.emplace(key, analytic_harmonic(n)).first;
        } else {
            auto sols = solve(Potential{m, 1.0, 1.0, 1.0}, 4);
            for (int k = 0; k <= 4; ++k)
                cache.emplace(std::make_pair(m, k), std::move(sols[k]));
            it = cache.find(key);
        }
    }
    return it->second;
}

const EnergyDistribution& dist(int m, int n) {
    static std::map<std::pair<int, int>, EnergyDistribution> cache;
    const auto key = std::make_pair(m, n);
    auto it = cache.find(key);
    if (it == cache.end()) {
        const auto& sol = state(m, n);
        const auto grid = energy_grid(sol.epsilon, m, support_energy(sol), n);
        it = cache.emplace(key, inverse_abel(sol, grid)).first;
    }
    return it->second;
}

double exact_harmonic_f(int n, double eps) {
    return ((n % 2) ? -1.0 : 1.0) * std::exp(-eps) * laguerre(n, 2.0 * eps);
}

int sign_changes(const std::vector<double>& f) {
    int c = 0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i)
        if (f[i] * f[i + 1] < 0.0) ++c;
    return c;
}

} // namespace

TEST_CASE("period matches the closed form and its defining integral") {
    CHECK_THAT(period(8.0, 3), WithinRel(1.2143253239437908059, 1e-13));
    CHECK_THAT(period(2.0, 5), WithinRel(1.7162590512372631218, 1e-13));
    // harmonic period is energy-independent
    CHECK_THAT(period(1.0, 1), WithinRel(M_PI, 1e-14));
    CHECK_THAT(period(17.3, 1), WithinRel(M_PI, 1e-14));

    // defining integral 2∫ dx/√(ε−x^{2m}), endpoint removed by x = x_t(1−w²)
    for (auto [m, eps] : {std::pair{3, 8.0}, {5, 2.0}, {2, 0.37}}) {
        const double xt = std::pow(eps, 1.0 / (2.0 * m));
        auto g = [&](double w) {
            const double x = xt * (1.0 - w * w);
            return 4.0 * xt * w / std::sqrt(eps - std::pow(x, 2.0 * m));
        };
        const double direct = integrate_gk(g, 0.0, 1.0, {1e-11, 0.0, 4000}).value;
        CHECK_THAT(period(eps, m), WithinRel(direct, 1e-8));
    }

    CHECK_THROWS_AS(period(0.0, 2), DomainError);
    CHECK_THROWS_AS(period(-1.0, 2), DomainError);
    CHECK_THROWS_AS(period(1.0, 0), DomainError);
}

TEST_CASE("classical position density: value, symmetry, unit norm") {
    CHECK_THAT(classical_density(1.0, 0.0, 1), WithinRel(0.31830988618379067154, 1e-13));
    CHECK_THAT(classical_density(2.0, 0.7, 5),
               WithinRel(classical_density(2.0, -0.7, 5), 1e-14));

    // ∫ q dx over the classically allowed interval is 1 by construction
    const int m = 5;
    const double eps = 2.0;
    const double xt = std::pow(eps, 1.0 / (2.0 * m));
    auto g = [&](double w) {
        const double x = xt * (1.0 - w * w);
        return 4.0 * xt * w * classical_density(eps, x, m);
    };
    const double norm = integrate_gk(g, 0.0, 1.0, {1e-10, 0.0, 4000}).value;
    CHECK_THAT(norm, WithinAbs(1.0, 1e-8));

    // no density at or beyond the turning point
    CHECK_THROWS_AS(classical_density(1.0, 1.0, 1), DomainError);
    CHECK_THROWS_AS(classical_density(1.0, 1.2, 1), DomainError);
}

TEST_CASE("harmonic distributions land on the Laguerre closed form") {
    // the closed form itself, pinned
    CHECK_THAT(exact_harmonic_f(0, 0.5), WithinRel(0.6065306597126334236, 1e-14));
    CHECK_THAT(exact_harmonic_f(1, 0.25), WithinRel(-0.38940039153570243412, 1e-14));
    CHECK_THAT(exact_harmonic_f(2, 1.0), WithinRel(-0.3678794411714423216, 1e-14));
    CHECK_THAT(exact_harmonic_f(4, 2.0), WithinRel(0.13533528323661269189, 1e-14));
    CHECK_THAT(exact_harmonic_f(6, 3.5), WithinRel(0.20664237239133785159, 1e-14));

    for (int n = 0; n <= 6; ++n) {
        const auto& sol = state(1, n);
        const auto grid = energy_grid(sol.epsilon, 1, support_energy(sol), n);
        const auto d = inverse_abel(sol, grid);
        double worst = 0.0;
        for (std::size_t i = 0; i < d.eps_grid.size(); ++i)
            worst = std::max(worst, std::abs(d.f[i] - exact_harmonic_f(n, d.eps_grid[i])));
        INFO("n=" << n);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("distributions carry unit mass and reproduce the eigenvalue as mean") {
    for (int m : {1, 2, 5}) {
        for (int n : {0, 4}) {
            const auto& d = dist(m, n);
            INFO("m=" << m << " n=" << n);
            CHECK_THAT(d.integral, WithinAbs(1.0, 1e-3));
            CHECK_THAT(mean_energy(d), WithinRel(state(m, n).epsilon, 5e-3));
        }
    }
}

TEST_CASE("small-energy divergence has the predicted power") {
    for (int m : {3, 5}) {
        for (int n : {0, 4}) {
            const double expect = -1.0 + 3.0 / (2.0 * m);
            INFO("m=" << m << " n=" << n);
            CHECK_THAT(fitted_small_eps_exponent(dist(m, n)), WithinAbs(expect, 0.05));
        }
    }
    // quartic case carries an extra log factor on ε^{−1/4}; the bottom of the
    // grid should already follow the full asymptotic form to ~10%
    {
        const auto& d = dist(2, 0);
        const auto est = asymptotic_f(d.eps_grid.front(), 0, 2, d.c1);
        CHECK(est.form.case_tag == AsymptoticForm::Tag::log_case);
        CHECK_THAT(d.f.front() / est.value, WithinAbs(1.0, 0.1));
    }
}

TEST_CASE("asymptotic evaluator: harmonic and quartic forms") {
    const double c1_even = -1.0, c1_odd = 1.0;   // only signs matter at m=1
    CHECK(asymptotic_f(1e-4, 2, 1, c1_even).value == 1.0);
    CHECK(asymptotic_f(1e-4, 3, 1, c1_odd).value == -1.0);
    CHECK(asymptotic_f(0.3, 2, 1, c1_even).form.case_tag == AsymptoticForm::Tag::finite_value);

    const double c1 = dist(2, 0).c1;
    const auto est = asymptotic_f(1e-6, 0, 2, c1);
    const double b = beta(0.25, 0.5);
    CHECK_THAT(est.form.coefficient, WithinRel(-c1 * b / (2.0 * M_PI), 1e-12));
    // coefficient × ε^{−1/4} log(ε^{−1/4}) must reproduce value
    const double by_hand =
        est.form.coefficient * std::pow(1e-6, -0.25) * std::log(std::pow(1e-6, -0.25));
    CHECK_THAT(est.value, WithinRel(by_hand, 1e-12));
}

TEST_CASE("asymptotic evaluator: adding the computed correction term helps") {
    const auto& d = dist(5, 0);
    const double eps_n = state(5, 0).epsilon;
    // pick a grid sample around ε ≈ 1e-3, well inside the asymptotic regime
    std::size_t i = 0;
    while (i + 1 < d.eps_grid.size() && d.eps_grid[i] < 1e-3) ++i;
    const double eps = d.eps_grid[i];
    const double lead = asymptotic_f(eps, 0, 5, d.c1, 1).value;
    const double full = asymptotic_f(eps, 0, 5, d.c1, 2, eps_n).value;
    CHECK(std::abs(d.f[i] - full) < std::abs(d.f[i] - lead));
}

TEST_CASE("asymptotic evaluator rejects out-of-range requests") {
    CHECK_THROWS_AS(asymptotic_f(0.1, 0, 1, -1.0, 2), DomainError);      // m=1 has one term
    CHECK_THROWS_AS(asymptotic_f(0.1, 0, 2, -1.0, 2), DomainError);      // log case too
    CHECK_THROWS_AS(asymptotic_f(0.1, 0, 5, -1.0, 3, 1.3), DomainError); // beyond valid depth
    CHECK_THROWS_AS(asymptotic_f(0.1, 0, 5, -1.0, 2), DomainError);      // needs eigenvalue
    CHECK_THROWS_AS(asymptotic_f(-0.1, 0, 5, -1.0), DomainError);
}

TEST_CASE("density Taylor ladder matches Richardson finite differences") {
    // ρ″(x) carries the ladder as an even series c1 + 3c2 x² + 5c3 x⁴ + …,
    // so c2 = ρ⁗(0)/6 and c3 = ρ⁽⁶⁾(0)/120 reachable by differencing ρ″.
    for (int n : {2, 1}) {
        const auto& sol = state(5, n);
        const double c1 = c_n1(sol);
        auto rho2 = [&](double x) { return density_derivatives(sol, x)[2]; };
        INFO("n=" << n);
        CHECK_THAT(rho2(0.0), WithinRel(c1, 1e-9));

        auto second = [&](double h) {
            return (rho2(h) - 2.0 * rho2(0.0) + rho2(-h)) / (h * h);
        };
        auto fourth = [&](double h) {
            return (rho2(2.0 * h) - 4.0 * rho2(h) + 6.0 * rho2(0.0) - 4.0 * rho2(-h) +
                    rho2(-2.0 * h)) /
                   (h * h * h * h);
        };
        const double h = 0.05;
        const double d2 = (4.0 * second(h / 2) - second(h)) / 3.0;
        const double d4 = (4.0 * fourth(h / 2) - fourth(h)) / 3.0;
        const double c2 = d2 / 6.0;          // (3·2)·c2 = ρ″″(0)
        const double c3 = d4 / 120.0;        // (5·4·3·2)·c3 = ρ⁽⁶⁾(0)
        CHECK_THAT(c_np_coefficient(2, sol.epsilon, c1), WithinRel(c2, 1e-4));
        CHECK_THAT(c_np_coefficient(3, sol.epsilon, c1), WithinRel(c3, 1e-4));
    }
    CHECK_THROWS_AS(c_np_coefficient(0, 1.0, -1.0), DomainError);
}

TEST_CASE("sign structure: positive ground state, n sign flips, edge divergences") {
    for (int m : {1, 2, 5}) {
        INFO("m=" << m);
        const auto& d0 = dist(m, 0);
        CHECK(std::all_of(d0.f.begin(), d0.f.end(), [](double v) { return v >= 0.0; }));
        CHECK(d0.f.front() > 0.0);
        CHECK(sign_changes(dist(m, 4).f) == 4);
    }
    // odd states plunge to −∞ at small ε (for m > 1), even ones to +∞
    CHECK(dist(5, 1).f.front() < -1e3);
    CHECK(dist(5, 0).f.front() > 1e3);
    // at m = 1 the distribution stays finite at zero energy instead
    CHECK_THAT(dist(1, 4).f.front(), WithinAbs(1.0, 1e-3));
}

TEST_CASE("node bookkeeping: limiting abscissae and measured sign changes") {
    CHECK(limit_nodes(0).empty());
    const auto l4 = limit_nodes(4);
    REQUIRE(l4.size() == 4);
    CHECK_THAT(l4[0], WithinRel(0.2, 1e-14));
    CHECK_THAT(l4[3], WithinRel(0.8, 1e-14));
    CHECK_THROWS_AS(limit_nodes(-1), DomainError);

    // harmonic nodes are the Laguerre roots, in the scaled coordinate √ε
    const auto nodes = distribution_nodes(dist(1, 4));
    REQUIRE(nodes.size() == 4);
    const double expect[] = {0.4015891492678757075, 0.93428076646111755855,
                             1.5060910159949046026, 2.167379859680938939};
    for (int k = 0; k < 4; ++k) {
        INFO("k=" << k);
        CHECK_THAT(nodes[k], WithinAbs(expect[k], 2e-3));
    }
}

TEST_CASE("node migration toward the equally spaced limit at large exponent") {
    const auto& sol = state(100, 4);
    const auto& d = dist(100, 4);
    const auto nodes = distribution_nodes(d);
    REQUIRE(nodes.size() == 4);
    // finite-m nodes sit near (k/5)·ε_n^{1/m}; the pull toward k/5 shrinks
    // like ln(ε_n)/m, still ≈ 0.03 at the top node for m = 100
    const double stretch = std::pow(sol.epsilon, 1.0 / 100.0);
    for (int k = 0; k < 4; ++k) {
        const double limit = 0.2 * (k + 1);
        INFO("k=" << k);
        CHECK_THAT(nodes[k], WithinAbs(limit * stretch, 0.02));
        CHECK_THAT(nodes[k], WithinAbs(limit, 0.035));
    }
}

TEST_CASE("scaled view compresses the distribution without moving its zeros") {
    const auto& d = dist(5, 4);
    const auto c = scaled_distribution(d);
    REQUIRE(c.s.size() == d.eps_grid.size());
    for (std::size_t i = 0; i < c.s.size(); i += 37) {
        CHECK_THAT(c.s[i], WithinRel(std::pow(d.eps_grid[i], 0.1), 1e-13));
        CHECK((c.g[i] > 0) == (d.f[i] > 0));
        if (d.f[i] != 0.0)
            CHECK_THAT(std::pow(std::abs(c.g[i]), 10.0), WithinRel(std::abs(d.f[i]), 1e-10));
    }
    CHECK(sign_changes(c.g) == sign_changes(d.f));
}

TEST_CASE("cumulative distribution: closed harmonic form, unit plateau") {
    const auto& d = dist(1, 0);
    const auto F = cumulative(d);
    REQUIRE(F.eps_grid.size() == d.eps_grid.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < F.eps_grid.size(); ++i)
        worst = std::max(worst, std::abs(F.F[i] - (1.0 - std::exp(-F.eps_grid[i]))));
    CHECK(worst < 1e-5);
    CHECK(std::is_sorted(F.F.begin(), F.F.end()));
    CHECK_THAT(F.F.back(), WithinAbs(1.0, 1e-3));

    CHECK_THAT(cumulative(dist(5, 4)).F.back(), WithinAbs(1.0, 1e-3));
}

TEST_CASE("non-integrable inputs are refused with the fitted power attached") {
    // the square-well limit has no distribution at all
    const auto box = analytic_box(0);
    EnergyGrid g;
    for (int i = 0; i < 32; ++i) g.eps.push_back(0.01 * (i + 1));
    g.body_begin = 0;
    g.tail_begin = g.eps.size();
    try {
        inverse_abel(box, g);
        FAIL("expected IntegrabilityError");
    } catch (const IntegrabilityError& e) {
        CHECK(e.fitted_exponent == -1.0);
    }

    // a hand-made ε^{−1} distribution trips the cumulative guard
    EnergyDistribution d;
    d.m = 5;
    d.n = 0;
    for (int i = 0; i < 64; ++i) {
        const double eps = std::pow(10.0, -8.0 + 8.0 * i / 63.0);
        d.eps_grid.push_back(eps);
        d.f.push_back(1.0 / eps);
    }
    d.body_begin = d.eps_grid.size();
    d.tail_begin = d.eps_grid.size();
    CHECK_THROWS_AS(cumulative(d), IntegrabilityError);
}

TEST_CASE("mean-energy guard rejects grids truncated before the tail settles") {
    const auto& sol = state(1, 0);
    const auto grid = energy_grid(sol.epsilon, 1, 2.0 * sol.epsilon, 0);
    const auto d = inverse_abel(sol, grid);
    CHECK(d.mean_tail_fraction > 1e-5);
    CHECK_THROWS_AS(mean_energy(d), NumericError);
    CHECK_NOTHROW(mean_energy(dist(1, 0)));
}

TEST_CASE("transform round trip recovers the position density") {
    for (int m : {1, 2, 5}) {
        for (int n : {0, 4}) {
            const auto& sol = state(m, n);
            const auto& d = dist(m, n);
            const auto back = forward_abel(d, 161);
            CHECK(back.warning.empty());
            double worst = 0.0;
            for (std::size_t i = 0; i < back.x.size(); ++i)
                worst = std::max(worst, std::abs(back.rho[i] - sol.rho_at(back.x[i])));
            INFO("m=" << m << " n=" << n << " sup err=" << worst);
            CHECK(worst < 1e-4);
        }
    }
}

TEST_CASE("a narrow energy spike maps onto the classical density") {
    // f → δ(ε−ε0) must reproduce q(ε0, x); a tight Gaussian is close enough
    const double eps0 = 4.0, sigma = 0.05;
    EnergyDistribution d;
    d.m = 1;
    d.n = 0;
    const int pts = 241;
    for (int i = 0; i < pts; ++i) {
        const double eps = eps0 - 6.0 * sigma + 12.0 * sigma * i / (pts - 1);
        d.eps_grid.push_back(eps);
        d.f.push_back(std::exp(-0.5 * std::pow((eps - eps0) / sigma, 2)) /
                      (sigma * std::sqrt(2.0 * M_PI)));
    }
    d.body_begin = 0;   // no singular segment: start splining in ε directly
    d.tail_begin = d.eps_grid.size();
    const auto back = forward_abel(d, 201);
    for (std::size_t i = 0; i < back.x.size(); ++i) {
        const double x = back.x[i];
        if (x > 0.8 * std::sqrt(eps0)) break;   // stay away from the smeared edge
        CHECK_THAT(back.rho[i], WithinRel(classical_density(eps0, x, 1), 2e-2));
    }
}

TEST_CASE("forward transform flags coarse grids and rejects tiny ones") {
    const auto& sol = state(2, 0);
    EnergyGrid g;
    for (int i = 0; i < 400; ++i) g.eps.push_back(0.5 + 0.4 * i);
    g.body_begin = 0;
    g.tail_begin = g.eps.size();
    const auto d = inverse_abel(sol, g);
    CHECK_FALSE(forward_abel(d, 64).warning.empty());

    EnergyGrid tiny;
    for (int i = 0; i < 4; ++i) tiny.eps.push_back(1.0 + i);
    CHECK_THROWS_AS(inverse_abel(sol, tiny), DomainError);
    CHECK_THROWS_AS(forward_abel(dist(2, 0), 8), DomainError);
}

TEST_CASE("physical-unit rescaling") {
    // ħ²/(2μλ) = 1 with λ = 1 leaves the distribution untouched
    {
        Potential pot{5, 1.0, 1.0, std::sqrt(2.0)};
        REQUIRE_THAT(pot.gamma_scale(), WithinRel(1.0, 1e-14));
        const auto& d = dist(5, 0);
        const auto phys = to_physical(d, pot);
        CHECK_THAT(phys.energy.front(), WithinRel(d.eps_grid.front(), 1e-14));
        CHECK_THAT(phys.f.back(), WithinAbs(d.f.back(), 1e-14));
        CHECK_THAT(phys.integral, WithinRel(d.integral, 1e-14));
    }
    // classic oscillator units: γ = ħω/2 = 1/2, mean E_0 = 1/2, f̃ = 2e^{−2E}
    {
        Potential pot{1, 0.5, 1.0, 1.0};
        REQUIRE_THAT(pot.gamma_scale(), WithinRel(0.5, 1e-14));
        const auto& d = dist(1, 0);
        const auto phys = to_physical(d, pot);
        CHECK_THAT(phys.mean_energy, WithinRel(0.5, 1e-4));
        std::size_t i = phys.energy.size() / 3;
        CHECK_THAT(phys.f[i], WithinRel(2.0 * std::exp(-2.0 * phys.energy[i]), 1e-6));
        CHECK_THAT(phys.integral, WithinRel(d.integral, 1e-14));
    }
    // exponent mismatch and box scaling are refused
    CHECK_THROWS_AS(to_physical(dist(5, 0), Potential{2, 1.0, 1.0, 1.0}), DomainError);
    Potential well;
    well.m = BoxLimit{};
    CHECK_THROWS_AS(to_physical(dist(5, 0), well), DomainError);
}

TEST_CASE("energy grids stay representable and ordered at extreme exponents") {
    for (auto [m, eps_n] : {std::pair{1, 9.0}, {5, 29.0}, {100, 56.2}, {200, 58.4}}) {
        const auto g = energy_grid(eps_n, m, 40.0 * eps_n, 4);
        INFO("m=" << m);
        REQUIRE(g.eps.size() > 100);
        CHECK(g.eps.front() > 0.0);
        CHECK(std::isfinite(g.eps.front()));
        CHECK(std::is_sorted(g.eps.begin(), g.eps.end()));
        CHECK(g.body_begin > 0);
        CHECK(g.body_begin < g.tail_begin);
        CHECK(g.tail_begin < g.eps.size());
        // distributions diverge like ε^{−1+3/(2m)}: the bottom knot must not
        // push f beyond double range
        const double lead = -1.0 + 3.0 / (2.0 * m);
        CHECK(lead * std::log(g.eps.front()) < 700.0);
    }
}
