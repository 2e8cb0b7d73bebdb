#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <variant>

#include "classrep/errors.hpp"

namespace classrep {

// Tag for the m → ∞ member of the family: an infinite square well on (−1,1).
// Kept as a distinct variant rather than "some big integer" because the box
// has analytic eigenstates and no classical energy distribution; code paths
// that need finite m must refuse it explicitly.
struct BoxLimit {
    friend bool operator==(BoxLimit, BoxLimit) { return true; }
};

using ExponentSpec = std::variant<int, BoxLimit>;

inline bool is_box(const ExponentSpec& m) { return std::holds_alternative<BoxLimit>(m); }

inline int exponent_of(const ExponentSpec& m) {
    if (is_box(m)) throw DomainError("operation requires a finite exponent m, got the box limit");
    const int v = std::get<int>(m);
    if (v < 1) throw DomainError("exponent m must be ≥ 1, got " + std::to_string(v));
    return v;
}

inline std::string exponent_label(const ExponentSpec& m) {
    return is_box(m) ? std::string("inf") : std::to_string(std::get<int>(m));
}

// v(x) = λ z^{2m} in physical coordinates; after the similarity scaling
// z = βx, E = γε everything downstream lives in the dimensionless equation
// ψ'' + (ε − x^{2m}) ψ = 0.
struct Potential {
    ExponentSpec m{1};
    double lambda = 1.0;
    double mu = 1.0;
    double hbar = 1.0;

    void validate() const {
        if (!(lambda > 0.0) || !(mu > 0.0) || !(hbar > 0.0))
            throw DomainError("Potential: lambda, mu, hbar must all be positive");
        if (!is_box(m)) exponent_of(m);   // range-checks the integer
    }

    bool box() const { return is_box(m); }
    int exponent() const { return exponent_of(m); }

    // Length scale β = (ħ²/(2μλ))^{1/(2m+2)}.  In the box limit the exponent
    // 1/(2m+2) → 0, so β → 1 for any positive base.
    double beta_scale() const {
        validate();
        if (box()) return 1.0;
        const double base = hbar * hbar / (2.0 * mu * lambda);
        return std::pow(base, 1.0 / (2.0 * exponent() + 2.0));
    }

    // Energy scale γ = λ β^{2m}; box limit: λ·(ħ²/2μλ)^{m/(m+1)} → ħ²/(2μ).
    double gamma_scale() const {
        validate();
        if (box()) return hbar * hbar / (2.0 * mu);
        const double base = hbar * hbar / (2.0 * mu * lambda);
        return lambda * std::pow(base, exponent() / (exponent() + 1.0));
    }

    // Scaled potential x^{2m} (box: 0 inside the well, +inf outside).
    double v(double x) const {
        if (box()) return std::abs(x) < 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
        return std::pow(x * x, exponent());
    }
};

} // namespace classrep
