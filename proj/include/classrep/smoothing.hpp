#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "classrep/errors.hpp"

namespace classrep {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    const size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("linear_fit: need matching arrays of length ≥ 2");
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DomainError("linear_fit: degenerate abscissae");
    LinearFit out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return out;
}

namespace detail {

// Cholesky solve for a small SPD system; A is row-major d×d, b length d.
template <size_t D>
std::array<double, D> cholesky_solve(std::array<double, D * D> A, std::array<double, D> b) {
    for (size_t j = 0; j < D; ++j) {
        double diag = A[j * D + j];
        for (size_t k = 0; k < j; ++k) diag -= A[j * D + k] * A[j * D + k];
        if (!(diag > 0.0)) throw NumericError("local polynomial fit: normal equations not positive definite");
        const double l = std::sqrt(diag);
        A[j * D + j] = l;
        for (size_t i = j + 1; i < D; ++i) {
            double v = A[i * D + j];
            for (size_t k = 0; k < j; ++k) v -= A[i * D + k] * A[j * D + k];
            A[i * D + j] = v / l;
        }
    }
    // forward then backward substitution
    for (size_t i = 0; i < D; ++i) {
        double v = b[i];
        for (size_t k = 0; k < i; ++k) v -= A[i * D + k] * b[k];
        b[i] = v / A[i * D + i];
    }
    for (size_t ii = D; ii-- > 0;) {
        double v = b[ii];
        for (size_t k = ii + 1; k < D; ++k) v -= A[k * D + ii] * b[k];
        b[ii] = v / A[ii * D + ii];
    }
    return b;
}

// Least-squares quintic through the window, returning derivatives of order
// 0..3 at the window's center abscissa.  Abscissae may be non-uniform; they
// are rescaled to O(1) before forming the normal equations.
inline std::array<double, 4> quintic_window_derivs(std::span<const double> u, std::span<const double> y,
                                                   size_t lo, size_t hi, size_t center) {
    const size_t n = hi - lo + 1;
    double scale = 0.0;
    for (size_t j = lo; j <= hi; ++j) scale = std::max(scale, std::abs(u[j] - u[center]));
    if (scale == 0.0) throw NumericError("local polynomial fit: zero-width window");
    std::array<double, 36> G{};
    std::array<double, 6> r{};
    for (size_t j = lo; j <= hi; ++j) {
        const double t = (u[j] - u[center]) / scale;
        std::array<double, 6> row;
        row[0] = 1.0;
        for (int q = 1; q < 6; ++q) row[q] = row[q - 1] * t;
        for (int a = 0; a < 6; ++a) {
            r[a] += row[a] * y[j];
            for (int b = 0; b <= a; ++b) G[a * 6 + b] += row[a] * row[b];
        }
    }
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b) G[a * 6 + b] = G[b * 6 + a];
    const auto coef = cholesky_solve<6>(G, r);
    (void)n;
    return {coef[0], coef[1] / scale, 2.0 * coef[2] / (scale * scale),
            6.0 * coef[3] / (scale * scale * scale)};
}

} // namespace detail

// d³y/dx³ at every sample of a curve given on a positive, increasing grid,
// computed by windowed quintic fits in u = ln x.  Fitting in the log
// coordinate keeps the window geometry uniform on geometric grids and the
// chain rule converts the u-derivatives back:
//   x³ y''' = y_uuu − 3 y_uu + 2 y_u.
inline std::vector<double> third_derivative_log(std::span<const double> x, std::span<const double> y,
                                                int half_window = 5) {
    const size_t n = x.size();
    if (y.size() != n) throw DomainError("third_derivative_log: size mismatch");
    if (n < 7) throw NumericError("third_derivative_log: need at least 7 samples for a stable quintic window");
    std::vector<double> u(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0)) throw DomainError("third_derivative_log: grid must be positive");
        u[i] = std::log(x[i]);
    }
    std::vector<double> out(n);
    const size_t w = static_cast<size_t>(half_window);
    for (size_t i = 0; i < n; ++i) {
        size_t lo = (i >= w) ? i - w : 0;
        size_t hi = std::min(n - 1, i + w);
        while (hi - lo + 1 < 7) {          // widen one-sidedly near the edges
            if (lo > 0) --lo;
            else ++hi;
        }
        const auto d = detail::quintic_window_derivs(u, y, lo, hi, i);
        const double x3 = x[i] * x[i] * x[i];
        out[i] = (d[3] - 3.0 * d[2] + 2.0 * d[1]) / x3;
    }
    return out;
}

} // namespace classrep
