#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "classrep/errors.hpp"

namespace classrep {

// Cubic spline with value, first-derivative and antiderivative queries.
// Ends are natural (S'' = 0) by default, or clamped to prescribed end slopes
// when those are known — the natural condition costs a visible boundary-layer
// error whenever the data has genuine curvature at an endpoint.  Queries
// outside the knot range throw DomainError — extrapolation is always a bug in
// this codebase.
class CubicSpline {
  public:
    CubicSpline() = default;

    CubicSpline(std::span<const double> x, std::span<const double> y)
        : CubicSpline(x, y, false, 0.0, false, 0.0) {}

    CubicSpline(std::span<const double> x, std::span<const double> y, double slope_left,
                double slope_right)
        : CubicSpline(x, y, true, slope_left, true, slope_right) {}

  private:
    CubicSpline(std::span<const double> x, std::span<const double> y, bool clamp_l, double sl,
                bool clamp_r, double sr)
        : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
        const size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw DomainError("CubicSpline: need matching arrays of length ≥ 2");
        for (size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw DomainError("CubicSpline: abscissae must strictly increase");
        m_.assign(n, 0.0);

        // Tridiagonal system for the knot second derivatives.  Natural end:
        // M = 0.  Clamped end: match S' to the prescribed slope.
        std::vector<double> diag(n), upper(n, 0.0), lower(n, 0.0), rhs(n, 0.0);
        if (clamp_l) {
            const double h0 = x_[1] - x_[0];
            diag[0] = 2.0;
            upper[0] = 1.0;
            rhs[0] = 6.0 * ((y_[1] - y_[0]) / h0 - sl) / h0;
        } else {
            diag[0] = 1.0;
        }
        for (size_t i = 1; i + 1 < n; ++i) {
            const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
            lower[i] = h0;
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        }
        if (clamp_r) {
            const double h1 = x_[n - 1] - x_[n - 2];
            lower[n - 1] = 1.0;
            diag[n - 1] = 2.0;
            rhs[n - 1] = 6.0 * (sr - (y_[n - 1] - y_[n - 2]) / h1) / h1;
        } else {
            diag[n - 1] = 1.0;
        }

        // Thomas elimination.
        for (size_t i = 1; i < n; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_[n - 1] = rhs[n - 1] / diag[n - 1];
        for (size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    }

  public:

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

    double operator()(double x) const {
        const size_t i = locate(x);
        const double h = x_[i + 1] - x_[i];
        const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
        return A * y_[i] + B * y_[i + 1] +
               ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
    }

    double derivative(double x) const {
        const size_t i = locate(x);
        const double h = x_[i + 1] - x_[i];
        const double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
        return (y_[i + 1] - y_[i]) / h +
               (-(3.0 * A * A - 1.0) * m_[i] + (3.0 * B * B - 1.0) * m_[i + 1]) * h / 6.0;
    }

    // ∫_a^b of the spline.
    double integral(double a, double b) const {
        if (b < a) return -integral(b, a);
        double sum = antiderivative_from_knot(b) - antiderivative_from_knot(a);
        // add the full segments between the knots bracketing a and b
        const size_t ia = locate(a), ib = locate(b);
        for (size_t i = ia; i < ib; ++i) sum += segment_integral(i);
        return sum;
    }

  private:
    size_t locate(double x) const {
        if (!(x >= x_.front() && x <= x_.back()))
            throw DomainError("CubicSpline: query " + std::to_string(x) + " outside [" +
                              std::to_string(x_.front()) + ", " + std::to_string(x_.back()) + "]");
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        size_t i = static_cast<size_t>(it - x_.begin());
        if (i > 0) --i;
        if (i + 1 >= x_.size()) i = x_.size() - 2;
        return i;
    }

    double segment_integral(size_t i) const {
        const double h = x_[i + 1] - x_[i];
        return 0.5 * h * (y_[i] + y_[i + 1]) - h * h * h * (m_[i] + m_[i + 1]) / 24.0;
    }

    // ∫ from the knot left of x up to x itself.
    double antiderivative_from_knot(double x) const {
        const size_t i = locate(x);
        const double h = x_[i + 1] - x_[i];
        const double B = (x - x_[i]) / h, A = 1.0 - B;
        const double iA = B - 0.5 * B * B;
        const double iB = 0.5 * B * B;
        const double iA3 = A * A / 2.0 - A * A * A * A / 4.0 - 0.25;
        const double iB3 = B * B * B * B / 4.0 - B * B / 2.0;
        return h * (iA * y_[i] + iB * y_[i + 1] + (iA3 * m_[i] + iB3 * m_[i + 1]) * h * h / 6.0);
    }

    std::vector<double> x_, y_, m_;
};

} // namespace classrep
