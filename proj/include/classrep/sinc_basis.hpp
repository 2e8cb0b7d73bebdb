#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "classrep/errors.hpp"

namespace classrep {

// Second derivative of the cardinal function sinc((t−jh)/h) at node k,
// times h² (the classic Toeplitz stencil of sinc collocation).
inline double sinc_d2_stencil(int j, int k) {
    if (j == k) return -std::numbers::pi * std::numbers::pi / 3.0;
    const int d = j - k;
    const double sgn = (d % 2 == 0) ? 1.0 : -1.0;
    return -2.0 * sgn / (static_cast<double>(d) * d);
}

namespace detail {

// g(y) = sin(πy)/(πy) and its first three derivatives.  The sine/cosine of
// πy are passed in so a whole cardinal series costs one sincos total.
inline void sinc_g(double y, double s, double c, double out[4]) {
    constexpr double pi = std::numbers::pi;
    if (std::abs(y) < 0.05) {
        const double z = pi * y, z2 = z * z;
        out[0] = 1.0 + z2 * (-1.0 / 6.0 + z2 * (1.0 / 120.0 - z2 / 5040.0));
        out[1] = pi * z * (-1.0 / 3.0 + z2 * (1.0 / 30.0 - z2 / 840.0));
        out[2] = pi * pi * (-1.0 / 3.0 + z2 * (1.0 / 10.0 - z2 / 168.0));
        out[3] = pi * pi * pi * z * (1.0 / 5.0 + z2 * (-1.0 / 42.0 + z2 / 1080.0));
        return;
    }
    const double iy = 1.0 / y, iy2 = iy * iy;
    out[0] = s * iy / pi;
    out[1] = c * iy - s * iy2 / pi;
    out[2] = -pi * s * iy - 2.0 * c * iy2 + 2.0 * s * iy2 * iy / pi;
    out[3] = -pi * pi * c * iy + 3.0 * pi * s * iy2 + 6.0 * c * iy2 * iy - 6.0 * s * iy2 * iy2 / pi;
}

} // namespace detail

// u(t) = Σ_k c_k sinc((t − kh)/h) over nodes k = −khalf..khalf, evaluated
// together with u', u'', u'''.  O(basis size) per point.
struct SincSeries {
    double h = 1.0;
    int khalf = 0;
    std::vector<double> coeffs;   // index j = k + khalf

    int size() const { return 2 * khalf + 1; }
    double node(int k) const { return k * h; }
    double coeff(int k) const { return coeffs[static_cast<std::size_t>(k + khalf)]; }

    void eval(double t, double out[4]) const {
        constexpr double pi = std::numbers::pi;
        const double s_base = std::sin(pi * t / h);
        const double c_base = std::cos(pi * t / h);
        out[0] = out[1] = out[2] = out[3] = 0.0;
        double g[4];
        for (int k = -khalf; k <= khalf; ++k) {
            const double ck = coeff(k);
            if (ck == 0.0) continue;
            const double y = (t - k * h) / h;
            const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
            detail::sinc_g(y, sgn * s_base, sgn * c_base, g);
            out[0] += ck * g[0];
            out[1] += ck * g[1];
            out[2] += ck * g[2];
            out[3] += ck * g[3];
        }
        const double ih = 1.0 / h;
        out[1] *= ih;
        out[2] *= ih * ih;
        out[3] *= ih * ih * ih;
    }
};

} // namespace classrep
