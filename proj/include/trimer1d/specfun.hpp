#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "trimer1d/errors.hpp"

namespace trimer1d {

/// Principal branch W0 of the Lambert function, w e^w = z with w >= -1.
///
/// Arguments within 1e-12 below the branch point -1/e are clamped to it.
/// Throws Error(domain) further below.
inline double lambert_w0(double z) {
    constexpr double inv_e = 0.36787944117144233;
    // 1/e = inv_e + inv_e_lo to ~1e-33
    constexpr double inv_e_lo = -1.2428753672788363e-17;
    if (std::isnan(z)) fail(ErrorCode::domain, "lambert_w0: NaN argument");
    if (z < -inv_e - 1e-12) fail(ErrorCode::domain, "lambert_w0: argument below -1/e");
    if (z == 0.0) return 0.0;
    if (std::isinf(z)) return z;

    const double dz = (z + inv_e) + inv_e_lo;
    if (dz <= 0.0) return -1.0;

    double w;
    const double p2 = 2.0 * std::numbers::e * dz;
    if (p2 < 0.09) {
        // branch-point series in p = sqrt(2(ez + 1))
        const double p = std::sqrt(p2);
        w = -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0
              + p * (769.0 / 17280.0 + p * (-221.0 / 8505.0))))));
        if (p < 1e-3) return w;
    } else if (std::abs(z) < 1e-8) {
        return z * (1.0 - z * (1.0 - 1.5 * z));
    } else if (z < std::numbers::e) {
        const double l1 = std::log1p(z);
        w = l1 * (1.0 - std::log1p(l1) / (2.0 + l1));
    } else {
        const double l1 = std::log(z);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }

    // Halley iteration on f(w) = w e^w - z
    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - z;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if (denom == 0.0) break;
        const double dw = f / denom;
        w -= dw;
        if (std::abs(dw) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(w), 1e-300))
            break;
    }
    return std::max(w, -1.0);
}

/// Modified Bessel function of the second kind, order zero.
///
/// Log-term power series for x <= 2, Steed's continued fraction for the
/// scaled function above. Returns 0 once e^{-x} underflows.
inline double bessel_k0(double x) {
    if (!(x > 0.0)) fail(ErrorCode::domain, "bessel_k0: argument must be positive");
    if (std::isinf(x)) return 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();

    if (x <= 2.0) {
        const double q = 0.25 * x * x;
        double term = 1.0;
        double i0 = 1.0;
        double harmonic = 0.0;
        double s = 0.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (double(k) * double(k));
            harmonic += 1.0 / k;
            i0 += term;
            s += harmonic * term;
            if (term < eps * 1e-2 * i0) break;
        }
        return -(std::log(0.5 * x) + std::numbers::egamma) * i0 + s;
    }

    // Temme/Steed continued fraction CF2 for K_nu at nu = 0
    const double a1 = 0.25;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double delh = d;
    double h = d;
    double q1 = 0.0;
    double q2 = 1.0;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i < 100000; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps * 0.5) break;
    }
    return std::exp(-x + 0.5 * std::log(std::numbers::pi / (2.0 * x)) - std::log(s));
}

} // namespace trimer1d
