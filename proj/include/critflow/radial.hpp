#pragma once

// Closed-form reference solutions on the annulus r0 < |x| < 1:
//  - piecewise-constant radial coefficient (rho_minus inside r1, rho_plus
//    outside): u = 1 + a_minus ln(r/r0) inside, a_plus ln r outside, with
//    a_plus = (rho_minus/rho_plus) a_minus and
//    a_minus = ((rho_minus/rho_plus) ln r1 - ln(r1/r0))^{-1}
//  - half-plane-split coefficient with the discontinuity through the
//    center (y1 = 0): u = ln r / ln 0.05 independently of the two values.

#include <cmath>

#include "critflow/errors.hpp"
#include "critflow/geo.hpp"

namespace critflow {

struct RadialExact {
    double r0, r1;
    double rho_minus, rho_plus;
    double a_minus, a_plus;

    RadialExact(double r0_, double r1_, double rho_minus_, double rho_plus_)
        : r0(r0_), r1(r1_), rho_minus(rho_minus_), rho_plus(rho_plus_) {
        if (!(0.0 < r0 && r0 < r1 && r1 < 1.0))
            throw OutOfRange("radial exact solution needs 0 < r0 < r1 < 1");
        if (!(rho_minus > 0.0 && rho_plus > 0.0))
            throw OutOfRange("radial exact solution needs positive coefficients");
        a_minus = 1.0 / ((rho_minus / rho_plus) * std::log(r1) - std::log(r1 / r0));
        a_plus = (rho_minus / rho_plus) * a_minus;
    }

    double u(double r) const {
        if (r < r0 - 1e-12 || r > 1.0 + 1e-12) throw OutOfRange("radius outside [r0, 1]");
        r = std::clamp(r, r0, 1.0);
        if (r <= r1) return 1.0 + a_minus * std::log(r / r0);
        return a_plus * std::log(r);
    }

    double u(const Vec2& x) const { return u(norm(x)); }

    // (a/r)(cos t, sin t): never vanishes on the closed annulus
    Vec2 grad(const Vec2& x) const {
        const double r = norm(x);
        if (r < r0 - 1e-12 || r > 1.0 + 1e-12) throw OutOfRange("radius outside [r0, 1]");
        const double a = (r <= r1) ? a_minus : a_plus;
        return x * (a / (r * r));
    }
};

// y1 = 0 half-plane discontinuity on the annulus with r0 = 0.05.
inline double halfplane_discontinuity_exact(double r) {
    if (r < 0.05 - 1e-12 || r > 1.0 + 1e-12) throw OutOfRange("radius outside [0.05, 1]");
    r = std::clamp(r, 0.05, 1.0);
    return std::log(r) / std::log(0.05);
}

}  // namespace critflow
