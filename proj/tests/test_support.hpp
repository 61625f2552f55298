#pragma once

// Shared oracle helpers for the test suites. These live in test code and stay
// independent of the implementation paths they check.

#include <cmath>

#include "rough/quadrature.hpp"

namespace test_support {

// C_inf(H) = int_0^inf ((1+r)^{H-1/2} - r^{H-1/2})^2 dr. Quadrature on
// [0, 200] plus the analytic tail (integrand ~ (1/2-H)^2 r^{2H-3}).
inline double kernel_diff_c_infinity(double H) {
    const double q = H - 0.5;
    auto f = [&](double r) {
        const double d = std::pow(1.0 + r, q) - std::pow(r, q);
        return d * d;
    };
    const double body = rough::integrate(f, 0.0, 200.0, 1e-10).value;
    const double tail = q * q * std::pow(200.0, 2.0 * q - 1.0) / (1.0 - 2.0 * q);
    return body + tail;
}

} // namespace test_support
