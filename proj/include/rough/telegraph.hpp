#pragma once

#include <cmath>
#include <vector>

#include "rough/errors.hpp"
#include "rough/grid.hpp"
#include "rough/poisson.hpp"
#include "rough/quadrature.hpp"

namespace rough {

// Standing assumption of every kernel estimate in this library.
inline void check_hurst(double H) {
    if (!(H > 1.0 / 3.0 && H < 0.5))
        throw ParameterError("Hurst parameter must satisfy 1/3 < H < 1/2");
}

// theta^{eps,i}(r) = (1/eps) * (-1)^{N^i(r / eps^2)}, piecewise constant and
// right-continuous in r. The internal Poisson clock runs at rate 1/eps^2 so
// that the covariance of theta is exp(-2|r-s|/eps^2)/eps^2.
inline int theta_sign(const PoissonRealization& pr, std::size_t comp, double r) {
    if (comp >= pr.dim) throw ParameterError("theta: component out of range");
    if (r < 0.0 || r > pr.horizon) throw std::domain_error("theta: r outside [0, T]");
    const auto& j = pr.jumps[comp];
    const double internal = r / (pr.epsilon * pr.epsilon);
    const auto it = std::upper_bound(j.begin(), j.end(), internal);
    const std::size_t count = static_cast<std::size_t>(it - j.begin());
    return (count % 2 == 0) ? 1 : -1;
}

inline double theta_eval(const PoissonRealization& pr, std::size_t comp, double r) {
    return static_cast<double>(theta_sign(pr, comp, r)) / pr.epsilon;
}

// External-time breakpoints of the sign of theta^{eps,i}, clipped to [0, T]:
// {0, eps^2 tau_1, ..., T}. Piece k carries sign (-1)^k.
inline std::vector<double> sign_breakpoints(const PoissonRealization& pr, std::size_t comp) {
    if (comp >= pr.dim) throw ParameterError("sign_breakpoints: component out of range");
    const double e2 = pr.epsilon * pr.epsilon;
    std::vector<double> breaks;
    breaks.reserve(pr.jumps[comp].size() + 2);
    breaks.push_back(0.0);
    for (double tau : pr.jumps[comp]) {
        const double x = tau * e2;
        if (x >= pr.horizon) break;
        // coincident jumps stay as zero-length pieces: the sign flips twice
        breaks.push_back(x);
    }
    breaks.push_back(pr.horizon);
    return breaks;
}

// Union of every component's sign-change times; any integrand built from the
// X^{i,eps} family is smooth strictly between these points.
inline std::vector<double> merged_sign_breakpoints(const PoissonRealization& pr) {
    std::vector<double> merged;
    const double e2 = pr.epsilon * pr.epsilon;
    for (std::size_t c = 0; c < pr.dim; ++c)
        for (double tau : pr.jumps[c]) {
            const double x = tau * e2;
            if (x < pr.horizon) merged.push_back(x);
        }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    return merged;
}

// Exact piecewise integration of f against theta: partition [0, T] at the
// sign changes, integrate f adaptively on each piece, weight by sign/eps.
template <class F>
double integrate_f_theta(const PoissonRealization& pr, std::size_t comp, const F& f,
                         double rel_tol = 1e-10) {
    const auto breaks = sign_breakpoints(pr, comp);
    double acc = 0.0;
    double sign = 1.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const QuadResult q = integrate(f, breaks[k], breaks[k + 1], rel_tol);
        acc += sign * q.value;
        sign = -sign;
    }
    return acc / pr.epsilon;
}

// Fast exact path for f == 1: signed piece lengths / eps.
inline double integrate_theta(const PoissonRealization& pr, std::size_t comp) {
    const auto breaks = sign_breakpoints(pr, comp);
    double acc = 0.0;
    double sign = 1.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        acc += sign * (breaks[k + 1] - breaks[k]);
        sign = -sign;
    }
    return acc / pr.epsilon;
}

// X^{i,eps}(t) = int_0^t (t+eps-r)^{H-1/2} theta^{eps,i}(r) dr, evaluated
// exactly: the kernel antiderivative telescopes over the sign pieces, one
// power per sign change.
inline double x_eps(const PoissonRealization& pr, std::size_t comp, double t, double H) {
    check_hurst(H);
    if (comp >= pr.dim) throw ParameterError("x_eps: component out of range");
    if (t < 0.0 || t > pr.horizon) throw std::domain_error("x_eps: t outside [0, T]");
    if (t == 0.0) return 0.0;
    const double eps = pr.epsilon;
    const double e2 = eps * eps;
    const double w = H + 0.5;
    const double base = t + eps;
    double acc = std::pow(base, w); // P(0)
    double flip = -2.0;
    std::size_t m = 0;
    for (double tau : pr.jumps[comp]) {
        const double x = tau * e2;
        if (x >= t) break;
        acc += flip * std::pow(base - x, w);
        flip = -flip;
        ++m;
    }
    const double last_sign = (m % 2 == 0) ? 1.0 : -1.0;
    acc -= last_sign * std::pow(eps, w);
    return acc / (eps * w);
}

inline SamplePath build_X_eps(const PoissonRealization& pr, double H, const Grid& grid) {
    check_hurst(H);
    if (grid.horizon() > pr.horizon + 1e-12 * pr.horizon)
        throw ParameterError("build_X_eps: grid horizon exceeds realization horizon");
    SamplePath path(grid, pr.dim);
    for (std::size_t k = 0; k < grid.n_points(); ++k) {
        const double t = std::min(grid.node(k), pr.horizon);
        for (std::size_t i = 0; i < pr.dim; ++i) path.value(k, i) = x_eps(pr, i, t, H);
    }
    return path;
}

// dX^{i,eps}/dt (u) = eps^{H-1/2} theta(u) - alpha_H int_0^u (u+eps-v)^{H-3/2}
// theta(v) dv with alpha_H = 1/2 - H; the inner integral telescopes exactly.
// The derivative jumps at the sign changes; left_limit selects the value
// approached from below (the inner integral itself is continuous in u).
inline double xeps_derivative(const PoissonRealization& pr, std::size_t comp, double u, double H,
                              bool left_limit = false) {
    check_hurst(H);
    if (comp >= pr.dim) throw ParameterError("xeps_derivative: component out of range");
    if (u < 0.0 || u > pr.horizon) throw std::domain_error("xeps_derivative: u outside [0, T]");
    const double eps = pr.epsilon;
    const double e2 = eps * eps;
    const double q = H - 0.5;
    const double base = u + eps;
    double acc = std::pow(base, q); // Q(0)
    double flip = -2.0;
    std::size_t m = 0;
    for (double tau : pr.jumps[comp]) {
        const double x = tau * e2;
        if (left_limit ? (x >= u) : (x > u)) break;
        acc += flip * std::pow(base - x, q);
        flip = -flip;
        ++m;
    }
    const double last_sign = (m % 2 == 0) ? 1.0 : -1.0;
    const double eps_q = std::pow(eps, q);
    acc -= last_sign * eps_q;
    return last_sign * eps_q / eps + acc / eps;
}

} // namespace rough
