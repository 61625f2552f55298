#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "rough/increments.hpp"

namespace rough {

// Which grid pairs the sup-type estimators range over. All pairs give the
// exact sup on the grid (O(n^2)); Dyadic restricts to (k 2^j, (k+1) 2^j),
// which scales to large Monte Carlo grids.
enum class PairMode { All, Dyadic };

namespace detail {

template <class Visit>
void for_each_pair(std::size_t n, PairMode mode, Visit&& visit) {
    if (mode == PairMode::All) {
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t t = s + 1; t < n; ++t) visit(s, t);
    } else {
        for (std::size_t span = 1; span < n; span *= 2)
            for (std::size_t s = 0; s + span < n; s += span) visit(s, s + span);
    }
}

} // namespace detail

// Grid estimator of the Hoelder semi-norm sup |g_t - g_s| / |t-s|^mu.
inline double holder_norm1(const SamplePath& g, double mu, PairMode mode = PairMode::All) {
    if (!(mu > 0.0 && mu <= 1.0)) throw ParameterError("holder_norm1: mu must be in (0,1]");
    const std::size_t n = g.grid().n_points();
    if (n < 2) throw InsufficientDataError("holder_norm1: degenerate grid");
    double best = 0.0;
    detail::for_each_pair(n, mode, [&](std::size_t s, std::size_t t) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < g.dim(); ++i) {
            const double di = g.value(t, i) - g.value(s, i);
            d2 += di * di;
        }
        const double dt = g.grid().node(t) - g.grid().node(s);
        best = std::max(best, std::sqrt(d2) / std::pow(dt, mu));
    });
    return best;
}

// Same sup estimator for 1-increments, sup_{s<t} |h_{st}| / (t-s)^mu.
template <class V>
double holder_norm2(const Increment2<V>& h, double mu, PairMode mode = PairMode::All) {
    if (!(mu > 0.0)) throw ParameterError("holder_norm2: mu must be positive");
    const std::size_t n = h.grid().n_points();
    if (n < 2) throw InsufficientDataError("holder_norm2: degenerate grid");
    double best = 0.0;
    detail::for_each_pair(n, mode, [&](std::size_t s, std::size_t t) {
        const double dt = h.grid().node(t) - h.grid().node(s);
        best = std::max(best, increment_norm(h(s, t)) / std::pow(dt, mu));
    });
    return best;
}

namespace detail {

// Trapezoid double sum over [0,T]^2 with the diagonal band |t-s| < step
// excluded; the excluded mass vanishes with the step for the exponents used.
template <class F>
double double_integral_offdiag(const Grid& grid, F&& f) {
    const std::size_t n = grid.n_points();
    const double h = grid.step();
    double acc = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const double wa = (a == 0 || a + 1 == n) ? 0.5 : 1.0;
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            const double wb = (b == 0 || b + 1 == n) ? 0.5 : 1.0;
            acc += wa * wb * f(a, b);
        }
    }
    return acc * h * h;
}

} // namespace detail

// Grid approximation of the Sobolev semi-norm
// ( int int |g_t - g_s|^p / |t-s|^{1+alpha p} ds dt )^{1/p} over [0,T]^2.
inline double sobolev_norm(const SamplePath& g, double alpha, double p) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("sobolev_norm: alpha in (0,1)");
    if (!(p >= 1.0)) throw ParameterError("sobolev_norm: p >= 1");
    const std::size_t n = g.grid().n_points();
    if (n < 2) throw InsufficientDataError("sobolev_norm: degenerate grid");
    const double expo = 1.0 + alpha * p;
    const double total = detail::double_integral_offdiag(g.grid(), [&](std::size_t a, std::size_t b) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < g.dim(); ++i) {
            const double di = g.value(b, i) - g.value(a, i);
            d2 += di * di;
        }
        const double dt = std::abs(g.grid().node(b) - g.grid().node(a));
        return std::pow(std::sqrt(d2), p) / std::pow(dt, expo);
    });
    return std::pow(total, 1.0 / p);
}

// Garsia-type functional ( int int |h_{st}|^p / |t-s|^{gamma p} ds dt )^{1/p};
// the computable surrogate used by the sewing error monitor.
template <class V>
double garsia_U(const Increment2<V>& h, double gamma, double p) {
    if (!(gamma > 0.0)) throw ParameterError("garsia_U: gamma must be positive");
    if (!(p >= 1.0)) throw ParameterError("garsia_U: p >= 1");
    const std::size_t n = h.grid().n_points();
    if (n < 2) throw InsufficientDataError("garsia_U: degenerate grid");
    const double total = detail::double_integral_offdiag(h.grid(), [&](std::size_t a, std::size_t b) {
        const std::size_t s = std::min(a, b), t = std::max(a, b);
        const double dt = h.grid().node(t) - h.grid().node(s);
        return std::pow(increment_norm(h(s, t)), p) / std::pow(dt, gamma * p);
    });
    return std::pow(total, 1.0 / p);
}

} // namespace rough
