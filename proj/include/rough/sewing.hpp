#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "rough/errors.hpp"
#include "rough/matrix.hpp"
#include "rough/increments.hpp"

namespace rough {

// A candidate 1-increment g_{st} approximating an integral over [s,t],
// integrable by sewing when delta g has Hoelder regularity mu > 1.
template <class V>
struct Germ {
    std::function<V(double, double)> eval;
    double claimed_mu = 2.0;
};

template <class V>
struct SewResult {
    V value{};
    double error_estimate = 0.0;     // last inter-level difference
    int levels = 0;                  // index of the accepted dyadic level
    std::vector<double> ratios;      // |S_{n+1}-S_n| / |S_n-S_{n-1}|
};

// Contraction constant of the sewing map, 1/(2^mu - 2); converts an observed
// germ defect into a guaranteed integral-error bound.
inline double lambda_error_budget(double mu) {
    if (!(mu > 1.0 + 1e-6)) throw ParameterError("lambda_error_budget: mu must exceed 1");
    return 1.0 / (std::pow(2.0, mu) - 2.0);
}

namespace detail {

inline void sew_axpy(double& acc, double v) { acc += v; }
inline void sew_axpy(Vec& acc, const Vec& v) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

inline double sew_dist(double a, double b) { return std::abs(a - b); }
inline double sew_dist(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace detail

// Compensated Riemann sums over uniform dyadic partitions of [s,t], refined
// until consecutive levels differ by less than tol. Inter-level differences
// of a germ with delta g in C3^mu contract with ratio about 2^{1-mu}; an
// observed ratio >= 1 over three consecutive levels aborts with the ratio.
template <class V>
SewResult<V> sew(const Germ<V>& germ, double s, double t,
                 double tol = 1e-10, int max_levels = 24) {
    if (t < s) throw ParameterError("sew: requires s <= t");
    SewResult<V> out;
    V prev = germ.eval(s, t);
    if (s == t) {
        out.value = prev;
        return out;
    }
    double prev_diff = -1.0;
    int bad_streak = 0;
    for (int level = 1; level <= max_levels; ++level) {
        const std::size_t pieces = std::size_t{1} << level;
        const double h = (t - s) / static_cast<double>(pieces);
        V sum = germ.eval(s, s + h);
        for (std::size_t k = 1; k < pieces; ++k) {
            const double a = s + static_cast<double>(k) * h;
            const double b = (k + 1 == pieces) ? t : a + h;
            detail::sew_axpy(sum, germ.eval(a, b));
        }
        const double diff = detail::sew_dist(sum, prev);
        if (prev_diff > 0.0) {
            const double ratio = diff / prev_diff;
            out.ratios.push_back(ratio);
            if (ratio >= 1.0) {
                if (++bad_streak >= 3)
                    throw RegularityError("sew: inter-level differences do not contract", ratio);
            } else {
                bad_streak = 0;
            }
        }
        prev = sum;
        prev_diff = diff;
        out.levels = level;
        if (diff < tol) {
            out.value = sum;
            out.error_estimate = diff;
            return out;
        }
    }
    out.value = prev;
    out.error_estimate = prev_diff;
    return out;
}

} // namespace rough
