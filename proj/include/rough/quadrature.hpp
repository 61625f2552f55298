#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include "rough/errors.hpp"

namespace rough {

struct QuadResult {
    double value = 0.0;
    double error = 0.0; // accumulated local error bound
    std::size_t evals = 0;
};

namespace detail {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(const F& f, double a, double b, double& resk, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double fv1[7], fv2[7];
    double resg = fc * kWg[3];
    double k_raw = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        fv1[j] = f(c - x);
        fv2[j] = f(c + x);
        const double fsum = fv1[j] + fv2[j];
        k_raw += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    }
    // resasc-scaled error (QUADPACK): guards against |K-G| flattering itself
    // on integrands with unresolved structure.
    const double mean_val = k_raw * 0.5;
    double resasc = kWgk[7] * std::abs(fc - mean_val);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - mean_val) + std::abs(fv2[j] - mean_val));
    resasc *= std::abs(h);
    resk = k_raw * h;
    err = std::abs((k_raw - resg) * h);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
}

struct QuadInterval {
    double a, b, value, error;
    bool operator<(const QuadInterval& o) const { return error < o.error; }
};

} // namespace detail

// Globally adaptive Gauss-Kronrod integration of f over [a, b]: the interval
// with the largest error estimate is bisected first, which reaches integrable
// endpoint singularities without starving the smooth part of the budget.
// Throws ToleranceError when the error bound stays above 10x the target.
template <class F>
QuadResult integrate(const F& f, double a, double b,
                     double rel_tol = 1e-10, double abs_tol = 1e-14,
                     std::size_t max_splits = 4000) {
    QuadResult out;
    if (a == b) return out;
    detail::QuadInterval whole{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, whole.value, whole.error);
    out.evals = 15;
    double total_value = whole.value;
    double total_error = whole.error;
    auto target = [&] { return std::max(abs_tol, rel_tol * std::abs(total_value)); };
    std::priority_queue<detail::QuadInterval> heap;
    heap.push(whole);
    std::size_t splits = 0;
    while (total_error > target() && splits < max_splits && !heap.empty()) {
        const detail::QuadInterval top = heap.top();
        const double mid = 0.5 * (top.a + top.b);
        if (mid <= top.a || mid >= top.b) break; // interval at rounding limit
        heap.pop();
        detail::QuadInterval left{top.a, mid, 0.0, 0.0};
        detail::QuadInterval right{mid, top.b, 0.0, 0.0};
        detail::gk15(f, left.a, left.b, left.value, left.error);
        detail::gk15(f, right.a, right.b, right.value, right.error);
        out.evals += 30;
        total_value += left.value + right.value - top.value;
        total_error += left.error + right.error - top.error;
        heap.push(left);
        heap.push(right);
        ++splits;
    }
    out.value = total_value;
    out.error = total_error;
    if (total_error > 10.0 * target())
        throw ToleranceError("adaptive quadrature failed to converge", out.value, out.error);
    return out;
}

// Integrates f over [a, b] with mandatory splits at the interior breakpoints
// (sorted ascending; entries outside (a, b) are ignored).
template <class F>
QuadResult integrate_with_breaks(const F& f, double a, double b,
                                 std::span<const double> breaks,
                                 double rel_tol = 1e-10, double abs_tol = 1e-14,
                                 std::size_t max_splits = 4000) {
    QuadResult out;
    if (a == b) return out;
    double lo = a;
    auto piece = [&](double x0, double x1) {
        if (x1 <= x0) return;
        QuadResult r = integrate(f, x0, x1, rel_tol,
                                 std::max(abs_tol * (x1 - x0) / (b - a), 1e-300), max_splits);
        out.value += r.value;
        out.error += r.error;
        out.evals += r.evals;
    };
    for (double t : breaks) {
        if (t <= lo) continue;
        if (t >= b) break;
        piece(lo, t);
        lo = t;
    }
    piece(lo, b);
    return out;
}

} // namespace rough
