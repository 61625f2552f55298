#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "rough/errors.hpp"
#include "rough/grid.hpp"
#include "rough/levy_area.hpp"
#include "rough/matrix.hpp"
#include "rough/norms.hpp"
#include "rough/rng.hpp"
#include "rough/telegraph.hpp"

namespace rough {

// Coefficients of dy = sigma(y) dx + b(y) dt. dsigma is the derivative
// tensor, flat index [k*d*n + i*n + l] = d sigma^k_i / d y^l.
struct VectorField {
    std::size_t n = 1; // state dimension
    std::size_t d = 1; // driver dimension
    std::function<Mat(std::span<const double>)> sigma;              // n x d
    std::function<std::vector<double>(std::span<const double>)> dsigma;
    std::function<Vec(std::span<const double>)> b;
};

// Central-difference consistency of dsigma against sigma at random probes;
// returns the worst relative defect.
inline double vector_field_derivative_defect(const VectorField& vf,
                                             std::span<const double> box_lo,
                                             std::span<const double> box_hi,
                                             std::size_t probes, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, 0x76666364);
    const double h = 1e-5;
    double worst = 0.0;
    std::vector<double> y(vf.n);
    for (std::size_t p = 0; p < probes; ++p) {
        for (std::size_t k = 0; k < vf.n; ++k)
            y[k] = box_lo[k] + (box_hi[k] - box_lo[k]) * rng.uniform();
        const auto ds = vf.dsigma(y);
        double scale = 1e-12;
        for (double v : ds) scale = std::max(scale, std::abs(v));
        for (std::size_t l = 0; l < vf.n; ++l) {
            std::vector<double> yp(y), ym(y);
            yp[l] += h;
            ym[l] -= h;
            const Mat sp = vf.sigma(yp);
            const Mat sm = vf.sigma(ym);
            for (std::size_t k = 0; k < vf.n; ++k)
                for (std::size_t i = 0; i < vf.d; ++i) {
                    const double fd = (sp(k, i) - sm(k, i)) / (2.0 * h);
                    const double an = ds[k * vf.d * vf.n + i * vf.n + l];
                    worst = std::max(worst, std::abs(fd - an) / std::max(scale, 1.0));
                }
        }
    }
    return worst;
}

// Driver bundle (path, area, claimed Hoelder exponent gamma).
struct RoughDriver {
    SamplePath x;
    AreaField area;
    double gamma = 0.35;

    RoughDriver(SamplePath path, AreaField af, double g)
        : x(std::move(path)), area(std::move(af)), gamma(g) {
        if (!(gamma > 1.0 / 3.0 && gamma < 0.5))
            throw ParameterError("RoughDriver: gamma must lie in (1/3, 1/2)");
    }
};

// One step of the second-order (Davie-type) controlled-path scheme:
//   y'^k = y^k + sigma^k_i dx^i + dsigma^k_i/dy^l sigma^l_j x2(i,j) + b^k h,
// with x2(i,j) in the outer-integrator-first convention of the area module.
inline Vec rough_step(std::span<const double> y, const VectorField& vf,
                      std::span<const double> dx, const Mat& x2, double h) {
    const std::size_t n = vf.n, d = vf.d;
    if (y.size() != n || dx.size() != d || x2.rows() != d)
        throw ParameterError("rough_step: shape mismatch");
    const Mat sig = vf.sigma(y);
    const auto dsig = vf.dsigma(y);
    const Vec drift = vf.b(y);
    Vec out(y.begin(), y.end());
    for (std::size_t k = 0; k < n; ++k) {
        double acc = drift[k] * h;
        for (std::size_t i = 0; i < d; ++i) {
            acc += sig(k, i) * dx[i];
            for (std::size_t j = 0; j < d; ++j) {
                double gkij = 0.0;
                for (std::size_t l = 0; l < n; ++l)
                    gkij += dsig[k * d * n + i * n + l] * sig(l, j);
                acc += gkij * x2(i, j);
            }
        }
        out[k] += acc;
        if (!std::isfinite(out[k]))
            throw std::overflow_error("rough_step: non-finite state component");
    }
    return out;
}

struct RoughSolution {
    SamplePath y;
    bool convergence_checked = false;
    double measured_order = 0.0;
    bool order_warning = false;
};

struct RoughSolveOptions {
    bool diagnostics = false; // re-solve on coarser sub-grids, estimate order
};

namespace detail {

inline SamplePath solve_rough_on_stride(const RoughDriver& driver, const VectorField& vf,
                                        std::span<const double> a, std::size_t stride) {
    const Grid& g = driver.x.grid();
    const std::size_t n_nodes = g.n_points();
    const std::size_t steps = (n_nodes - 1) / stride;
    SamplePath y(Grid(g.horizon(), steps + 1), vf.n);
    Vec state(a.begin(), a.end());
    for (std::size_t k = 0; k < vf.n; ++k) y.value(0, k) = state[k];
    Vec dx(vf.d);
    for (std::size_t m = 0; m < steps; ++m) {
        const std::size_t s = m * stride;
        const std::size_t t = s + stride;
        for (std::size_t i = 0; i < vf.d; ++i)
            dx[i] = driver.x.value(t, i) - driver.x.value(s, i);
        const Mat x2 = driver.area.reconstruct(s, t);
        const double h = g.node(t) - g.node(s);
        try {
            state = rough_step(state, vf, dx, x2, h);
        } catch (const std::overflow_error&) {
            throw std::overflow_error("solve_rough: overflow at step " + std::to_string(m));
        }
        for (std::size_t k = 0; k < vf.n; ++k) y.value(m + 1, k) = state[k];
    }
    return y;
}

} // namespace detail

// Iterates rough_step over consecutive grid nodes with Chen-reconstructed
// areas. With diagnostics on, re-solves on strides 2 and 4 and estimates the
// empirical self-convergence order from the terminal values.
inline RoughSolution solve_rough(const RoughDriver& driver, const VectorField& vf,
                                 std::span<const double> a,
                                 const RoughSolveOptions& opts = {}) {
    if (a.size() != vf.n) throw ParameterError("solve_rough: initial condition size mismatch");
    if (driver.x.dim() != vf.d) throw ParameterError("solve_rough: driver dimension mismatch");
    RoughSolution sol{detail::solve_rough_on_stride(driver, vf, a, 1)};
    const std::size_t cells = driver.x.grid().n_points() - 1;
    if (opts.diagnostics && cells % 4 == 0 && cells >= 8) {
        const SamplePath y2 = detail::solve_rough_on_stride(driver, vf, a, 2);
        const SamplePath y4 = detail::solve_rough_on_stride(driver, vf, a, 4);
        double e12 = 0.0, e24 = 0.0;
        const std::size_t last1 = sol.y.grid().n_points() - 1;
        for (std::size_t k = 0; k < vf.n; ++k) {
            e12 = std::max(e12, std::abs(sol.y.value(last1, k) -
                                         y2.value(y2.grid().n_points() - 1, k)));
            e24 = std::max(e24, std::abs(y2.value(y2.grid().n_points() - 1, k) -
                                         y4.value(y4.grid().n_points() - 1, k)));
        }
        sol.convergence_checked = true;
        if (e12 > 0.0 && e24 > 0.0) {
            sol.measured_order = std::log2(e24 / e12);
            sol.order_warning = sol.measured_order < 1.0;
        }
    }
    return sol;
}

struct OdeSolveOptions {
    bool allow_under_resolved = false;
    double rel_tol = 1e-10; // unused by the fixed-step scheme, kept for symmetry
};

namespace detail {

// One classical RK4 step of ydot = sigma(y) Xdot(t) + b(y). The final stage
// sits on the piece boundary, where Xdot must be taken one-sided from the
// left or the stage picks up the next telegraph branch.
template <class DriftFn>
inline void rk4_step(Vec& y, double t0, double h, const DriftFn& f) {
    const std::size_t n = y.size();
    Vec k1 = f(t0, y, false);
    Vec tmp(n);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = y[k] + 0.5 * h * k1[k];
    Vec k2 = f(t0 + 0.5 * h, tmp, false);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = y[k] + 0.5 * h * k2[k];
    Vec k3 = f(t0 + 0.5 * h, tmp, false);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = y[k] + h * k3[k];
    Vec k4 = f(t0 + h, tmp, true);
    for (std::size_t k = 0; k < n; ++k)
        y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
}

} // namespace detail

// Classical 4th-order integration of the smooth approximating ODE
// dy = sigma(y) dX^eps + b(y) dt, sub-stepping at the theta sign changes
// where the derivative of X^eps is discontinuous.
inline SamplePath solve_ode_smooth(const PoissonRealization& pr, double H,
                                   const VectorField& vf, std::span<const double> a,
                                   const Grid& fine_grid, const OdeSolveOptions& opts = {}) {
    check_hurst(H);
    if (a.size() != vf.n) throw ParameterError("solve_ode_smooth: initial condition size mismatch");
    if (pr.dim != vf.d) throw ParameterError("solve_ode_smooth: driver dimension mismatch");
    const double e2 = pr.epsilon * pr.epsilon;
    if (fine_grid.step() > 0.25 * e2 && !opts.allow_under_resolved)
        throw ParameterError("solve_ode_smooth: grid step exceeds eps^2/4 (pass the "
                             "under-resolution flag to proceed anyway)");

    // merged sub-step boundaries: all components' sign changes
    std::vector<double> changes;
    for (std::size_t c = 0; c < pr.dim; ++c)
        for (double tau : pr.jumps[c]) {
            const double x = tau * e2;
            if (x < fine_grid.horizon()) changes.push_back(x);
        }
    std::sort(changes.begin(), changes.end());

    auto f = [&](double t, const Vec& y, bool left_limit) {
        const Mat sig = vf.sigma(y);
        Vec out = vf.b(y);
        for (std::size_t i = 0; i < vf.d; ++i) {
            const double xd = xeps_derivative(pr, i, t, H, left_limit);
            for (std::size_t k = 0; k < vf.n; ++k) out[k] += sig(k, i) * xd;
        }
        return out;
    };

    SamplePath y(fine_grid, vf.n);
    Vec state(a.begin(), a.end());
    for (std::size_t k = 0; k < vf.n; ++k) y.value(0, k) = state[k];
    std::size_t ci = 0;
    for (std::size_t m = 0; m + 1 < fine_grid.n_points(); ++m) {
        double t = fine_grid.node(m);
        const double t_end = fine_grid.node(m + 1);
        while (ci < changes.size() && changes[ci] <= t) ++ci;
        std::size_t cj = ci;
        while (t < t_end) {
            double t_next = t_end;
            if (cj < changes.size() && changes[cj] < t_end) {
                t_next = changes[cj];
                ++cj;
            }
            if (t_next > t) detail::rk4_step(state, t, t_next - t, f);
            t = t_next;
        }
        for (std::size_t k = 0; k < vf.n; ++k) {
            if (!std::isfinite(state[k]))
                throw std::overflow_error("solve_ode_smooth: non-finite state at node " +
                                          std::to_string(m + 1));
            y.value(m + 1, k) = state[k];
        }
    }
    return y;
}

} // namespace rough
