#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "rough/csv.hpp"
#include "rough/errors.hpp"
#include "rough/grid.hpp"
#include "rough/matrix.hpp"
#include "rough/quadrature.hpp"
#include "rough/rng.hpp"
#include "rough/telegraph.hpp"

namespace rough {

// Covariance R(t,s) = E[B^i_t B^i_s] = int_0^{min(s,t)} (t-r)^{H-1/2} (s-r)^{H-1/2} dr
// of Liouville fBm. The substitution v = (s-r)^{H+1/2} removes the endpoint
// singularity, leaving a smooth integrand for the adaptive rule.
inline double covariance_R(double t, double s, double H, double rel_tol = 1e-11) {
    check_hurst(H);
    if (t < 0.0 || s < 0.0) throw ParameterError("covariance_R: times must be >= 0");
    if (t < s) std::swap(t, s);
    if (s == 0.0) return 0.0;
    const double w = H + 0.5;
    if (t == s) return std::pow(t, 2.0 * H) / (2.0 * H);
    const double gap = t - s;
    const double upper = std::pow(s, w);
    auto f = [&](double v) { return std::pow(gap + std::pow(v, 1.0 / w), H - 0.5); };
    const QuadResult q = integrate(f, 0.0, upper, rel_tol);
    return q.value / w;
}

// Exact second moment of an increment, from the covariance.
inline double fbm_increment_var(double s, double t, double H) {
    return covariance_R(t, t, H) - 2.0 * covariance_R(t, s, H) + covariance_R(s, s, H);
}

// Exact-in-law simulator on a grid: factor [R(t_i, t_j)] once, draw many.
// t = 0 is excluded from the factorized matrix (B_0 = 0 identically).
class FbmCholesky {
public:
    FbmCholesky(const Grid& grid, double H) : grid_(grid), H_(H) {
        check_hurst(H);
        const std::size_t n = grid.n_points() - 1; // node 0 pinned to zero
        if (n == 0) throw ParameterError("FbmCholesky: grid needs nodes past t = 0");
        Mat cov(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = covariance_R(grid.node(i + 1), grid.node(j + 1), H);
                cov(i, j) = v;
                cov(j, i) = v;
            }
        double max_diag = 0.0;
        for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, cov(i, i));
        // Quadrature noise can make the matrix marginally indefinite; retry
        // with diagonal jitter capped at 1e-10 * max diagonal.
        double jitter = 0.0;
        while (!cholesky(cov, lower_)) {
            jitter = (jitter == 0.0) ? 1e-14 * max_diag : 10.0 * jitter;
            if (jitter > 1e-10 * max_diag)
                throw NumericalError("FbmCholesky: covariance not positive definite within jitter cap");
            for (std::size_t i = 0; i < n; ++i) cov(i, i) += jitter;
        }
        jitter_used_ = jitter;
    }

    // One d-dimensional draw; component c uses substream (seed, draw, c).
    SamplePath draw(std::size_t d, std::uint64_t seed, std::uint64_t draw_index = 0) const {
        const std::size_t n = lower_.rows();
        SamplePath path(grid_, d);
        std::vector<double> z(n);
        for (std::size_t c = 0; c < d; ++c) {
            Rng rng = Rng::substream(seed, draw_index, 0x66626d00ULL + c);
            for (std::size_t i = 0; i < n; ++i) z[i] = rng.normal();
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j <= i; ++j) acc += lower_(i, j) * z[j];
                path.value(i + 1, c) = acc;
            }
        }
        return path;
    }

    double jitter_used() const { return jitter_used_; }
    const Grid& grid() const { return grid_; }

private:
    Grid grid_;
    double H_;
    Mat lower_;
    double jitter_used_ = 0.0;
};

inline SamplePath simulate_fbm_cholesky(const Grid& grid, std::size_t d, double H,
                                        std::uint64_t seed) {
    return FbmCholesky(grid, H).draw(d, seed);
}

// Explicit Wiener increments on a fine grid; the coupling target for the
// Volterra construction and the reference Levy area.
struct WienerGrid {
    Grid grid;
    std::size_t dim;
    std::uint64_t seed;
    std::vector<std::vector<double>> dW; // [component][cell], Var = step

    WienerGrid(const Grid& g, std::size_t d, std::uint64_t s, std::uint64_t draw_index = 0)
        : grid(g), dim(d), seed(s), dW(d) {
        const std::size_t cells = g.n_points() - 1;
        const double sd = std::sqrt(g.step());
        for (std::size_t c = 0; c < d; ++c) {
            Rng rng = Rng::substream(s, draw_index, 0x77696e00ULL + c);
            dW[c].resize(cells);
            for (std::size_t k = 0; k < cells; ++k) dW[c][k] = sd * rng.normal();
        }
    }
};

namespace detail {

// q_m = int over one cell at offset m of x^{H-1/2} dx, exact.
inline std::vector<double> volterra_cell_weights(double h, double H, std::size_t cells) {
    const double w = H + 0.5;
    std::vector<double> q(cells + 1, 0.0);
    double prev = 0.0;
    for (std::size_t m = 1; m <= cells; ++m) {
        const double cur = std::pow(static_cast<double>(m) * h, w);
        q[m] = (cur - prev) / w;
        prev = cur;
    }
    return q;
}

} // namespace detail

// Covariance-matrix audit export (columns: t_i, t_j, value).
inline void write_covariance_csv(std::ostream& os, const Grid& grid, double H) {
    CsvWriter csv({"t_i", "t_j", "value"});
    for (std::size_t i = 0; i < grid.n_points(); ++i)
        for (std::size_t j = 0; j < grid.n_points(); ++j)
            csv.add_row({grid.node(i), grid.node(j),
                         covariance_R(grid.node(i), grid.node(j), H)});
    csv.write(os);
}

// B(t_k) = sum_{j<k} dW_j * (1/h) int_{cell_j} (t_k - r)^{H-1/2} dr.
// The cell-averaged kernel handles the r -> t_k singularity exactly.
inline SamplePath simulate_fbm_volterra(const WienerGrid& wiener, double H) {
    check_hurst(H);
    const Grid& g = wiener.grid;
    const std::size_t cells = g.n_points() - 1;
    const double h = g.step();
    const auto q = detail::volterra_cell_weights(h, H, cells);
    SamplePath path(g, wiener.dim);
    for (std::size_t c = 0; c < wiener.dim; ++c) {
        for (std::size_t k = 1; k <= cells; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < k; ++j) acc += wiener.dW[c][j] * q[k - j];
            path.value(k, c) = acc / h;
        }
    }
    return path;
}

} // namespace rough
