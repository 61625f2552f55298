#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "rough/csv.hpp"
#include "rough/errors.hpp"
#include "rough/fbm.hpp"
#include "rough/grid.hpp"
#include "rough/matrix.hpp"
#include "rough/quadrature.hpp"
#include "rough/rng.hpp"
#include "rough/telegraph.hpp"

namespace rough {

// Index convention used everywhere in this library:
//     x2_{st}(i, j) = int_s^t (x^j_u - x^j_s) dx^i_u,
// i.e. the first index is the outer integrator. Under this convention
//     (delta x2)_{sut}(i, j) = (delta x^j)_{su} (delta x^i)_{ut},
// and the anchored reconstruction below is the Chen relation solved for
// x2_{st}. The rough-solver second-order term depends on this pairing.

enum class AreaMethod { Quadrature, Lm2, Lm12, DiagonalClosedForm };

inline const char* area_method_name(AreaMethod m) {
    switch (m) {
        case AreaMethod::Quadrature: return "quadrature";
        case AreaMethod::Lm2: return "lm2";
        case AreaMethod::Lm12: return "lm12";
        default: return "diagonal-closed-form";
    }
}

// Order-2 increment stored anchored: a_k(i,j) = x2_{0, t_k}(i, j), together
// with the underlying path. Reconstruction is exact algebra, O(n) memory.
struct AreaField {
    SamplePath path;
    std::vector<Mat> anchors; // one d x d matrix per grid node, anchors[0] = 0
    AreaMethod method = AreaMethod::Quadrature;

    AreaField(SamplePath p, std::vector<Mat> a, AreaMethod m)
        : path(std::move(p)), anchors(std::move(a)), method(m) {
        if (anchors.size() != path.grid().n_points())
            throw ParameterError("AreaField: one anchor per grid node required");
        if (anchors[0].max_abs() != 0.0)
            throw ParameterError("AreaField: anchor at t = 0 must vanish");
    }

    std::size_t dim() const { return path.dim(); }

    // x2_{st}(i,j) = a_t(i,j) - a_s(i,j) - (x^j_s - x^j_0)(x^i_t - x^i_s).
    Mat reconstruct(std::size_t s, std::size_t t) const {
        if (t < s) throw ParameterError("AreaField::reconstruct: requires s <= t");
        const std::size_t d = dim();
        Mat out = anchors[t];
        out -= anchors[s];
        for (std::size_t i = 0; i < d; ++i) {
            const double dxi = path.value(t, i) - path.value(s, i);
            for (std::size_t j = 0; j < d; ++j)
                out(i, j) -= (path.value(s, j) - path.value(0, j)) * dxi;
        }
        return out;
    }
};

inline Mat chen_reconstruct(const AreaField& af, std::size_t s, std::size_t t) {
    return af.reconstruct(s, t);
}

inline void write_area_csv(std::ostream& os, const AreaField& af) {
    CsvWriter csv({"t", "i", "j", "anchored_value", "method"});
    const std::string method = area_method_name(af.method);
    for (std::size_t k = 0; k < af.anchors.size(); ++k)
        for (std::size_t i = 0; i < af.dim(); ++i)
            for (std::size_t j = 0; j < af.dim(); ++j)
                csv.add_row({af.path.grid().node(k), static_cast<std::int64_t>(i),
                             static_cast<std::int64_t>(j), af.anchors[k](i, j), method});
    csv.write(os);
}

// ---------------------------------------------------------------------------
// Smooth-path areas by quadrature
// ---------------------------------------------------------------------------

// Component evaluator: (component, time) -> value.
using PathFn = std::function<double(std::size_t, double)>;

// x2_{st}(i,j) = int_s^t (x^j_u - x^j_s) xdot^i(u) du by adaptive quadrature,
// splitting at the supplied kink locations of xdot (per outer component i).
inline Mat area_smooth_quadrature(const PathFn& x, const PathFn& xdot, std::size_t d,
                                  double s, double t, double rel_tol = 1e-8,
                                  const std::vector<std::vector<double>>* xdot_breaks = nullptr) {
    if (t < s) throw ParameterError("area_smooth_quadrature: requires s <= t");
    Mat out = Mat::square(d);
    static const std::vector<double> no_breaks;
    for (std::size_t i = 0; i < d; ++i) {
        const std::vector<double>& breaks =
            xdot_breaks ? (*xdot_breaks)[i] : no_breaks;
        for (std::size_t j = 0; j < d; ++j) {
            const double xjs = x(j, s);
            auto f = [&](double u) { return (x(j, u) - xjs) * xdot(i, u); };
            out(i, j) = integrate_with_breaks(f, s, t, breaks, rel_tol, 1e-14).value;
        }
    }
    return out;
}

// Area of the Kac-Stroock path X^eps on [s,t]: off-diagonal entries by
// quadrature against the exact derivative, diagonal by 1/2 (dX)^2.
// Splits at every component's sign changes: the integrand mixes the outer
// derivative (which jumps at changes of i) with X^j (whose derivative kinks
// at changes of j).
inline Mat area_xeps_quadrature(const PoissonRealization& pr, double H, double s, double t,
                                double rel_tol = 1e-8) {
    check_hurst(H);
    if (t < s) throw ParameterError("area_xeps_quadrature: requires s <= t");
    const std::size_t d = pr.dim;
    Mat out = Mat::square(d);
    const auto breaks = merged_sign_breakpoints(pr);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) {
                const double dx = x_eps(pr, i, t, H) - x_eps(pr, i, s, H);
                out(i, i) = 0.5 * dx * dx;
                continue;
            }
            const double xjs = x_eps(pr, j, s, H);
            auto f = [&](double u) {
                return (x_eps(pr, j, u, H) - xjs) * xeps_derivative(pr, i, u, H);
            };
            out(i, j) = integrate_with_breaks(f, s, t, breaks, rel_tol, 1e-14).value;
        }
    }
    return out;
}

// Single off-diagonal entry of the X^eps area, for samplers that only need
// one component pair.
inline double area_xeps_entry(const PoissonRealization& pr, double H, std::size_t i,
                              std::size_t j, double s, double t, double rel_tol = 1e-8) {
    check_hurst(H);
    if (t < s) throw ParameterError("area_xeps_entry: requires s <= t");
    if (i == j) {
        const double dx = x_eps(pr, i, t, H) - x_eps(pr, i, s, H);
        return 0.5 * dx * dx;
    }
    const auto breaks = merged_sign_breakpoints(pr);
    const double xjs = x_eps(pr, j, s, H);
    auto f = [&](double u) {
        return (x_eps(pr, j, u, H) - xjs) * xeps_derivative(pr, i, u, H);
    };
    return integrate_with_breaks(f, s, t, breaks, rel_tol, 1e-14).value;
}

// ---------------------------------------------------------------------------
// Alternative form of the Kac-Stroock area (boundary kernels + double term)
// ---------------------------------------------------------------------------

namespace detail {

// I(u) = int_0^u (u+eps-v)^{H-3/2} theta^i(v) dv, exact on the sign pieces.
inline double xeps_kernel_inner(const PoissonRealization& pr, std::size_t comp, double u,
                                double H) {
    const double eps = pr.epsilon;
    const double e2 = eps * eps;
    const double q = H - 0.5;
    const double alpha = 0.5 - H;
    const double base = u + eps;
    double acc = std::pow(base, q);
    double flip = -2.0;
    std::size_t m = 0;
    for (double tau : pr.jumps[comp]) {
        const double x = tau * e2;
        if (x > u) break;
        acc += flip * std::pow(base - x, q);
        flip = -flip;
        ++m;
    }
    acc -= ((m % 2 == 0) ? 1.0 : -1.0) * std::pow(eps, q);
    return -acc / (eps * alpha);
}

} // namespace detail

// Evaluates the three-term alternative expression for the area of X^eps:
// two boundary kernel integrals against theta plus the alpha_H double term.
// The double term is reduced by Fubini to two one-dimensional integrals; the
// inner kernel integrals telescope exactly over the sign partition.
inline Mat area_lm2(const PoissonRealization& pr, double H, double s, double t,
                    double rel_tol = 1e-8) {
    check_hurst(H);
    if (t < s) throw ParameterError("area_lm2: requires s <= t");
    const std::size_t d = pr.dim;
    const double eps = pr.epsilon;
    const double alpha = 0.5 - H;
    Mat out = Mat::square(d);
    if (t == s) return out;
    // split at every component's sign changes (X^j kinks there too), plus
    // the kink at v = s from the (s v v) switch
    const auto breaks = merged_sign_breakpoints(pr);
    auto breaks_with_s = breaks;
    breaks_with_s.insert(std::lower_bound(breaks_with_s.begin(), breaks_with_s.end(), s), s);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double xjs = x_eps(pr, j, s, H);
            auto theta_i = [&](double u) { return theta_eval(pr, i, u); };

            auto f1 = [&](double u) {
                return (x_eps(pr, j, u, H) - xjs) * std::pow(t + eps - u, H - 0.5) * theta_i(u);
            };
            const double t1 = integrate_with_breaks(f1, 0.0, t, breaks, rel_tol, 1e-14).value;

            double t2 = 0.0;
            if (s > 0.0) {
                auto f2 = [&](double u) {
                    return (x_eps(pr, j, u, H) - xjs) * std::pow(s + eps - u, H - 0.5) * theta_i(u);
                };
                t2 = integrate_with_breaks(f2, 0.0, s, breaks, rel_tol, 1e-14).value;
            }

            auto f3a = [&](double u) {
                return x_eps(pr, j, u, H) * detail::xeps_kernel_inner(pr, i, u, H);
            };
            const double t3a = integrate_with_breaks(f3a, s, t, breaks, rel_tol, 1e-14).value;

            auto f3b = [&](double v) {
                const double sv = std::max(s, v);
                const double kernel =
                    (std::pow(sv + eps - v, H - 0.5) - std::pow(t + eps - v, H - 0.5)) / alpha;
                return theta_i(v) * x_eps(pr, j, v, H) * kernel;
            };
            const double t3b =
                integrate_with_breaks(f3b, 0.0, t, breaks_with_s, rel_tol, 1e-14).value;

            out(i, j) = t1 - t2 - alpha * t3a + alpha * t3b;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reference Levy area of Liouville fBm (adapted left-point discretization)
// ---------------------------------------------------------------------------

namespace detail {

// kappa_m = int over one cell at offset m >= 1 of x^{H-3/2} dx, exact.
inline std::vector<double> singular_cell_weights(double h, double H, std::size_t cells) {
    const double q = H - 0.5;
    std::vector<double> kappa(cells + 1, 0.0);
    double prev = std::pow(h, q);
    for (std::size_t m = 1; m <= cells; ++m) {
        const double cur = std::pow(static_cast<double>(m + 1) * h, q);
        kappa[m] = (cur - prev) / q;
        prev = cur;
    }
    return kappa;
}

} // namespace detail

// Direct discretization of the fBm area over one interval [t_s, t_t] of the
// fine Wiener grid: left-point sums of the three-term representation, with
// exact cell integrals of both kernels. B must be the Volterra path built
// from the same Wiener grid. Off-diagonal only; diagonal is 1/2 (dB)^2.
inline Mat fbm_area_direct(const WienerGrid& w, const SamplePath& B, double H,
                           std::size_t s_idx, std::size_t t_idx) {
    check_hurst(H);
    if (t_idx < s_idx) throw ParameterError("fbm_area_direct: requires s <= t");
    if (!(B.grid() == w.grid)) throw std::domain_error("fbm_area_direct: B not on the Wiener grid");
    const std::size_t d = w.dim;
    const double h = w.grid.step();
    const double alpha = 0.5 - H;
    const auto q = detail::volterra_cell_weights(h, H, t_idx);
    const auto kappa = detail::singular_cell_weights(h, H, t_idx);
    Mat out = Mat::square(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) {
                const double db = B.value(t_idx, i) - B.value(s_idx, i);
                out(i, i) = 0.5 * db * db;
                continue;
            }
            const double bjs = B.value(s_idx, j);
            double acc = 0.0;
            for (std::size_t a = 0; a < t_idx; ++a) {
                double kernel;
                if (a >= s_idx)
                    kernel = q[t_idx - a] / h;
                else
                    kernel = (q[t_idx - a] - q[s_idx - a]) / h;
                double g = 0.0;
                const double bja = B.value(a, j);
                for (std::size_t b = std::max(a + 1, s_idx); b < t_idx; ++b)
                    g += (B.value(b, j) - bja) * kappa[b - a];
                acc += w.dW[i][a] * ((B.value(a, j) - bjs) * kernel - alpha * g);
            }
            out(i, j) = acc;
        }
    }
    return out;
}

// Anchored areas B2_{0, t_k} at every node of the fine grid in O(n^2) total:
// the double term is reorganized by cell offset so each anchor reuses the
// prefix sums P_m[l] = sum_{a<=l} dW_a (B_{a+m} - B_a).
inline AreaField fbm_area_anchors(const WienerGrid& w, const SamplePath& B, double H) {
    check_hurst(H);
    if (!(B.grid() == w.grid)) throw std::domain_error("fbm_area_anchors: B not on the Wiener grid");
    const std::size_t d = w.dim;
    const std::size_t n = w.grid.n_points() - 1; // cells
    const double h = w.grid.step();
    const double alpha = 0.5 - H;
    const auto q = detail::volterra_cell_weights(h, H, n);
    const auto kappa = detail::singular_cell_weights(h, H, n);
    std::vector<Mat> anchors(n + 1, Mat::square(d));

    // diagonal: closed form
    for (std::size_t k = 1; k <= n; ++k)
        for (std::size_t i = 0; i < d; ++i) {
            const double b = B.value(k, i);
            anchors[k](i, i) = 0.5 * b * b;
        }

    std::vector<std::vector<double>> prefix(n); // prefix[m-1][l], m = 1..n-1
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (i == j) continue;
            for (std::size_t m = 1; m < n; ++m) {
                auto& p = prefix[m - 1];
                p.assign(n - m, 0.0);
                double acc = 0.0;
                for (std::size_t a = 0; a + m < n; ++a) {
                    acc += w.dW[i][a] * (B.value(a + m, j) - B.value(a, j));
                    p[a] = acc;
                }
            }
            for (std::size_t k = 1; k <= n; ++k) {
                double t1 = 0.0;
                for (std::size_t a = 0; a < k; ++a)
                    t1 += B.value(a, j) * q[k - a] * w.dW[i][a];
                double t2 = 0.0;
                for (std::size_t m = 1; m + 1 <= k; ++m)
                    t2 += kappa[m] * prefix[m - 1][k - 1 - m];
                anchors[k](i, j) = t1 / h - alpha * t2;
            }
        }
    }
    return AreaField(B, std::move(anchors), AreaMethod::Lm12);
}

// Single anchor B2_{0, t_k}, direct loops; convenient for per-lag sampling.
inline Mat fbm_area_anchor(const WienerGrid& w, const SamplePath& B, double H, std::size_t k) {
    return fbm_area_direct(w, B, H, 0, k);
}

// Time-based lookup on the fine grid; interpolation is refused.
inline Mat fbm_area_at(const WienerGrid& w, const SamplePath& B, double H, double s, double t) {
    const double h = w.grid.step();
    auto to_index = [&](double v) {
        const double kf = v / h;
        const auto k = static_cast<std::size_t>(std::llround(kf));
        if (k >= w.grid.n_points() || std::abs(kf - static_cast<double>(k)) > 1e-9)
            throw std::domain_error("fbm_area_at: time is not a fine-grid node");
        return k;
    };
    return fbm_area_direct(w, B, H, to_index(s), to_index(t));
}

// ---------------------------------------------------------------------------
// Chen identity check
// ---------------------------------------------------------------------------

struct ChenReport {
    double max_defect = 0.0;
    double scale = 0.0; // max |x2| magnitude seen
    std::size_t worst_s = 0, worst_u = 0, worst_t = 0;
    double tolerance = 0.0;
    bool pass = true;
};

using AreaEval = std::function<Mat(std::size_t, std::size_t)>;

// Defect |x2_{st} - x2_{su} - x2_{ut} - (dx)_{su} (x) (dx)_{ut}| over the
// given triples; the cross term follows the outer-integrator-first pairing.
inline ChenReport chen_check(const AreaEval& area, const SamplePath& path,
                             const std::vector<std::array<std::size_t, 3>>& triples,
                             double tolerance) {
    ChenReport rep;
    rep.tolerance = tolerance;
    const std::size_t d = path.dim();
    for (const auto& tri : triples) {
        const auto [s, u, t] = tri;
        if (!(s <= u && u <= t)) throw ParameterError("chen_check: unordered triple");
        const Mat ast = area(s, t);
        const Mat asu = area(s, u);
        const Mat aut = area(u, t);
        rep.scale = std::max({rep.scale, ast.max_abs(), asu.max_abs(), aut.max_abs()});
        double defect = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double dxj_su = path.value(u, j) - path.value(s, j);
                const double dxi_ut = path.value(t, i) - path.value(u, i);
                defect = std::max(defect, std::abs(ast(i, j) - asu(i, j) - aut(i, j) -
                                                   dxj_su * dxi_ut));
            }
        if (defect > rep.max_defect) {
            rep.max_defect = defect;
            rep.worst_s = s;
            rep.worst_u = u;
            rep.worst_t = t;
        }
    }
    rep.pass = rep.max_defect <= tolerance;
    return rep;
}

// Random ordered triples on a grid, reproducible from the seed.
inline std::vector<std::array<std::size_t, 3>> random_triples(std::size_t n_points,
                                                              std::size_t count,
                                                              std::uint64_t seed) {
    Rng rng = Rng::substream(seed, 0x74726970);
    std::vector<std::array<std::size_t, 3>> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::array<std::size_t, 3> tri;
        for (auto& v : tri) v = static_cast<std::size_t>(rng.uniform() * n_points);
        std::sort(tri.begin(), tri.end());
        out.push_back(tri);
    }
    return out;
}

} // namespace rough
