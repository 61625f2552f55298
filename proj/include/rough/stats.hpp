#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "rough/errors.hpp"
#include "rough/grid.hpp"
#include "rough/norms.hpp"

namespace rough {

inline double mean(std::span<const double> xs) {
    if (xs.empty()) throw InsufficientDataError("mean: empty sample");
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw InsufficientDataError("variance: need at least 2 samples");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double stderr_of_mean(std::span<const double> xs) {
    return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

// Standard error of the sample variance, sqrt((m4 - m2^2) / M).
inline double stderr_of_variance(std::span<const double> xs) {
    const double m = mean(xs);
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double c2 = (x - m) * (x - m);
        m2 += c2;
        m4 += c2 * c2;
    }
    const double M = static_cast<double>(xs.size());
    m2 /= M;
    m4 /= M;
    return std::sqrt(std::max(0.0, m4 - m2 * m2) / M);
}

// ---------------------------------------------------------------------------
// Empirical characteristic functions
// ---------------------------------------------------------------------------

struct CharFnEstimate {
    std::vector<double> u;
    std::vector<std::complex<double>> estimate;
    std::vector<double> se; // combined standard error of the complex estimate
    std::size_t sample_size = 0;
};

// (1/M) sum exp(i u s_m) with per-u standard errors.
inline CharFnEstimate ecf(std::span<const double> samples, std::span<const double> u_grid) {
    if (samples.empty()) throw InsufficientDataError("ecf: empty sample set");
    CharFnEstimate out;
    out.sample_size = samples.size();
    out.u.assign(u_grid.begin(), u_grid.end());
    const double M = static_cast<double>(samples.size());
    for (double u : u_grid) {
        double cre = 0.0, cim = 0.0, cre2 = 0.0, cim2 = 0.0;
        for (double s : samples) {
            const double c = std::cos(u * s), si = std::sin(u * s);
            cre += c;
            cim += si;
            cre2 += c * c;
            cim2 += si * si;
        }
        cre /= M;
        cim /= M;
        const double var_re = std::max(0.0, cre2 / M - cre * cre);
        const double var_im = std::max(0.0, cim2 / M - cim * cim);
        out.estimate.emplace_back(cre, cim);
        out.se.push_back(std::sqrt((var_re + var_im) / M));
    }
    return out;
}

// Joint empirical characteristic function of k-dimensional samples at one u.
inline std::complex<double> joint_ecf_at(std::span<const double> samples, std::size_t dim,
                                         std::span<const double> u) {
    const std::size_t M = samples.size() / dim;
    double cre = 0.0, cim = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        double dot = 0.0;
        for (std::size_t k = 0; k < dim; ++k) dot += u[k] * samples[m * dim + k];
        cre += std::cos(dot);
        cim += std::sin(dot);
    }
    const double Md = static_cast<double>(M);
    return {cre / Md, cim / Md};
}

// Max over the u-grid of |ecf_A(u) - ecf_B(u)| for same-dimension samples
// stored row-major (one k-vector per observation).
inline double fdd_distance(std::span<const double> samples_a, std::span<const double> samples_b,
                           std::size_t dim, std::span<const double> u_grid_flat) {
    if (dim == 0 || samples_a.size() % dim != 0 || samples_b.size() % dim != 0 ||
        u_grid_flat.size() % dim != 0)
        throw InsufficientDataError("fdd_distance: dimension mismatch");
    if (samples_a.empty() || samples_b.empty())
        throw InsufficientDataError("fdd_distance: empty sample set");
    double worst = 0.0;
    for (std::size_t p = 0; p * dim < u_grid_flat.size(); ++p) {
        const auto u = u_grid_flat.subspan(p * dim, dim);
        const auto fa = joint_ecf_at(samples_a, dim, u);
        const auto fb = joint_ecf_at(samples_b, dim, u);
        worst = std::max(worst, std::abs(fa - fb));
    }
    return worst;
}

// Tensor u-grid {lo, lo+step, ..., hi}^dim flattened row-major.
inline std::vector<double> tensor_u_grid(double lo, double hi, double step, std::size_t dim) {
    std::vector<double> axis;
    for (double u = lo; u <= hi + 1e-12; u += step) axis.push_back(u);
    std::vector<double> flat;
    std::vector<std::size_t> idx(dim, 0);
    while (true) {
        for (std::size_t k = 0; k < dim; ++k) flat.push_back(axis[idx[k]]);
        std::size_t k = dim;
        while (k > 0) {
            if (++idx[k - 1] < axis.size()) break;
            idx[k - 1] = 0;
            --k;
        }
        if (k == 0) break;
    }
    return flat;
}

// ---------------------------------------------------------------------------
// Moment-scaling regression
// ---------------------------------------------------------------------------

struct LagMoment {
    double lag = 0.0;
    double moment = 0.0;
    double se = 0.0;
};

struct SlopeEstimate {
    double slope = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0;
};

// OLS of log(moment) on log(lag); the slope variance propagates the per-lag
// standard errors through the log transform.
inline SlopeEstimate moment_slope(std::span<const LagMoment> points) {
    if (points.size() < 3) throw InsufficientDataError("moment_slope: need at least 3 lags");
    const std::size_t n = points.size();
    double sx = 0.0, sy = 0.0;
    for (const auto& p : points) {
        if (!(p.lag > 0.0 && p.moment > 0.0))
            throw ParameterError("moment_slope: lags and moments must be positive");
        sx += std::log(p.lag);
        sy += std::log(p.moment);
    }
    const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(p.lag) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(p.moment) - my);
    }
    SlopeEstimate out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    double var = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(p.lag) - mx;
        const double rel = p.se / p.moment; // delta method for log(moment)
        var += (dx / sxx) * (dx / sxx) * rel * rel;
    }
    out.stderr_ = std::sqrt(var);
    return out;
}

inline LagMoment lag_moment_from_samples(double lag, std::span<const double> samples) {
    LagMoment lm;
    lm.lag = lag;
    lm.moment = mean(samples);
    lm.se = stderr_of_mean(samples);
    return lm;
}

// ---------------------------------------------------------------------------
// Hoelder-norm tail probe
// ---------------------------------------------------------------------------

struct TailPoint {
    double threshold = 0.0;
    double probability = 0.0;
    double se = 0.0;
};

// Empirical P[ ||path||_gamma > A ] per threshold, with binomial errors.
inline std::vector<TailPoint> holder_tail(std::span<const SamplePath> paths, double gamma,
                                          std::span<const double> thresholds,
                                          PairMode mode = PairMode::All) {
    if (paths.size() < 100)
        throw InsufficientDataError("holder_tail: batch size must be >= 100");
    std::vector<double> norms;
    norms.reserve(paths.size());
    for (const auto& p : paths) norms.push_back(holder_norm1(p, gamma, mode));
    const double M = static_cast<double>(paths.size());
    std::vector<TailPoint> out;
    for (double a : thresholds) {
        double count = 0.0;
        for (double v : norms)
            if (v > a) count += 1.0;
        const double p = count / M;
        out.push_back({a, p, std::sqrt(p * (1.0 - p) / M)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Two-sample Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

struct KsResult {
    double statistic = 0.0;
    double critical = 0.0;
    bool reject = false;
};

// Reject threshold c(alpha) * sqrt((n+m)/(nm)); c(0.01) = 1.628.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                              double c_alpha = 1.628) {
    if (a.empty() || b.empty()) throw InsufficientDataError("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] <= b[ib])
            ++ia;
        else
            ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }
    KsResult out;
    out.statistic = d;
    out.critical = c_alpha * std::sqrt((na + nb) / (na * nb));
    out.reject = d > out.critical;
    return out;
}

inline double correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw InsufficientDataError("correlation: mismatched or tiny samples");
    const double mx = mean(xs), my = mean(ys);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxy += (xs[k] - mx) * (ys[k] - my);
        sxx += (xs[k] - mx) * (xs[k] - mx);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace rough
