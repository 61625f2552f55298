#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "rough/grid.hpp"
#include "rough/matrix.hpp"

namespace rough {

inline double increment_norm(double v) { return std::abs(v); }
inline double increment_norm(const Vec& v) { return norm2(v); }
inline double increment_norm(const Mat& v) { return v.max_abs(); }

// A 1-increment h_{st} on ordered grid pairs s <= t, with h_{tt} = 0.
// Backed either by a closure (lazy) or by a dense upper-triangular table;
// both satisfy the same contracts.
template <class V>
class Increment2 {
public:
    using Eval = std::function<V(std::size_t, std::size_t)>;

    static Increment2 lazy(Grid grid, Eval eval) {
        return Increment2(grid, std::move(eval), false);
    }

    static Increment2 materialized(Grid grid, const Eval& eval) {
        Increment2 inc(grid, nullptr, true);
        const std::size_t n = grid.n_points();
        inc.dense_.reserve(n * (n + 1) / 2);
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t t = s; t < n; ++t) inc.dense_.push_back(eval(s, t));
        return inc;
    }

    const Grid& grid() const { return grid_; }

    V operator()(std::size_t s, std::size_t t) const {
        if (t < s) throw ParameterError("Increment2: requires s <= t");
        if (dense_mode_) {
            const std::size_t n = grid_.n_points();
            const std::size_t row_offset = s * n - s * (s - 1) / 2;
            return dense_[row_offset + (t - s)];
        }
        return eval_(s, t);
    }

private:
    Increment2(Grid grid, Eval eval, bool dense)
        : grid_(grid), eval_(std::move(eval)), dense_mode_(dense) {}

    Grid grid_;
    Eval eval_;
    bool dense_mode_;
    std::vector<V> dense_;
};

// (delta g)_{st} = g_t - g_s, lazily evaluated on all grid pairs.
inline Increment2<Vec> delta1(const SamplePath& g) {
    auto eval = [path = g](std::size_t s, std::size_t t) {
        Vec out(path.dim());
        for (std::size_t i = 0; i < path.dim(); ++i)
            out[i] = path.value(t, i) - path.value(s, i);
        return out;
    };
    return Increment2<Vec>::lazy(g.grid(), eval);
}

// Single-component delta, convenient for scalar norms.
inline Increment2<double> delta1_component(const SamplePath& g, std::size_t comp) {
    auto eval = [path = g, comp](std::size_t s, std::size_t t) {
        return path.value(t, comp) - path.value(s, comp);
    };
    return Increment2<double>::lazy(g.grid(), eval);
}

namespace detail {
inline void require_ordered(std::size_t s, std::size_t u, std::size_t t) {
    if (!(s <= u && u <= t)) throw ParameterError("delta2: requires s <= u <= t");
}
} // namespace detail

// (delta h)_{sut} = h_{st} - h_{su} - h_{ut}; throws on unordered nodes.
inline double delta2(const Increment2<double>& h, std::size_t s, std::size_t u, std::size_t t) {
    detail::require_ordered(s, u, t);
    return h(s, t) - h(s, u) - h(u, t);
}

inline Vec delta2(const Increment2<Vec>& h, std::size_t s, std::size_t u, std::size_t t) {
    detail::require_ordered(s, u, t);
    Vec a = h(s, t);
    const Vec b = h(s, u);
    const Vec c = h(u, t);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i] + c[i];
    return a;
}

inline Mat delta2(const Increment2<Mat>& h, std::size_t s, std::size_t u, std::size_t t) {
    detail::require_ordered(s, u, t);
    Mat a = h(s, t);
    a -= h(s, u);
    a -= h(u, t);
    return a;
}

} // namespace rough
