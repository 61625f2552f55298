#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "rough/csv.hpp"
#include "rough/errors.hpp"

namespace rough {

// Uniform grid on [0, T] with node(k) = k * T / (n_points - 1).
class Grid {
public:
    Grid(double horizon, std::size_t n_points) : horizon_(horizon), n_(n_points) {
        if (!(horizon > 0.0)) throw ParameterError("Grid: horizon must be positive");
        if (n_points < 2) throw ParameterError("Grid: need at least 2 points");
    }

    double horizon() const { return horizon_; }
    std::size_t n_points() const { return n_; }
    double step() const { return horizon_ / static_cast<double>(n_ - 1); }
    double node(std::size_t k) const {
        return k + 1 == n_ ? horizon_ : static_cast<double>(k) * step();
    }

    bool operator==(const Grid& o) const { return horizon_ == o.horizon_ && n_ == o.n_; }

private:
    double horizon_;
    std::size_t n_;
};

// d-component path sampled on a grid; values stored node-major.
class SamplePath {
public:
    SamplePath(Grid grid, std::size_t dim)
        : grid_(grid), dim_(dim), values_(grid.n_points() * dim, 0.0) {
        if (dim == 0) throw ParameterError("SamplePath: dim must be >= 1");
    }

    const Grid& grid() const { return grid_; }
    std::size_t dim() const { return dim_; }

    double value(std::size_t node, std::size_t comp) const {
        return values_[node * dim_ + comp];
    }
    double& value(std::size_t node, std::size_t comp) {
        return values_[node * dim_ + comp];
    }
    std::span<const double> at(std::size_t node) const {
        return {values_.data() + node * dim_, dim_};
    }
    std::span<double> at(std::size_t node) {
        return {values_.data() + node * dim_, dim_};
    }

private:
    Grid grid_;
    std::size_t dim_;
    std::vector<double> values_;
};

// Path export (columns: t, component, value).
inline void write_path_csv(std::ostream& os, const SamplePath& path) {
    CsvWriter csv({"t", "component", "value"});
    for (std::size_t k = 0; k < path.grid().n_points(); ++k)
        for (std::size_t c = 0; c < path.dim(); ++c)
            csv.add_row({path.grid().node(k), static_cast<std::int64_t>(c), path.value(k, c)});
    csv.write(os);
}

} // namespace rough
