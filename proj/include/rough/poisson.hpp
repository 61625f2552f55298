#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "rough/csv.hpp"
#include "rough/errors.hpp"
#include "rough/rng.hpp"

namespace rough {

// Sorted jump times of d independent unit-rate Poisson processes on the
// internal horizon [0, T/eps^2]. External time r maps to internal r/eps^2.
struct PoissonRealization {
    std::size_t dim = 0;
    double horizon = 0.0;          // external T
    double epsilon = 0.0;
    double internal_horizon = 0.0; // T / eps^2
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> jumps; // internal clock, strictly increasing
};

// Minimum admissible epsilon: eps^2 >= 1e-8 * T keeps the expected jump
// count below ~1e8.
inline void check_epsilon(double eps, double T) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ParameterError("epsilon must be in (0, 1]");
    if (eps * eps < 1e-8 * T)
        throw ParameterError("epsilon below floor: requires eps^2 >= 1e-8 * T");
}

// Cumulative sums of unit-rate exponentials per component, truncated at the
// internal horizon. Component c draws from substream (seed, stream=c), so the
// components are independent and individually reproducible.
inline PoissonRealization sample_poisson(std::size_t d, double T, double eps,
                                         std::uint64_t seed) {
    if (d < 1) throw ParameterError("sample_poisson: d >= 1 required");
    if (!(T > 0.0)) throw ParameterError("sample_poisson: T > 0 required");
    check_epsilon(eps, T);
    PoissonRealization pr;
    pr.dim = d;
    pr.horizon = T;
    pr.epsilon = eps;
    pr.internal_horizon = T / (eps * eps);
    pr.seed = seed;
    pr.jumps.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        Rng rng = Rng::substream(seed, /*stream=*/c, /*component=*/0x706f6973);
        double t = rng.exponential();
        while (t <= pr.internal_horizon) {
            pr.jumps[c].push_back(t);
            t += rng.exponential();
        }
    }
    return pr;
}

// Audit export (columns: component, jump_index, internal_time).
inline void write_jumps_csv(std::ostream& os, const PoissonRealization& pr) {
    CsvWriter csv({"component", "jump_index", "internal_time"});
    for (std::size_t c = 0; c < pr.dim; ++c)
        for (std::size_t k = 0; k < pr.jumps[c].size(); ++k)
            csv.add_row({static_cast<std::int64_t>(c), static_cast<std::int64_t>(k),
                         pr.jumps[c][k]});
    csv.write(os);
}

} // namespace rough
