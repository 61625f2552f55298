// Acceptance suite: one line per criterion, exit status 0 iff all pass.
// Every tolerance is pinned here; the Monte Carlo sizes follow the stated
// experiment designs.

#include <chrono>
#include <cstdio>
#include <string>

#include "rough/experiments.hpp"

using namespace rough;
using namespace rough::experiments;

namespace {

constexpr std::uint64_t kSeed = 20250801;
int g_failures = 0;

ExperimentConfig base_config(const std::string& name) {
    ExperimentConfig cfg;
    cfg.experiment = name;
    cfg.seed = kSeed;
    cfg.seed_set = true;
    cfg.outdir = "acceptance_out";
    return cfg;
}

void report(int criterion, const std::string& what, bool pass, double seconds,
            const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%.1f s) %s\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), seconds, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

template <class Fn>
void timed(int criterion, const std::string& what, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        detail = fn(pass);
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(criterion, what, pass, secs, detail);
}

std::string fmt(double v) { return format_double(v); }

} // namespace

int main() {
    std::printf("acceptance suite (seed %llu)\n", static_cast<unsigned long long>(kSeed));

    timed(1, "exact algebra: delta-delta and Chen identities", [&](bool& pass) {
        auto cfg = base_config("chen-check");
        cfg.M = 1000; // triples
        const auto res = run_experiment(cfg);
        pass = res.pass;
        return "max defects in acceptance_out/chen-check/checks.csv";
    });

    timed(2, "Levy-area identity lm2 vs quadrature (100 seeds, d=2, H=0.4, eps=0.1)",
          [&](bool& pass) {
              auto cfg = base_config("levy-area-identity");
              cfg.M = 100;
              cfg.eps_list = {0.1};
              const auto res = run_experiment(cfg);
              pass = res.pass;
              return "max |lm2 - quad| = " + fmt(res.summary.at("max_abs_diff").get<double>()) +
                     " (scale " + fmt(res.summary.at("scale").get<double>()) + ")";
          });

    timed(3, "fBm variance Var(B_1) = 1/(2H) within 3 SE (M = 1e4)", [&](bool& pass) {
        auto cfg = base_config("fbm-variance");
        cfg.M = 10000;
        const auto res = run_experiment(cfg);
        pass = res.pass;
        return "estimate " + fmt(res.summary.at("estimate").get<double>()) + " vs target " +
               fmt(res.summary.at("target").get<double>()) + " (se " +
               fmt(res.summary.at("stderr").get<double>()) + ")";
    });

    timed(4, "scaling slopes 2H +- 0.05 and 4H +- 0.1 (dyadic lags, M = 1e4)", [&](bool& pass) {
        auto cfg = base_config("moment-slope");
        cfg.M = 10000;
        const auto res = run_experiment(cfg);
        pass = res.pass;
        return "increment slope " + fmt(res.summary.at("increment_slope").get<double>()) +
               ", area slope " + fmt(res.summary.at("area_slope").get<double>());
    });

    timed(5, "Kac-Stroock moment bounds (f in {1, t, t^0.3}, eps in {0.2, 0.1}, M = 1e5)",
          [&](bool& pass) {
              auto cfg = base_config("ks-moments");
              cfg.M = 100000;
              cfg.eps_list = {0.2, 0.1};
              const auto res = run_experiment(cfg);
              pass = res.pass;
              return "per-moment rows in acceptance_out/ks-moments/moments.csv";
          });

    timed(6, "characteristic-function distance bound and decrease (M = 1e5)", [&](bool& pass) {
        auto cfg = base_config("cf-bound");
        cfg.M = 100000;
        cfg.eps_list = {0.2, 0.1, 0.05};
        cfg.u_min = -2.0;
        cfg.u_max = 2.0;
        cfg.u_step = 0.25;
        const auto res = run_experiment(cfg);
        pass = res.pass;
        return std::string("bound ") +
               (res.summary.at("bound_pass").get<bool>() ? "holds" : "violated") + ", trend " +
               (res.summary.at("trend_pass").get<bool>() ? "decreasing" : "not decreasing");
    });

    timed(7, "sewing reproduces int t dt to 1e-10; decay ratios within 10%", [&](bool& pass) {
        const auto res = run_experiment(base_config("sewing-demo"));
        pass = res.pass;
        return "rows in acceptance_out/sewing-demo/sewing.csv";
    });

    timed(8, "rough solver: order >= 1, 1e-4 at 2^12 steps, exact Euler reduction",
          [&](bool& pass) {
              const auto res = run_experiment(base_config("rough-solve"));
              pass = res.pass;
              return "terminal error " +
                     fmt(res.summary.at("terminal_error_finest").get<double>()) + ", order " +
                     fmt(res.summary.at("measured_order").get<double>());
          });

    timed(9, "diffusion-approximation trends and tail tightness", [&](bool& pass) {
        auto cfg = base_config("fdd-converge");
        cfg.eps_list = {0.2, 0.1, 0.05};
        cfg.n_grid = 257;  // reference-side fidelity
        cfg.n_fine = 1025;
        cfg.u_min = -2.0;  // characteristic functions near 0 carry the law
        cfg.u_max = 2.0;
        cfg.u_step = 0.5;
        const auto res = run_experiment(cfg);
        pass = res.pass;
        std::string detail = "fdd(pair): ";
        for (double eps : cfg.eps_sorted())
            detail += fmt(res.summary.at("fdd_pair_eps_" + fmt(eps)).get<double>()) + " ";
        detail += "| fdd(y): ";
        for (double eps : cfg.eps_sorted())
            detail += fmt(res.summary.at("fdd_solution_eps_" + fmt(eps)).get<double>()) + " ";
        return detail;
    });

    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
