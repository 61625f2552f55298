#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rough/experiments.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::string outdir;
    std::optional<unsigned> threads;
    std::optional<double> tol;
};

int run_one(const std::string& experiment, const CliOptions& opts) {
    using namespace rough::experiments;
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) {
            std::cerr << "error: cannot open config file '" << opts.config_path << "'\n";
            return 2;
        }
        nlohmann::json j;
        try {
            in >> j;
            cfg = config_from_json(j);
        } catch (const std::exception& e) {
            std::cerr << "error: bad config file: " << e.what() << '\n';
            return 2;
        }
    }
    cfg.experiment = experiment;
    if (opts.seed) {
        cfg.seed = static_cast<std::uint64_t>(*opts.seed);
        cfg.seed_set = true;
    }
    if (!opts.outdir.empty()) cfg.outdir = opts.outdir;
    if (opts.threads) cfg.threads = *opts.threads;
    if (opts.tol) cfg.tol = *opts.tol;

    try {
        const ExperimentResult res = run_experiment(cfg);
        std::cout << res.summary.dump(2) << '\n';
        std::cout << "wall_seconds: " << res.wall_seconds << '\n';
        std::cout << (res.pass ? "PASS" : "FAIL") << ": " << experiment << '\n';
        return res.pass ? 0 : 1;
    } catch (const rough::ParameterError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error [" << experiment << "]: " << e.what() << '\n';
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo experiments for rough-path approximation of fractional SDEs"};
    app.require_subcommand(1);
    app.fallthrough();

    CliOptions opts;
    app.add_option("--config", opts.config_path, "JSON config file");
    app.add_option("--seed", opts.seed, "master seed (required here or in the config)");
    app.add_option("--out", opts.outdir, "output directory");
    app.add_option("--threads", opts.threads, "worker thread cap (results are unaffected)");
    app.add_option("--tol", opts.tol, "quadrature relative tolerance");

    std::string chosen;
    for (const auto& name : rough::experiments::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->callback([&chosen, name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);
    return run_one(chosen, opts);
}
