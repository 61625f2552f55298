#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rough/fbm.hpp"
#include "rough/parallel.hpp"
#include "rough/stats.hpp"

using namespace rough;

namespace {

// brute-force Riemann oracle on the raw (singular) integrand
double covariance_oracle(double t, double s, double H, std::size_t cells) {
    const double h = s / static_cast<double>(cells);
    double acc = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        const double r = (static_cast<double>(k) + 0.5) * h;
        acc += std::pow(t - r, H - 0.5) * std::pow(s - r, H - 0.5);
    }
    return acc * h;
}

} // namespace

TEST_CASE("covariance closed forms and symmetry") {
    const double H = 0.4;
    CHECK(covariance_R(1.0, 1.0, H) == Catch::Approx(1.25).epsilon(1e-12));
    CHECK(covariance_R(0.7, 0.0, H) == 0.0);
    CHECK(covariance_R(1.0, 0.5, H) == Catch::Approx(covariance_R(0.5, 1.0, H)).epsilon(1e-12));
    CHECK_THROWS_AS(covariance_R(-1.0, 0.5, H), ParameterError);
    CHECK_THROWS_AS(covariance_R(1.0, 0.5, 0.6), ParameterError);
}

TEST_CASE("covariance matches the brute-force oracle") {
    const double H = 0.4;
    const double oracle = covariance_oracle(1.0, 0.5, H, 1'000'000);
    CHECK(covariance_R(1.0, 0.5, H) == Catch::Approx(oracle).epsilon(1e-6));

    const double H2 = 0.35;
    const double oracle2 = covariance_oracle(0.9, 0.7, H2, 1'000'000);
    CHECK(covariance_R(0.9, 0.7, H2) == Catch::Approx(oracle2).epsilon(1e-6));
}

TEST_CASE("increment variance equals the kernel-difference formula") {
    const double H = 0.38, s = 0.4, t = 0.9;
    // midpoint sum of the singular integrand (never samples the endpoint)
    const std::size_t cells = 2'000'000;
    const double h = s / static_cast<double>(cells);
    double head = 0.0;
    for (std::size_t k = 0; k < cells; ++k) {
        const double r = (static_cast<double>(k) + 0.5) * h;
        const double d = std::pow(t - r, H - 0.5) - std::pow(s - r, H - 0.5);
        head += d * d;
    }
    const double direct = head * h + std::pow(t - s, 2.0 * H) / (2.0 * H);
    // the midpoint oracle's singular cell contributes ~h^{2H} error itself
    CHECK(fbm_increment_var(s, t, H) == Catch::Approx(direct).epsilon(5e-6));
}

TEST_CASE("Cholesky simulation basics") {
    const double H = 0.4;
    Grid g(1.0, 9);
    const auto a = simulate_fbm_cholesky(g, 2, H, 11);
    const auto b = simulate_fbm_cholesky(g, 2, H, 11);
    for (std::size_t k = 0; k < g.n_points(); ++k)
        for (std::size_t c = 0; c < 2; ++c) CHECK(a.value(k, c) == b.value(k, c));
    CHECK(a.value(0, 0) == 0.0);
    CHECK(a.value(0, 1) == 0.0);
    CHECK(simulate_fbm_cholesky(g, 2, H, 12).value(3, 0) != a.value(3, 0));

    FbmCholesky model(g, H);
    CHECK(model.jitter_used() <= 1e-10 * 1.25);
}

TEST_CASE("Cholesky variance of B_1") {
    const double H = 0.4;
    Grid g(1.0, 3);
    FbmCholesky model(g, H);
    const std::size_t M = 4000;
    std::vector<double> b1(M);
    parallel_for(M, 2, [&](std::size_t r) {
        b1[r] = model.draw(1, 5, r).value(2, 0);
    });
    const double v = variance(b1);
    CHECK(std::abs(v - 1.25) <= 3.0 * stderr_of_variance(b1));
}

TEST_CASE("dyadic-lag scaling slope is 2H") {
    const double H = 0.4;
    // exact second moments from the covariance: slope must be exactly 2H
    std::vector<LagMoment> exact;
    for (int k = 6; k >= 1; --k) {
        const double lag = std::pow(2.0, -k);
        exact.push_back({lag, covariance_R(lag, lag, H), 1e-14});
    }
    const auto ideal = moment_slope(exact);
    CHECK(ideal.slope == Catch::Approx(2.0 * H).margin(1e-9));

    // empirical slope from Cholesky draws anchored at zero
    Grid g(0.5, 33); // step 2^-6, lags at nodes 1, 2, 4, 8, 16, 32
    FbmCholesky model(g, H);
    const std::size_t M = 3000;
    const std::vector<std::size_t> lag_nodes{1, 2, 4, 8, 16, 32};
    std::vector<std::vector<double>> sq(lag_nodes.size(), std::vector<double>(M));
    parallel_for(M, 2, [&](std::size_t r) {
        const auto path = model.draw(1, 21, r);
        for (std::size_t li = 0; li < lag_nodes.size(); ++li) {
            const double v = path.value(lag_nodes[li], 0);
            sq[li][r] = v * v;
        }
    });
    std::vector<LagMoment> emp;
    for (std::size_t li = 0; li < lag_nodes.size(); ++li)
        emp.push_back(lag_moment_from_samples(g.node(lag_nodes[li]), sq[li]));
    const auto est = moment_slope(emp);
    CHECK(std::abs(est.slope - 0.8) <= std::max(0.05, 3.0 * est.stderr_));
}

TEST_CASE("Volterra construction closed forms") {
    const double H = 0.4;
    Grid g(1.0, 9);
    WienerGrid w(g, 1, 3);

    // dW == 0 -> B == 0
    std::fill(w.dW[0].begin(), w.dW[0].end(), 0.0);
    auto b0 = simulate_fbm_volterra(w, H);
    for (std::size_t k = 0; k < g.n_points(); ++k) CHECK(b0.value(k, 0) == 0.0);

    // single unit increment on the first cell
    w.dW[0][0] = 1.0;
    const auto b1 = simulate_fbm_volterra(w, H);
    const double h = g.step();
    const double wexp = H + 0.5;
    for (std::size_t k = 1; k < g.n_points(); ++k) {
        const double t = g.node(k);
        const double expected =
            (std::pow(t, wexp) - std::pow(t - h, wexp)) / (h * wexp);
        CHECK(b1.value(k, 0) == Catch::Approx(expected).epsilon(1e-12));
    }
    CHECK(b1.value(0, 0) == 0.0);
}

TEST_CASE("Volterra terminal variance matches its exact discretization") {
    const double H = 0.4;
    const std::size_t cells = 256;
    Grid g(1.0, cells + 1);
    const double h = g.step();

    // exact variance of the discretized estimator: sum_j (q_j / h)^2 h
    const auto q = detail::volterra_cell_weights(h, H, cells);
    double var_disc = 0.0;
    for (std::size_t m = 1; m <= cells; ++m) var_disc += q[m] * q[m] / h;

    const std::size_t M = 2000;
    std::vector<double> terminal(M);
    parallel_for(M, 2, [&](std::size_t r) {
        WienerGrid w(g, 1, derive_seed(400, r));
        terminal[r] = simulate_fbm_volterra(w, H).value(cells, 0);
    });
    const double v = variance(terminal);
    CHECK(std::abs(v - var_disc) <= 3.0 * stderr_of_variance(terminal));

    // the discretization bias vanishes as the step halves
    const double exact = covariance_R(1.0, 1.0, H);
    const std::size_t cells2 = 2 * cells;
    const auto q2 = detail::volterra_cell_weights(1.0 / static_cast<double>(cells2), H, cells2);
    double var_disc2 = 0.0;
    for (std::size_t m = 1; m <= cells2; ++m)
        var_disc2 += q2[m] * q2[m] * static_cast<double>(cells2);
    CHECK(std::abs(var_disc2 - exact) < std::abs(var_disc - exact));
}

TEST_CASE("components are independent") {
    const double H = 0.4;
    Grid g(1.0, 5);
    FbmCholesky model(g, H);
    const std::size_t M = 2000;
    std::vector<double> x(M), y(M);
    parallel_for(M, 2, [&](std::size_t r) {
        const auto p = model.draw(2, 8, r);
        x[r] = p.value(4, 0);
        y[r] = p.value(2, 1);
    });
    CHECK(std::abs(correlation(x, y)) <= 3.0 / std::sqrt(static_cast<double>(M)));
}

TEST_CASE("path and covariance CSV exports") {
    const double H = 0.4;
    Grid g(1.0, 3);
    const auto p = simulate_fbm_cholesky(g, 2, H, 4);
    std::ostringstream os;
    write_path_csv(os, p);
    const std::string out = os.str();
    CHECK(out.rfind("t,component,value\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 1 + 3 * 2);

    std::ostringstream cs;
    write_covariance_csv(cs, g, H);
    const std::string cov = cs.str();
    CHECK(cov.rfind("t_i,t_j,value\n", 0) == 0);
    CHECK(std::count(cov.begin(), cov.end(), '\n') == 1 + 3 * 3);
}

TEST_CASE("Volterra and Cholesky marginals agree (two-sample KS at 1%)") {
    const double H = 0.4;
    const std::size_t cells = 256;
    Grid fine(1.0, cells + 1);
    Grid coarse(1.0, 3);
    FbmCholesky model(coarse, H);
    const std::size_t M = 2000;
    std::vector<double> via_chol(M), via_volt(M);
    parallel_for(M, 2, [&](std::size_t r) {
        via_chol[r] = model.draw(1, 1001, r).value(2, 0);
        WienerGrid w(fine, 1, derive_seed(1002, r));
        via_volt[r] = simulate_fbm_volterra(w, H).value(cells, 0);
    });
    const auto ks = ks_two_sample(via_chol, via_volt);
    CHECK_FALSE(ks.reject);
}
