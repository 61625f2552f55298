#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rough/fbm.hpp"
#include "rough/levy_area.hpp"
#include "rough/parallel.hpp"
#include "rough/stats.hpp"

#include "test_support.hpp"

using namespace rough;

TEST_CASE("smooth quadrature area: linear path") {
    const double a1 = 1.0, a2 = 2.0;
    PathFn x = [&](std::size_t c, double u) { return (c == 0 ? a1 : a2) * u; };
    PathFn xd = [&](std::size_t c, double) { return c == 0 ? a1 : a2; };
    const Mat m = area_smooth_quadrature(x, xd, 2, 0.2, 0.9);
    const double d = 0.7;
    const double coef[2] = {a1, a2};
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(m(i, j) == Catch::Approx(coef[i] * coef[j] * d * d / 2.0).epsilon(1e-10));
}

TEST_CASE("smooth quadrature area: (t, t^2) on [0,1]") {
    PathFn x = [](std::size_t c, double u) { return c == 0 ? u : u * u; };
    PathFn xd = [](std::size_t c, double u) { return c == 0 ? 1.0 : 2.0 * u; };
    const Mat m = area_smooth_quadrature(x, xd, 2, 0.0, 1.0);
    CHECK(m(0, 1) == Catch::Approx(1.0 / 3.0).epsilon(1e-10)); // int u^2 du
    CHECK(m(1, 0) == Catch::Approx(2.0 / 3.0).epsilon(1e-10)); // int u 2u du
    CHECK(m(0, 0) == Catch::Approx(0.5).epsilon(1e-10));
    CHECK(m(1, 1) == Catch::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("anchored reconstruction closed forms") {
    const double a1 = 1.5, a2 = -0.7;
    Grid g(2.0, 9);
    SamplePath path(g, 2);
    for (std::size_t k = 0; k < g.n_points(); ++k) {
        path.value(k, 0) = a1 * g.node(k);
        path.value(k, 1) = a2 * g.node(k);
    }
    std::vector<Mat> anchors(g.n_points(), Mat::square(2));
    const double coef[2] = {a1, a2};
    for (std::size_t k = 0; k < g.n_points(); ++k)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                anchors[k](i, j) = coef[i] * coef[j] * g.node(k) * g.node(k) / 2.0;
    AreaField af(path, anchors, AreaMethod::Quadrature);

    const Mat zero = af.reconstruct(3, 3);
    CHECK(zero.max_abs() == 0.0);

    const Mat anchor = af.reconstruct(0, 5);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(anchor(i, j) == anchors[5](i, j));

    const Mat mid = af.reconstruct(2, 7);
    const double dt = g.node(7) - g.node(2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(mid(i, j) == Catch::Approx(coef[i] * coef[j] * dt * dt / 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(af.reconstruct(5, 2), ParameterError);
}

namespace {

AreaField quadrature_area_field(const Grid& g) {
    // smooth 2-d path (sin t, cos 2t + t)
    PathFn x = [](std::size_t c, double u) {
        return c == 0 ? std::sin(u) : std::cos(2.0 * u) + u;
    };
    PathFn xd = [](std::size_t c, double u) {
        return c == 0 ? std::cos(u) : 1.0 - 2.0 * std::sin(2.0 * u);
    };
    SamplePath path(g, 2);
    for (std::size_t k = 0; k < g.n_points(); ++k) {
        path.value(k, 0) = x(0, g.node(k));
        path.value(k, 1) = x(1, g.node(k));
    }
    std::vector<Mat> anchors;
    anchors.reserve(g.n_points());
    for (std::size_t k = 0; k < g.n_points(); ++k)
        anchors.push_back(area_smooth_quadrature(x, xd, 2, 0.0, g.node(k), 1e-10));
    return AreaField(path, anchors, AreaMethod::Quadrature);
}

} // namespace

TEST_CASE("chen identity on independently quadratured smooth areas") {
    Grid g(1.0, 17);
    PathFn x = [](std::size_t c, double u) {
        return c == 0 ? std::sin(u) : std::cos(2.0 * u) + u;
    };
    PathFn xd = [](std::size_t c, double u) {
        return c == 0 ? std::cos(u) : 1.0 - 2.0 * std::sin(2.0 * u);
    };
    SamplePath path(g, 2);
    for (std::size_t k = 0; k < g.n_points(); ++k) {
        path.value(k, 0) = x(0, g.node(k));
        path.value(k, 1) = x(1, g.node(k));
    }
    AreaEval eval = [&](std::size_t s, std::size_t t) {
        return area_smooth_quadrature(x, xd, 2, g.node(s), g.node(t), 1e-10);
    };
    const auto triples = random_triples(g.n_points(), 200, 99);
    const auto rep = chen_check(eval, path, triples, 1e-8);
    CHECK(rep.pass);
    CHECK(rep.max_defect < 1e-8);

    // corrupting one directly computed value is detected
    AreaEval corrupted = [&](std::size_t s, std::size_t t) {
        Mat m = eval(s, t);
        if (s == 2 && t == 9) m(0, 1) += 1.0;
        return m;
    };
    std::vector<std::array<std::size_t, 3>> with_bad = {{2, 5, 9}};
    const auto rep_bad = chen_check(corrupted, path, with_bad, 1e-8);
    CHECK_FALSE(rep_bad.pass);
    CHECK(rep_bad.max_defect >= 0.5);
}

TEST_CASE("reconstructed fields satisfy Chen exactly") {
    Grid g(1.0, 17);
    const AreaField af = quadrature_area_field(g);
    AreaEval eval = [&](std::size_t s, std::size_t t) { return af.reconstruct(s, t); };
    const auto triples = random_triples(g.n_points(), 300, 5);
    const auto rep = chen_check(eval, af.path, triples, 1e-13);
    CHECK(rep.pass);
}

TEST_CASE("lm2 equals the quadrature area without jumps (closed form)") {
    const double H = 0.4, eps = 0.1;
    PoissonRealization pr;
    pr.dim = 2;
    pr.horizon = 1.0;
    pr.epsilon = eps;
    pr.internal_horizon = 100.0;
    pr.jumps = {{}, {}};
    const double s = 0.2, t = 0.8;
    const Mat lm2 = area_lm2(pr, H, s, t, 1e-10);
    const Mat quad = area_xeps_quadrature(pr, H, s, t, 1e-10);
    // both components coincide with the same smooth function, so every entry
    // equals 1/2 (x(t) - x(s))^2
    const double dx = x_eps(pr, 0, t, H) - x_eps(pr, 0, s, H);
    const double expected = 0.5 * dx * dx;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(lm2(i, j) == Catch::Approx(expected).epsilon(1e-6));
            CHECK(quad(i, j) == Catch::Approx(expected).epsilon(1e-6));
        }
}

TEST_CASE("lm2 agrees with the quadrature area on random realizations") {
    const double H = 0.4, eps = 0.1;
    const double s = 0.3, t = 0.9;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto pr = sample_poisson(2, 1.0, eps, seed);
        const Mat lm2 = area_lm2(pr, H, s, t, 1e-9);
        const Mat quad = area_xeps_quadrature(pr, H, s, t, 1e-9);
        const double scale = std::max(lm2.max_abs(), quad.max_abs());
        Mat diff = lm2;
        diff -= quad;
        CHECK(diff.max_abs() < 1e-6 * std::max(scale, 1.0));
    }
}

TEST_CASE("lm2 vanishes on the empty interval") {
    const auto pr = sample_poisson(2, 1.0, 0.2, 4);
    CHECK(area_lm2(pr, 0.4, 0.5, 0.5).max_abs() == 0.0);
}

TEST_CASE("fbm area: diagonal closed form and exact Chen consistency") {
    const double H = 0.4;
    const std::size_t cells = 64;
    Grid g(1.0, cells + 1);
    WienerGrid w(g, 2, 17);
    const auto B = simulate_fbm_volterra(w, H);
    const auto af = fbm_area_anchors(w, B, H);

    // diagonal anchors: 1/2 B^2
    for (std::size_t k = 0; k <= cells; ++k)
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(af.anchors[k](i, i) ==
                  Catch::Approx(0.5 * B.value(k, i) * B.value(k, i)).margin(1e-14));

    // the direct (s,t) sums and the anchored Chen reconstruction are the
    // same discretization, so they agree to rounding
    for (auto [s, t] : {std::pair<std::size_t, std::size_t>{0, 40},
                        {8, 48}, {17, 63}, {30, 31}}) {
        const Mat direct = fbm_area_direct(w, B, H, s, t);
        const Mat recon = af.reconstruct(s, t);
        Mat diff = direct;
        diff -= recon;
        CHECK(diff.max_abs() <= 1e-10 * std::max(1.0, recon.max_abs()));
    }
}

TEST_CASE("fbm area off-diagonal is centered") {
    const double H = 0.4;
    const std::size_t cells = 128;
    Grid g(1.0, cells + 1);
    const std::size_t M = 1500;
    std::vector<double> vals(M);
    parallel_for(M, 2, [&](std::size_t r) {
        WienerGrid w(g, 2, derive_seed(2024, r));
        const auto B = simulate_fbm_volterra(w, H);
        vals[r] = fbm_area_anchor(w, B, H, cells)(0, 1);
    });
    CHECK(std::abs(mean(vals)) <= 3.0 * stderr_of_mean(vals));
}

TEST_CASE("fbm area variance matches the conditional-Gaussian oracle") {
    // A_k(i,j) = sum_a dW^i_a c_a with c_a measurable w.r.t. W^j, so
    // E[A_k^2] = h sum_a E[c_a^2], and E[c_a^2] expands exactly in the
    // covariance R of the Volterra path.
    const double H = 0.4;
    const std::size_t cells = 48;
    Grid g(1.0, cells + 1);
    const double h = g.step();
    const double alpha = 0.5 - H;
    const std::size_t k = cells;

    // exact covariance of the *discretized* Volterra path
    const auto q = detail::volterra_cell_weights(h, H, cells);
    Mat condR(cells + 1, cells + 1, 0.0);
    for (std::size_t x = 1; x <= cells; ++x)
        for (std::size_t y = 1; y <= x; ++y) {
            double acc = 0.0;
            for (std::size_t a = 0; a < y; ++a) acc += q[x - a] * q[y - a] / h;
            condR(x, y) = acc;
            condR(y, x) = acc;
        }

    const auto kappa = detail::singular_cell_weights(h, H, cells);
    double exact_var = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        std::vector<double> wgt(cells + 1, 0.0);
        wgt[a] += q[k - a] / h;
        for (std::size_t b = a + 1; b < k; ++b) {
            wgt[b] -= alpha * kappa[b - a];
            wgt[a] += alpha * kappa[b - a];
        }
        double caca = 0.0;
        for (std::size_t x = 0; x <= cells; ++x) {
            if (wgt[x] == 0.0) continue;
            for (std::size_t y = 0; y <= cells; ++y)
                if (wgt[y] != 0.0) caca += wgt[x] * wgt[y] * condR(x, y);
        }
        exact_var += h * caca;
    }

    const std::size_t M = 3000;
    std::vector<double> sq(M);
    parallel_for(M, 2, [&](std::size_t r) {
        WienerGrid w(g, 2, derive_seed(555, r));
        const auto B = simulate_fbm_volterra(w, H);
        const double v = fbm_area_anchor(w, B, H, k)(0, 1);
        sq[r] = v * v;
    });
    CHECK(std::abs(mean(sq) - exact_var) <= 3.0 * stderr_of_mean(sq));
}

TEST_CASE("fbm area time-based lookup refuses interpolation") {
    const double H = 0.4;
    Grid g(1.0, 17);
    WienerGrid w(g, 2, 5);
    const auto B = simulate_fbm_volterra(w, H);
    const Mat direct = fbm_area_direct(w, B, H, 4, 12);
    const Mat by_time = fbm_area_at(w, B, H, g.node(4), g.node(12));
    CHECK(direct(0, 1) == by_time(0, 1));
    CHECK_THROWS_AS(fbm_area_at(w, B, H, 0.26, 0.75), std::domain_error);
}

TEST_CASE("X2 diagonal second moment respects the 4H bound") {
    // E|X2_{st}(i,i)|^2 = E[(dX)^4]/4 <= 6 (C_inf^2 + 1/(4H^2)) |t-s|^{4H}
    const double H = 0.4, eps = 0.1;
    const double c_inf = test_support::kernel_diff_c_infinity(H);
    const double c = 6.0 * (c_inf * c_inf + 1.0 / (4.0 * H * H));
    const double s = 0.3, t = 0.8;
    const std::size_t M = 3000;
    std::vector<double> sq(M);
    parallel_for(M, 2, [&](std::size_t r) {
        const auto pr = sample_poisson(1, 1.0, eps, derive_seed(808, r));
        const double dx = x_eps(pr, 0, t, H) - x_eps(pr, 0, s, H);
        sq[r] = 0.25 * dx * dx * dx * dx;
    });
    const double bound = c * std::pow(t - s, 4.0 * H);
    CHECK(mean(sq) <= bound + 3.0 * stderr_of_mean(sq));
}

TEST_CASE("area CSV export shape") {
    Grid g(1.0, 3);
    const AreaField af = quadrature_area_field(g);
    std::ostringstream os;
    write_area_csv(os, af);
    const std::string out = os.str();
    CHECK(out.rfind("t,i,j,anchored_value,method\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 1 + 3 * 2 * 2);
}
