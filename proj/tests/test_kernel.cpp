#include "catch_amalgamated.hpp"

#include "effumap/kernel.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace effumap;

TEST_CASE("phi values") {
    Kernel k{ 1, 1 };
    REQUIRE(phi(k, 0) == 1);
    REQUIRE(phi(k, 1) == 0.5);
    REQUIRE(phi(k, 2) == Catch::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("phi is strictly decreasing") {
    oracle::Gen gen(1);
    for (int t = 0; t < 200; ++t) {
        Kernel k{ gen.real(0.1, 5), gen.real(0.3, 2) };
        const double d1 = gen.real(0, 5), d2 = d1 + gen.real(1e-3, 5);
        REQUIRE(phi(k, d1) > phi(k, d2));
    }
}

TEST_CASE("fit_ab reproduces the least-squares reference values") {
    // Frozen from scipy.optimize.curve_fit on the same 300-point grid.
    auto fit = fit_ab(0.1, 1.0);
    REQUIRE(fit.converged);
    REQUIRE(fit.a == Catch::Approx(1.5769434602697652).epsilon(1e-6));
    REQUIRE(fit.b == Catch::Approx(0.8950608778515733).epsilon(1e-6));
    REQUIRE(fit.rmse < 0.02);

    auto wide = fit_ab(0.5, 1.0);
    REQUIRE(wide.a == Catch::Approx(0.5830300203414425).epsilon(1e-6));
    REQUIRE(wide.b == Catch::Approx(1.3341669924314914).epsilon(1e-6));
}

TEST_CASE("fit_ab with min_dist 0 still has phi(0) = 1") {
    auto fit = fit_ab(0.0, 1.0);
    REQUIRE(fit.a == Catch::Approx(1.93280839734315).epsilon(1e-6));
    REQUIRE(fit.b == Catch::Approx(0.7904949732233831).epsilon(1e-6));
    REQUIRE(phi(Kernel{ fit.a, fit.b }, 0) == 1);
}

TEST_CASE("explicit (a, b) bypasses the fit") {
    Kernel k{ 2.5, 0.7 };
    REQUIRE(k.a == 2.5);
    REQUIRE(k.b == 0.7);
    REQUIRE(phi(k, 1) == Catch::Approx(1 / 3.5));
}

TEST_CASE("gradients vanish at coincidence") {
    Kernel k{ 1.3, 0.8 };
    std::vector<double> p{ 0.5, -0.25 };
    REQUIRE(grad_attr(k, p, p) == std::vector<double>{ 0, 0 });
    REQUIRE(grad_rep(k, p, p) == std::vector<double>{ 0, 0 });
    REQUIRE(grad_rep(k.exact(), p, p) == std::vector<double>{ 0, 0 });
}

TEST_CASE("grad_attr hand value") {
    // 2ab d^(2(b-1)) / (1 + a d^(2b)) * (e_i - e_j) = 2 / 2 * (1, 0).
    Kernel k{ 1, 1 };
    auto g = grad_attr(k, std::vector<double>{ 1, 0 }, std::vector<double>{ 0, 0 });
    REQUIRE(g[0] == 1.0);
    REQUIRE(g[1] == 0.0);
}

TEST_CASE("grad_rep decays in the tail") {
    Kernel k{ 1.5, 0.9 };
    std::vector<double> origin{ 0, 0 };
    double previous = INFINITY;
    for (double d : { 1.0, 10.0, 100.0, 1000.0 }) {
        auto g = grad_rep(k, std::vector<double>{ d, 0 }, origin);
        const double norm = std::hypot(g[0], g[1]);
        REQUIRE(norm < previous);
        previous = norm;
    }
    REQUIRE(previous < 1e-8);
}

TEST_CASE("gradients match finite differences of the pair losses") {
    oracle::Gen gen(2024);
    for (int t = 0; t < 100; ++t) {
        Kernel k{ gen.real(0.2, 4), gen.real(0.4, 1.8) };
        k = k.exact();
        Matrix x(2, 2);
        // Distance in [0.5, 5].
        const double d = gen.real(0.5, 5), angle = gen.real(0, 6.283185307179586);
        x(0, 0) = gen.real(-2, 2);
        x(0, 1) = gen.real(-2, 2);
        x(1, 0) = x(0, 0) + d * std::cos(angle);
        x(1, 1) = x(0, 1) + d * std::sin(angle);

        auto la = [&](const Matrix& y) { return -std::log(oracle::phi(k.a, k.b, oracle::dist(y, 0, 1))); };
        auto lr = [&](const Matrix& y) { return -std::log(1 - oracle::phi(k.a, k.b, oracle::dist(y, 0, 1))); };

        auto ga = grad_attr(k, x.row(0), x.row(1));
        auto gr = grad_rep(k, x.row(0), x.row(1));
        REQUIRE(oracle::max_rel_error(ga, oracle::numeric_gradient(la, x, 0)) < 1e-5);
        REQUIRE(oracle::max_rel_error(gr, oracle::numeric_gradient(lr, x, 0)) < 1e-4);
    }
}

TEST_CASE("gradients are antisymmetric") {
    oracle::Gen gen(7);
    for (int t = 0; t < 100; ++t) {
        Kernel k{ gen.real(0.2, 4), gen.real(0.4, 1.8) };
        auto x = gen.points(2, 3);
        auto a1 = grad_attr(k, x.row(0), x.row(1)), a2 = grad_attr(k, x.row(1), x.row(0));
        auto r1 = grad_rep(k, x.row(0), x.row(1)), r2 = grad_rep(k, x.row(1), x.row(0));
        for (std::size_t c = 0; c < 3; ++c) {
            REQUIRE(a1[c] == -a2[c]);
            REQUIRE(r1[c] == -r2[c]);
        }
    }
}

TEST_CASE("gradient coordinates are clipped") {
    Kernel k{ 1.6, 0.9 };
    // Unclipped value is about -25.7 at distance 0.05.
    auto g = grad_rep(k, std::vector<double>{ 0.05, 0 }, std::vector<double>{ 0, 0 });
    REQUIRE(g[0] == -4.0);
    k.grad_clip = 0.5;
    g = grad_attr(k, std::vector<double>{ -0.3, 0 }, std::vector<double>{ 0, 0 });
    REQUIRE(g[0] == -0.5);
}

TEST_CASE("b = 1 attraction is finite at tiny distances") {
    Kernel k{ 1, 1 };
    auto g = grad_attr(k, std::vector<double>{ 1e-200, 0 }, std::vector<double>{ 0, 0 });
    REQUIRE(std::isfinite(g[0]));
}
