#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "garkit/indexes.hpp"
#include "garkit/model.hpp"
#include "garkit/variance.hpp"

#include "support/oracles.hpp"

using namespace garkit;

TEST_CASE("gamma_cov of the identity under uniform(0,1) is 1/12") {
    auto m = uniform_model(0.0, 1.0);
    auto id = influence_function::univariate([](double x) { return x; });
    REQUIRE(gamma_cov(id, id, m, default_quadrature()) ==
            Catch::Approx(1.0 / 12.0).margin(1e-12));
}

TEST_CASE("gamma_cov is symmetric and matches a Riemann oracle") {
    auto m = exponential_model(1.0);
    auto h1 = influence_function::univariate([](double x) { return std::exp(-x); });
    auto h2 = influence_function::univariate([](double x) { return x > 1.0 ? 1.0 : 0.0; });
    auto quad = default_quadrature();
    double c12 = gamma_cov(h1, h2, m, quad);
    double c21 = gamma_cov(h2, h1, m, quad);
    REQUIRE(c12 == Catch::Approx(c21).margin(1e-13));

    // An indicator influence is a step in the quantile domain, so the oracle
    // comparison uses a smooth pair instead: cov(e^-X, X) under exp(1).
    auto h3 = influence_function::univariate([](double x) { return x; });
    double c13 = gamma_cov(h1, h3, m, quad);
    double e13 = oracles::riemann_1d([](double x) { return x * std::exp(-2.0 * x); }, 0.0, 40.0);
    double e1 = oracles::riemann_1d([](double x) { return std::exp(-2.0 * x); }, 0.0, 40.0);
    REQUIRE(c13 == Catch::Approx(e13 - e1 * 1.0).margin(1e-4));
    REQUIRE(c13 == Catch::Approx(-0.25).margin(1e-4));
}

TEST_CASE("indicator covariance is min(s,t) - st") {
    REQUIRE(indicator_cov(0.25, 0.75) == Catch::Approx(0.25 - 0.1875).epsilon(1e-15));
    REQUIRE(indicator_cov(0.5, 0.5) == Catch::Approx(0.25).epsilon(1e-15));
    REQUIRE(indicator_cov(0.9, 0.1) == Catch::Approx(0.1 - 0.09).epsilon(1e-14));
    REQUIRE_THROWS_AS(indicator_cov(0.0, 0.5), domain_error);
    REQUIRE_THROWS_AS(indicator_cov(0.5, 1.0), domain_error);
}

TEST_CASE("gamma2 for linear weights") {
    auto quad = default_quadrature();
    // int int (min - st) * 16st ds dt = 16 * (1/45)
    REQUIRE(gamma2([](double s) { return -4.0 * s; }, quad) ==
            Catch::Approx(16.0 / 45.0).margin(1e-8));
    REQUIRE(gamma2([](double s) { return 4.0 * s; }, quad) ==
            Catch::Approx(16.0 / 45.0).margin(1e-8));
    REQUIRE(gamma2([](double s) { return 2.0 * s; }, quad) ==
            Catch::Approx(4.0 / 45.0).margin(1e-8));
}

TEST_CASE("gamma2 for a constant weight is c^2/12") {
    auto quad = default_quadrature();
    for (double c : {1.0, 3.0, -2.5}) {
        REQUIRE(gamma2([c](double) { return c; }, quad) ==
                Catch::Approx(c * c / 12.0).margin(1e-10));
    }
}

TEST_CASE("gamma2 matches the two-dimensional Riemann oracle") {
    auto quad = default_quadrature();
    auto ell = [](double s) { return std::exp(s) - 2.0 * s; };
    double want = oracles::riemann_2d(
        [&](double s, double t) { return (std::min(s, t) - s * t) * ell(s) * ell(t); });
    REQUIRE(gamma2(ell, quad) == Catch::Approx(want).margin(1e-6));
}

TEST_CASE("gamma3 for the identity influence and unit weight is -1/12") {
    auto m = uniform_model(0.0, 1.0);
    auto id = influence_function::univariate([](double x) { return x; });
    REQUIRE(gamma3(id, [](double) { return 1.0; }, m, default_quadrature()) ==
            Catch::Approx(-1.0 / 12.0).margin(1e-10));
}

TEST_CASE("gamma3 matches its defining double integral") {
    auto m = uniform_model(0.0, 1.0);
    auto h = influence_function::univariate([](double x) { return x * x; });
    auto ell = [](double s) { return 3.0 * s - 1.0; };
    // cov(h(X), 1{X <= s}) = int_0^s x^2 dx - s/3 under uniform(0,1)
    double want = oracles::riemann_1d(
        [&](double s) { return (s * s * s / 3.0 - s / 3.0) * ell(s); }, 0.0, 1.0);
    REQUIRE(gamma3(h, ell, m, default_quadrature()) == Catch::Approx(want).margin(1e-9));
}

TEST_CASE("gini variance decomposition under uniform(0,1)") {
    auto m = uniform_model(0.0, 1.0);
    auto quad = default_quadrature();
    auto report = total_variance(gini_gar(m, quad), m, quad);
    REQUIRE(report.gamma1 == Catch::Approx(32.0 / 135.0).margin(1e-9));
    REQUIRE(report.gamma2 == Catch::Approx(16.0 / 45.0).margin(1e-9));
    REQUIRE(report.gamma3 == Catch::Approx(-4.0 / 15.0).margin(1e-9));
    REQUIRE(report.total == Catch::Approx(8.0 / 135.0).margin(1e-9));
    REQUIRE(report.flags.h_square);
    REQUIRE(report.flags.q_square);
    REQUIRE(report.flags.h_square_q_square);
}

TEST_CASE("gini variance under exponential(1) is 1/12") {
    auto m = exponential_model(1.0);
    auto quad = default_quadrature();
    auto report = total_variance(gini_gar(m, quad), m, quad);
    REQUIRE(report.total == Catch::Approx(1.0 / 12.0).margin(2e-4));
}

TEST_CASE("total is exactly gamma1 + gamma2 + 2 gamma3") {
    auto quad = default_quadrature();
    auto m = exponential_model(1.5);
    auto report = total_variance(gini_gar(m, quad), m, quad);
    REQUIRE(report.total == report.gamma1 + report.gamma2 + 2.0 * report.gamma3);

    auto mu = uniform_model(0.0, 2.0);
    auto reportu = total_variance(gini_gar(mu, quad), mu, quad);
    REQUIRE(reportu.total == reportu.gamma1 + reportu.gamma2 + 2.0 * reportu.gamma3);

    auto ml = lognormal_model(0.0, 0.5);
    auto reportl = total_variance(gini_gar(ml, quad), ml, quad);
    REQUIRE(reportl.total == reportl.gamma1 + reportl.gamma2 + 2.0 * reportl.gamma3);
}

TEST_CASE("variance of a residual-free representation is gamma1 alone") {
    auto m = uniform_model(0.0, 1.0);
    auto rep = smooth_moment_index(influence_function::univariate([](double x) { return x; }))
                   .gar(m);
    auto report = total_variance(rep, m, default_quadrature());
    REQUIRE(report.gamma1 == Catch::Approx(1.0 / 12.0).margin(1e-12));
    REQUIRE(report.gamma2 == 0.0);
    REQUIRE(report.gamma3 == 0.0);
    REQUIRE(report.total == report.gamma1);
    REQUIRE(report.flags.q_square); // vacuously finite without a residual
}

TEST_CASE("moment flags catch heavy tails") {
    auto quad = default_quadrature();
    auto heavy = pareto_model(1.0, 1.5); // E[X^2] diverges
    auto id_rep =
        smooth_moment_index(influence_function::univariate([](double x) { return x; }))
            .gar(heavy, quad);
    auto report = total_variance(id_rep, heavy, quad);
    REQUIRE_FALSE(report.flags.h_square);

    auto light = pareto_model(1.0, 9.0);
    auto report2 = total_variance(
        smooth_moment_index(influence_function::univariate([](double x) { return x; }))
            .gar(light, quad),
        light, quad);
    REQUIRE(report2.flags.h_square);
}

TEST_CASE("bivariate influence functions are rejected by the variance engine") {
    auto m = uniform_model(0.0, 1.0);
    auto biv = influence_function::bivariate([](double x, double y) { return x * y; });
    REQUIRE_THROWS_AS(gamma_cov(biv, biv, m, default_quadrature()), config_error);
}
