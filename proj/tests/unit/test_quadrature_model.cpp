#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "garkit/model.hpp"
#include "garkit/quadrature.hpp"
#include "garkit/rng.hpp"

#include "support/oracles.hpp"

using namespace garkit;

TEST_CASE("gauss legendre nodes are symmetric in (0,1) and weights sum to 1") {
    for (std::size_t n : {2, 5, 16, 64}) {
        auto rule = gauss_legendre(n);
        REQUIRE(rule.size() == n);
        double wsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(rule.nodes[i] > 0.0);
            REQUIRE(rule.nodes[i] < 1.0);
            REQUIRE(rule.nodes[i] + rule.nodes[n - 1 - i] == Catch::Approx(1.0).margin(1e-14));
            wsum += rule.weights[i];
        }
        REQUIRE(wsum == Catch::Approx(1.0).margin(1e-14));
    }
}

TEST_CASE("gauss legendre integrates polynomials up to degree 2n-1 exactly") {
    auto rule = gauss_legendre(8);
    for (int k = 0; k <= 15; ++k) {
        double got = rule.integrate([k](double u) { return std::pow(u, k); });
        REQUIRE(got == Catch::Approx(1.0 / (k + 1)).margin(1e-14));
    }
}

TEST_CASE("quadrature matches a Riemann oracle on smooth integrands") {
    auto rule = gauss_legendre(32);
    double got = rule.integrate([](double u) { return std::exp(u) * std::cos(3.0 * u); });
    double want = oracles::riemann_1d(
        [](double u) { return std::exp(u) * std::cos(3.0 * u); }, 0.0, 1.0);
    REQUIRE(got == Catch::Approx(want).margin(1e-9));
    REQUIRE(got == Catch::Approx((std::exp(1.0) * (std::cos(3.0) + 3.0 * std::sin(3.0)) - 1.0) /
                                 10.0)
                       .margin(1e-14));
}

TEST_CASE("integrate_on maps to arbitrary intervals") {
    auto rule = gauss_legendre(16);
    REQUIRE(rule.integrate_on(2.0, 5.0, [](double x) { return x * x; }) ==
            Catch::Approx(39.0).margin(1e-12));
    REQUIRE(rule.integrate_on(3.0, 3.0, [](double) { return 1.0; }) == 0.0);
    REQUIRE(rule.integrate_on(5.0, 2.0, [](double) { return 1.0; }) == 0.0);
}

TEST_CASE("degenerate quadrature sizes are rejected") {
    REQUIRE_THROWS_AS(gauss_legendre(0), config_error);
    REQUIRE_THROWS_AS(gauss_legendre(1), config_error);
    REQUIRE(default_quadrature().size() == 256);
}

TEST_CASE("uniform model") {
    auto m = uniform_model(2.0, 5.0);
    REQUIRE(m.cdf(3.5) == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(m.quantile(0.25) == Catch::Approx(2.75).margin(1e-15));
    REQUIRE(m.cdf(1.0) == 0.0);
    REQUIRE(m.cdf(6.0) == 1.0);
    REQUIRE_NOTHROW(validate_model(m));
    REQUIRE_THROWS_AS(uniform_model(1.0, 1.0), model_error);
}

TEST_CASE("exponential model") {
    auto m = exponential_model(2.0);
    REQUIRE(m.quantile(0.5) == Catch::Approx(std::log(2.0) / 2.0).epsilon(1e-14));
    for (double s : {0.1, 0.5, 0.9, 0.999}) {
        REQUIRE(m.cdf(m.quantile(s)) == Catch::Approx(s).margin(1e-12));
    }
    REQUIRE_NOTHROW(validate_model(m));
    REQUIRE_THROWS_AS(exponential_model(0.0), model_error);
    REQUIRE_THROWS_AS(exponential_model(-1.0), model_error);
}

TEST_CASE("pareto model") {
    auto m = pareto_model(1.0, 1.5);
    REQUIRE(m.cdf(2.0) == Catch::Approx(1.0 - std::pow(2.0, -1.5)).epsilon(1e-14));
    REQUIRE(m.cdf(0.5) == 0.0);
    for (double s : {0.2, 0.7, 0.99}) {
        REQUIRE(m.cdf(m.quantile(s)) == Catch::Approx(s).margin(1e-12));
    }
    REQUIRE_NOTHROW(validate_model(m));
    REQUIRE_THROWS_AS(pareto_model(0.0, 1.5), model_error);
    REQUIRE_THROWS_AS(pareto_model(1.0, 0.0), model_error);
}

TEST_CASE("lognormal model") {
    auto m = lognormal_model(0.0, 1.0);
    REQUIRE(m.quantile(0.5) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(m.cdf(1.0) == Catch::Approx(0.5).margin(1e-12));
    for (double s : {0.05, 0.5, 0.95}) {
        REQUIRE(m.cdf(m.quantile(s)) == Catch::Approx(s).margin(1e-10));
    }
    REQUIRE_NOTHROW(validate_model(m));
    REQUIRE_THROWS_AS(lognormal_model(0.0, 0.0), model_error);
}

TEST_CASE("expect_quantile reproduces known means") {
    auto quad = default_quadrature();
    auto id = [](double x) { return x; };
    REQUIRE(expect_quantile(uniform_model(0.0, 1.0), quad, id) ==
            Catch::Approx(0.5).margin(1e-12));
    REQUIRE(expect_quantile(uniform_model(2.0, 5.0), quad, id) ==
            Catch::Approx(3.5).margin(1e-12));
    // the exponential quantile has a log singularity at 1; the rule's floor
    // there is ~1e-5
    REQUIRE(expect_quantile(exponential_model(1.0), quad, id) ==
            Catch::Approx(1.0).margin(1e-4));
    REQUIRE(expect_quantile(exponential_model(1.0), quad,
                            [](double x) { return x * x; }) ==
            Catch::Approx(2.0).margin(2e-3));
    REQUIRE(expect_quantile(pareto_model(1.0, 3.0), quad, id) ==
            Catch::Approx(1.5).margin(1e-3));
}

TEST_CASE("model spec grammar") {
    REQUIRE(parse_model_spec("uniform:0,1").name == "uniform");
    REQUIRE(parse_model_spec("exp:2").quantile(0.5) ==
            Catch::Approx(std::log(2.0) / 2.0).epsilon(1e-14));
    REQUIRE(parse_model_spec("exponential:2").quantile(0.5) ==
            Catch::Approx(std::log(2.0) / 2.0).epsilon(1e-14));
    REQUIRE(parse_model_spec("pareto:1,1.5").cdf(0.5) == 0.0);
    REQUIRE(parse_model_spec("lognormal:0,1").quantile(0.5) ==
            Catch::Approx(1.0).margin(1e-12));

    REQUIRE_THROWS_AS(parse_model_spec("cauchy:0,1"), config_error);
    REQUIRE_THROWS_AS(parse_model_spec("uniform:1"), config_error);
    REQUIRE_THROWS_AS(parse_model_spec("uniform:0,1,2"), config_error);
    REQUIRE_THROWS_AS(parse_model_spec("uniform:a,b"), config_error);
    REQUIRE_THROWS_AS(parse_model_spec("exp:"), config_error);
    REQUIRE_THROWS_AS(parse_model_spec("uniform:1,0"), model_error);
}

TEST_CASE("model draw is the quantile of the next uniform") {
    auto m = exponential_model(1.0);
    counter_rng a(5);
    counter_rng b(5);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(m.draw(a) == m.quantile(b.next_uniform()));
    }
}
