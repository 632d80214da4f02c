#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "garkit/gar.hpp"
#include "garkit/indexes.hpp"
#include "garkit/model.hpp"
#include "garkit/montecarlo.hpp"

using namespace garkit;

namespace {

gar_rep moment_rep(double constant, double (*h)(double)) {
    gar_rep rep;
    rep.constant = constant;
    rep.fep_term = influence_function::univariate(h);
    return rep;
}

gar_rep with_residual(gar_rep rep, double (*ell)(double)) {
    rep.residual = residual_weight{ell, std::nullopt, "ell"};
    return rep;
}

} // namespace

TEST_CASE("sum rule adds constants and influence functions") {
    auto a = moment_rep(2.0, [](double x) { return x; });
    auto b = moment_rep(3.0, [](double x) { return x * x; });
    auto sum = a + b;
    REQUIRE(sum.constant == 5.0);
    for (double x : {-1.0, 0.0, 0.5, 2.0}) {
        REQUIRE(sum.fep_term(x) == x + x * x);
    }
    REQUIRE_FALSE(sum.residual.has_value());
}

TEST_CASE("product rule weights each influence by the other constant") {
    auto a = moment_rep(2.0, [](double x) { return x; });
    auto b = moment_rep(3.0, [](double x) { return x * x; });
    auto prod = a * b;
    REQUIRE(prod.constant == 6.0);
    for (double x : {-1.0, 0.25, 1.5}) {
        REQUIRE(prod.fep_term(x) == Catch::Approx(3.0 * x + 2.0 * x * x).epsilon(1e-15));
    }
}

TEST_CASE("quotient rule") {
    auto a = moment_rep(2.0, [](double x) { return x; });
    auto b = moment_rep(4.0, [](double x) { return x * x; });
    auto ratio = a / b;
    REQUIRE(ratio.constant == 0.5);
    for (double x : {-1.0, 0.25, 1.5}) {
        REQUIRE(ratio.fep_term(x) ==
                Catch::Approx(x / 4.0 - 2.0 / 16.0 * x * x).epsilon(1e-15));
    }
    auto zero = moment_rep(0.0, [](double) { return 0.0; });
    REQUIRE_THROWS_AS(a / zero, divide_by_zero_error);
}

TEST_CASE("residual weights combine with the same coefficients") {
    auto a = with_residual(moment_rep(2.0, [](double x) { return x; }),
                           [](double s) { return s; });
    auto b = with_residual(moment_rep(3.0, [](double x) { return x * x; }),
                           [](double s) { return 1.0 - s; });

    auto sum = a + b;
    REQUIRE(sum.residual.has_value());
    for (double s : {0.1, 0.5, 0.9}) {
        REQUIRE(sum.residual->ell(s) == Catch::Approx(s + (1.0 - s)).epsilon(1e-15));
    }

    auto prod = a * b;
    for (double s : {0.1, 0.5, 0.9}) {
        REQUIRE(prod.residual->ell(s) ==
                Catch::Approx(3.0 * s + 2.0 * (1.0 - s)).epsilon(1e-15));
    }

    auto ratio = a / b;
    for (double s : {0.1, 0.5, 0.9}) {
        REQUIRE(ratio.residual->ell(s) ==
                Catch::Approx(s / 3.0 - 2.0 / 9.0 * (1.0 - s)).epsilon(1e-15));
    }

    // one-sided residual: the residual-free side contributes nothing
    auto c = moment_rep(5.0, [](double x) { return x; });
    auto mixed = a * c;
    REQUIRE(mixed.residual.has_value());
    for (double s : {0.2, 0.8}) {
        REQUIRE(mixed.residual->ell(s) == Catch::Approx(5.0 * s).epsilon(1e-15));
    }
    REQUIRE_FALSE((c * c).residual.has_value());
}

TEST_CASE("delta method scales both first-order terms by the slope") {
    auto a = with_residual(moment_rep(4.0, [](double x) { return x; }),
                           [](double s) { return 2.0 * s; });
    smooth_map root{[](double v) { return std::sqrt(v); },
                    [](double v) { return 0.5 / std::sqrt(v); },
                    "sqrt"};
    auto mapped = gar_delta(a, root);
    REQUIRE(mapped.constant == 2.0);
    for (double x : {0.3, 1.7}) {
        REQUIRE(mapped.fep_term(x) == Catch::Approx(0.25 * x).epsilon(1e-15));
    }
    for (double s : {0.25, 0.75}) {
        REQUIRE(mapped.residual->ell(s) == Catch::Approx(0.5 * s).epsilon(1e-15));
    }
}

TEST_CASE("delta method composes like the chain rule") {
    auto a = moment_rep(3.0, [](double x) { return std::sin(x); });
    smooth_map square{[](double v) { return v * v; }, [](double v) { return 2.0 * v; },
                      "square"};
    smooth_map logm{[](double v) { return std::log(v); }, [](double v) { return 1.0 / v; },
                    "log"};
    auto two_step = gar_delta(gar_delta(a, square), logm);
    smooth_map fused{[](double v) { return std::log(v * v); },
                     [](double v) { return 2.0 / v; },
                     "log_square"};
    auto one_step = gar_delta(a, fused);
    REQUIRE(two_step.constant == Catch::Approx(one_step.constant).margin(1e-12));
    for (double x : {-2.0, -0.3, 0.4, 1.9}) {
        REQUIRE(two_step.fep_term(x) == Catch::Approx(one_step.fep_term(x)).margin(1e-12));
    }
}

TEST_CASE("delta method rejects a non-finite slope or image") {
    auto zero = moment_rep(0.0, [](double x) { return x; });
    smooth_map logm{[](double v) { return std::log(v); }, [](double v) { return 1.0 / v; },
                    "log"};
    REQUIRE_THROWS_AS(gar_delta(zero, logm), eval_error);
    smooth_map incomplete{[](double v) { return v; }, nullptr, "broken"};
    REQUIRE_THROWS_AS(gar_delta(zero, incomplete), config_error);
}

TEST_CASE("evaluating the mean representation reproduces the sample mean") {
    auto m = uniform_model(0.0, 1.0);
    auto rep = smooth_moment_index(influence_function::univariate([](double x) { return x; }))
                   .gar(m);
    sample s = sample_from(m, 200, 99);
    double mean = 0.0;
    for (double x : s.values()) {
        mean += x;
    }
    mean /= static_cast<double>(s.size());
    REQUIRE(gar_evaluate(rep, s, m) == Catch::Approx(mean).margin(1e-12));
}

TEST_CASE("a pure-constant representation evaluates to its constant") {
    auto m = uniform_model(0.0, 1.0);
    gar_rep rep;
    rep.constant = 0.42;
    sample s = sample_from(m, 50, 1);
    REQUIRE(gar_evaluate(rep, s, m) == Catch::Approx(0.42).margin(1e-15));
}

TEST_CASE("gar_evaluate validates its inputs") {
    auto m = uniform_model(0.0, 1.0);
    sample s = sample_from(m, 10, 3);
    gar_rep biv;
    biv.fep_term = influence_function::bivariate([](double x, double y) { return x + y; });
    REQUIRE_THROWS_AS(gar_evaluate(biv, s, m), config_error);
}
