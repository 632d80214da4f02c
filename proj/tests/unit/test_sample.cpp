#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "garkit/rng.hpp"
#include "garkit/sample.hpp"

using namespace garkit;

TEST_CASE("sample keeps insertion order and exposes a sorted view") {
    sample s({3.0, 1.0, 2.0});
    REQUIRE(s.size() == 3);
    REQUIRE(s.values()[0] == 3.0);
    REQUIRE(s.sorted()[0] == 1.0);
    REQUIRE(s.sorted()[2] == 3.0);
}

TEST_CASE("sample rejects bad inputs") {
    REQUIRE_THROWS_AS(sample(std::vector<double>{}), empty_sample_error);
    try {
        sample s({1.0, std::nan(""), 2.0});
        FAIL("expected bad_value_error");
    } catch (const bad_value_error& e) {
        REQUIRE(e.index() == 1);
    }
    try {
        sample s({1.0, 2.0, std::numeric_limits<double>::infinity()});
        FAIL("expected bad_value_error");
    } catch (const bad_value_error& e) {
        REQUIRE(e.index() == 2);
    }
}

TEST_CASE("ecdf is the right-continuous step function") {
    sample s({1.0, 2.0, 2.0, 4.0});
    REQUIRE(s.ecdf(0.5) == 0.0);
    REQUIRE(s.ecdf(1.0) == 0.25);
    REQUIRE(s.ecdf(1.5) == 0.25);
    REQUIRE(s.ecdf(2.0) == 0.75);
    REQUIRE(s.ecdf(3.9999) == 0.75);
    REQUIRE(s.ecdf(4.0) == 1.0);
    REQUIRE(s.ecdf(100.0) == 1.0);
}

TEST_CASE("empirical quantile is the left-continuous generalized inverse") {
    sample s({1.0, 2.0, 2.0, 4.0});
    REQUIRE(s.quantile(0.1) == 1.0);
    REQUIRE(s.quantile(0.25) == 1.0);
    REQUIRE(s.quantile(0.25 + 1e-12) == 2.0);
    REQUIRE(s.quantile(0.5) == 2.0);
    REQUIRE(s.quantile(0.75) == 2.0);
    REQUIRE(s.quantile(0.9) == 4.0);
    REQUIRE(s.quantile(1.0) == 4.0);
    REQUIRE_THROWS_AS(s.quantile(0.0), domain_error);
    REQUIRE_THROWS_AS(s.quantile(1.0 + 1e-12), domain_error);
    REQUIRE_THROWS_AS(s.quantile(-0.5), domain_error);
}

TEST_CASE("quantile blocks are exact at the j/n breakpoints") {
    // p in ((j-1)/n, j/n] must map to the j-th order statistic, including
    // p = j/n given exactly.
    std::vector<double> v(7);
    std::iota(v.begin(), v.end(), 1.0);
    sample s(v);
    for (std::size_t j = 1; j <= 7; ++j) {
        double p = static_cast<double>(j) / 7.0;
        REQUIRE(s.quantile(p) == static_cast<double>(j));
        if (j < 7) {
            REQUIRE(s.quantile(std::nextafter(p, 1.0)) == static_cast<double>(j + 1));
        }
    }
}

TEST_CASE("ecdf and quantile satisfy the generalized-inverse inequalities") {
    counter_rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        std::size_t n = 1 + rng.next_u64() % 40;
        std::vector<double> v(n);
        for (auto& x : v) {
            x = rng.next_uniform() * 10.0 - 5.0;
        }
        sample s(v);
        for (int k = 0; k < 20; ++k) {
            double p = rng.next_uniform();
            double x = s.quantile(p);
            REQUIRE(s.ecdf(x) >= p);                       // F_n(F_n^-1(p)) >= p
            REQUIRE(s.ecdf(std::nextafter(x, -1e18)) < p); // minimality
        }
        for (double x : v) {
            double p = s.ecdf(x);
            REQUIRE(s.quantile(p) <= x); // F_n^-1(F_n(x)) <= x
        }
    }
}

TEST_CASE("ranks are a stable bijection onto 1..n") {
    sample s({2.0, 1.0, 2.0, 0.5});
    // stable sort: first 2.0 ranks before the second
    REQUIRE(s.ranks() == std::vector<std::size_t>{3, 2, 4, 1});

    counter_rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t n = 2 + rng.next_u64() % 30;
        std::vector<double> v(n);
        for (auto& x : v) {
            x = std::floor(rng.next_uniform() * 5.0); // force ties
        }
        sample s2(v);
        auto r = s2.ranks();
        std::vector<std::size_t> sorted_ranks = r;
        std::sort(sorted_ranks.begin(), sorted_ranks.end());
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(sorted_ranks[i] == i + 1);
            REQUIRE(s2.sorted()[r[i] - 1] == v[i]);
        }
    }
}

TEST_CASE("free helpers mirror the member conventions") {
    sample s({1.0, 3.0, 2.0});
    REQUIRE(ecdf_eval(s, 2.0) == s.ecdf(2.0));
    REQUIRE(equantile_eval(s, 0.5) == s.quantile(0.5));
}

TEST_CASE("bivariate sample validation") {
    REQUIRE_THROWS_AS(bivariate_sample({1.0, 2.0}, {1.0}), config_error);
    REQUIRE_THROWS_AS(bivariate_sample({1.0}, {1.0}), degenerate_error);
    REQUIRE_THROWS_AS(bivariate_sample({1.0, std::nan("")}, {1.0, 2.0}), bad_value_error);
    bivariate_sample bs({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0});
    REQUIRE(bs.size() == 3);
    REQUIRE(bs.xs()[2] == 3.0);
    REQUIRE(bs.ys()[0] == 4.0);
}
