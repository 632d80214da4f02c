#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "garkit/errors.hpp"
#include "garkit/influence.hpp"
#include "garkit/model.hpp"
#include "garkit/sample.hpp"

namespace garkit {

// Functional empirical process evaluated at h with a caller-supplied model
// mean: n^{-1/2} * sum_j (h(X_j) - mean_h), summed in insertion order.
// Centering is always at the model mean, never the sample mean.
inline double fep_apply(const sample& s, const influence_function& h, double mean_h) {
    if (!h.valid() || h.is_bivariate()) {
        throw domain_error("fep_apply over a univariate sample needs a univariate h");
    }
    double acc = 0.0;
    for (double x : s.values()) {
        acc += h(x) - mean_h;
    }
    return acc / std::sqrt(static_cast<double>(s.size()));
}

inline influence_function indicator_influence(double threshold) {
    return influence_function::univariate(
        [threshold](double x) { return x <= threshold ? 1.0 : 0.0; }, "indicator");
}

// Indicator process at u in (0,1): the empirical process applied to
// 1{x <= F^{-1}(u)} with model mean u.  Delegates to fep_apply so the two
// agree bit for bit.
inline double indicator_process(const sample& s, const distribution_model& m, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw domain_error("indicator_process requires u in (0,1)");
    }
    return fep_apply(s, indicator_influence(m.quantile(u)), u);
}

// Rank-correction average (1/n) * sum_j (F_n(X_j) - F(X_j)) q(X_j).
template <typename Cdf>
double residual_process(const sample& s, Cdf&& model_cdf, const weight_function& q) {
    double acc = 0.0;
    for (double x : s.values()) {
        acc += (s.ecdf(x) - model_cdf(x)) * q(x);
    }
    return acc / static_cast<double>(s.size());
}

namespace detail {

// Empirical quantile block index for the uniform sample: smallest j in
// [1,n] with s <= j/n (integer search keeps breakpoint comparisons exact).
inline std::size_t quantile_block(double s, std::size_t n) {
    std::size_t lo = 1;
    std::size_t hi = n;
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (s <= static_cast<double>(mid) / static_cast<double>(n)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

} // namespace detail

// Exact sup over [0,1] of |alpha_n(s) + sqrt(n)(V_n(s) - s)| for a sample of
// values in (0,1), where alpha_n is the uniform empirical process and V_n
// the sample quantile function (V_n(0) = smallest observation).  This is the
// combination of empirical and quantile process that vanishes as n grows.
// Between breakpoints the function is linear in s, so the sup is attained at
// one-sided limits over the breakpoint set {0, 1, observations, j/n}.
inline double bahadur_gap(const sample& s) {
    std::size_t n = s.size();
    const std::vector<double>& u = s.sorted();
    if (u.front() <= 0.0 || u.back() >= 1.0) {
        throw domain_error("bahadur_gap requires observations strictly inside (0,1)");
    }
    double rn = std::sqrt(static_cast<double>(n));

    auto ecdf_at = [&](double x) {
        return static_cast<double>(std::upper_bound(u.begin(), u.end(), x) - u.begin()) /
               static_cast<double>(n);
    };
    auto ecdf_left = [&](double x) {
        return static_cast<double>(std::lower_bound(u.begin(), u.end(), x) - u.begin()) /
               static_cast<double>(n);
    };
    auto vn_at = [&](double x) { // left-continuous; V_n(0) = u[0]
        if (x <= 0.0) return u[0];
        return u[detail::quantile_block(x, n) - 1];
    };
    auto vn_right = [&](double x) { // limit from the right
        if (x >= 1.0) return u[n - 1];
        if (x <= 0.0) return u[0];
        std::size_t j = detail::quantile_block(x, n);
        if (x == static_cast<double>(j) / static_cast<double>(n) && j < n) {
            ++j;
        }
        return u[j - 1];
    };

    std::vector<double> breakpoints;
    breakpoints.reserve(2 * n + 2);
    breakpoints.push_back(0.0);
    breakpoints.push_back(1.0);
    for (double v : u) {
        breakpoints.push_back(v);
    }
    for (std::size_t j = 1; j < n; ++j) {
        breakpoints.push_back(static_cast<double>(j) / static_cast<double>(n));
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    double sup = 0.0;
    auto consider = [&](double fn_val, double vn_val, double at) {
        double d = rn * (fn_val + vn_val - 2.0 * at);
        sup = std::max(sup, std::abs(d));
    };
    for (double b : breakpoints) {
        consider(ecdf_left(b), vn_at(b), b);  // limit from the left
        consider(ecdf_at(b), vn_at(b), b);    // value at b
        consider(ecdf_at(b), vn_right(b), b); // limit from the right
    }
    return sup;
}

} // namespace garkit
