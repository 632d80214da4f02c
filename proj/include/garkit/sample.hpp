#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "garkit/errors.hpp"

namespace garkit {

// Immutable univariate sample.  Keeps the insertion order (the empirical
// process is a sum over observations as given) alongside a sorted copy and
// the rank of each observation.  Ties get ranks in stable insertion order,
// so ranks are always a bijection onto 1..n.
class sample {
public:
    static sample from(std::vector<double> values) { return sample(std::move(values)); }

    explicit sample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) {
            throw empty_sample_error();
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw bad_value_error(i, "non-finite observation");
            }
        }
        std::vector<std::size_t> order(values_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return values_[a] < values_[b];
        });
        sorted_.resize(values_.size());
        ranks_.resize(values_.size());
        for (std::size_t r = 0; r < order.size(); ++r) {
            sorted_[r] = values_[order[r]];
            ranks_[order[r]] = r + 1;
        }
    }

    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& sorted() const noexcept { return sorted_; }

    // 1-based rank of the observation at insertion index i.
    std::size_t rank(std::size_t i) const { return ranks_.at(i); }
    const std::vector<std::size_t>& ranks() const noexcept { return ranks_; }

    // Empirical CDF: right-continuous, F_n(x) = #{X_j <= x} / n.
    double ecdf(double x) const noexcept {
        auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(size());
    }

    // Empirical quantile: left-continuous step function equal to the j-th
    // order statistic on ((j-1)/n, j/n], with the first order statistic for
    // p <= 1/n.  The block index is found by an integer search against j/n
    // so that representable p exactly at a breakpoint lands in block j.
    double quantile(double p) const {
        if (!(p > 0.0 && p <= 1.0)) {
            throw domain_error("empirical quantile requires p in (0,1]");
        }
        std::size_t n = size();
        std::size_t lo = 1;
        std::size_t hi = n;
        while (lo < hi) {
            std::size_t mid = lo + (hi - lo) / 2;
            if (p <= static_cast<double>(mid) / static_cast<double>(n)) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        return sorted_[lo - 1];
    }

private:
    std::vector<double> values_;
    std::vector<double> sorted_;
    std::vector<std::size_t> ranks_;
};

inline sample make_sample(std::vector<double> values) { return sample(std::move(values)); }

inline double ecdf_eval(const sample& s, double x) { return s.ecdf(x); }

inline double equantile_eval(const sample& s, double p) { return s.quantile(p); }

// Paired observations for the correlation index.
class bivariate_sample {
public:
    bivariate_sample(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        if (xs_.size() != ys_.size()) {
            throw config_error("paired sample coordinates differ in length");
        }
        if (xs_.size() < 2) {
            throw degenerate_error("paired sample needs at least 2 observations");
        }
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
                throw bad_value_error(i, "non-finite observation");
            }
        }
    }

    std::size_t size() const noexcept { return xs_.size(); }
    const std::vector<double>& xs() const noexcept { return xs_; }
    const std::vector<double>& ys() const noexcept { return ys_; }

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
};

} // namespace garkit
