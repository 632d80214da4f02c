#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "garkit/errors.hpp"

namespace garkit {

// Evaluable map h fed to the empirical process.  Univariate (real -> real)
// or bivariate (pair -> real); the arity is fixed at construction and the
// mismatching call operator throws.  Copies are cheap (shared state inside
// std::function), which the representation algebra leans on heavily.
class influence_function {
public:
    influence_function() = default;

    static influence_function univariate(std::function<double(double)> f,
                                         std::string tag = {}) {
        influence_function h;
        h.uni_ = std::move(f);
        h.tag_ = std::move(tag);
        return h;
    }

    static influence_function bivariate(std::function<double(double, double)> f,
                                        std::string tag = {}) {
        influence_function h;
        h.bi_ = std::move(f);
        h.tag_ = std::move(tag);
        return h;
    }

    static influence_function zero() {
        return univariate([](double) { return 0.0; }, "0");
    }

    bool valid() const noexcept { return static_cast<bool>(uni_) || static_cast<bool>(bi_); }
    bool is_bivariate() const noexcept { return static_cast<bool>(bi_); }
    const std::string& tag() const noexcept { return tag_; }

    double operator()(double x) const {
        if (!uni_) {
            throw domain_error("influence function is not univariate");
        }
        return uni_(x);
    }

    double operator()(double x, double y) const {
        if (!bi_) {
            throw domain_error("influence function is not bivariate");
        }
        return bi_(x, y);
    }

private:
    std::function<double(double)> uni_;
    std::function<double(double, double)> bi_;
    std::string tag_;
};

namespace detail {

inline std::string combine_tags(const std::string& a, const char* op, const std::string& b) {
    if (a.empty() && b.empty()) {
        return {};
    }
    return "(" + (a.empty() ? "?" : a) + op + (b.empty() ? "?" : b) + ")";
}

} // namespace detail

// Pointwise a*h1 + b*h2.  Both operands must share arity.
inline influence_function axpby(double a, const influence_function& h1, double b,
                                const influence_function& h2) {
    if (!h1.valid() || !h2.valid()) {
        throw config_error("combining an unset influence function");
    }
    if (h1.is_bivariate() != h2.is_bivariate()) {
        throw config_error("influence functions differ in arity");
    }
    std::string tag = detail::combine_tags(h1.tag(), "+", h2.tag());
    if (h1.is_bivariate()) {
        return influence_function::bivariate(
            [a, h1, b, h2](double x, double y) { return a * h1(x, y) + b * h2(x, y); },
            std::move(tag));
    }
    return influence_function::univariate(
        [a, h1, b, h2](double x) { return a * h1(x) + b * h2(x); }, std::move(tag));
}

inline influence_function scale(double a, const influence_function& h) {
    if (!h.valid()) {
        throw config_error("scaling an unset influence function");
    }
    if (h.is_bivariate()) {
        return influence_function::bivariate(
            [a, h](double x, double y) { return a * h(x, y); }, h.tag());
    }
    return influence_function::univariate([a, h](double x) { return a * h(x); }, h.tag());
}

// Weight q(x) attached to the rank-correction part of an L-statistic.
struct weight_function {
    std::function<double(double)> q;
    std::string description;

    double operator()(double x) const { return q(x); }
};

// Weight on the indicator process inside a representation's residual
// integral.  ell(s) is the actual multiplier of the indicator process at s;
// when the residual came from a rank-statistic weight q, ell(s) =
// origin_q(quantile(s)) and origin_q is retained so diagnostics can evaluate
// q at raw observations.
struct residual_weight {
    std::function<double(double)> ell;
    std::optional<weight_function> origin_q;
    std::string tag;

    double operator()(double s) const { return ell(s); }
};

} // namespace garkit
