#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "garkit/errors.hpp"
#include "garkit/influence.hpp"
#include "garkit/model.hpp"
#include "garkit/processes.hpp"
#include "garkit/quadrature.hpp"

namespace garkit {

// First-order asymptotic representation of an estimator J_n:
//
//   J_n = constant + n^{-1/2} * ( G_n(fep_term) + integral over (0,1) of
//         G_n(indicator at s) * residual.ell(s) ds ) + lower order terms
//
// The vanishing remainder is dropped; the algebra below manipulates only the
// constant and the two first-order pieces.  A representation without a
// residual describes a smooth moment statistic.
struct gar_rep {
    double constant = 0.0;
    influence_function fep_term = influence_function::zero();
    std::optional<residual_weight> residual;
    std::string tag;
};

namespace detail {

inline std::optional<residual_weight> combine_residuals(
    double ca, const std::optional<residual_weight>& ra, double cb,
    const std::optional<residual_weight>& rb) {
    if (!ra && !rb) {
        return std::nullopt;
    }
    residual_weight out;
    if (ra && rb) {
        auto ea = ra->ell;
        auto eb = rb->ell;
        out.ell = [ca, ea, cb, eb](double s) { return ca * ea(s) + cb * eb(s); };
        if (ra->origin_q && rb->origin_q) {
            auto qa = ra->origin_q->q;
            auto qb = rb->origin_q->q;
            out.origin_q = weight_function{
                [ca, qa, cb, qb](double x) { return ca * qa(x) + cb * qb(x); },
                "combined"};
        }
        out.tag = combine_tags(ra->tag, "+", rb->tag);
        return out;
    }
    const residual_weight& r = ra ? *ra : *rb;
    double c = ra ? ca : cb;
    auto e = r.ell;
    out.ell = [c, e](double s) { return c * e(s); };
    if (r.origin_q) {
        auto q = r.origin_q->q;
        out.origin_q = weight_function{[c, q](double x) { return c * q(x); }, "scaled"};
    }
    out.tag = r.tag;
    return out;
}

} // namespace detail

// (A + a G_n(L)) + (B + b G_n(H)) = (A+B) + G_n(L + H), residuals add.
inline gar_rep gar_add(const gar_rep& a, const gar_rep& b) {
    gar_rep out;
    out.constant = a.constant + b.constant;
    out.fep_term = axpby(1.0, a.fep_term, 1.0, b.fep_term);
    out.residual = detail::combine_residuals(1.0, a.residual, 1.0, b.residual);
    out.tag = detail::combine_tags(a.tag, "+", b.tag);
    return out;
}

// Product rule: constant AB, influence B*L + A*H, same weights on residuals.
inline gar_rep gar_mul(const gar_rep& a, const gar_rep& b) {
    gar_rep out;
    out.constant = a.constant * b.constant;
    out.fep_term = axpby(b.constant, a.fep_term, a.constant, b.fep_term);
    out.residual = detail::combine_residuals(b.constant, a.residual, a.constant, b.residual);
    out.tag = detail::combine_tags(a.tag, "*", b.tag);
    return out;
}

// Quotient rule: requires a nonzero denominator constant.
inline gar_rep gar_div(const gar_rep& a, const gar_rep& b) {
    if (b.constant == 0.0 || !std::isfinite(b.constant)) {
        throw divide_by_zero_error();
    }
    gar_rep out;
    double inv = 1.0 / b.constant;
    out.constant = a.constant * inv;
    out.fep_term = axpby(inv, a.fep_term, -a.constant * inv * inv, b.fep_term);
    out.residual =
        detail::combine_residuals(inv, a.residual, -a.constant * inv * inv, b.residual);
    out.tag = detail::combine_tags(a.tag, "/", b.tag);
    return out;
}

inline gar_rep operator+(const gar_rep& a, const gar_rep& b) { return gar_add(a, b); }
inline gar_rep operator*(const gar_rep& a, const gar_rep& b) { return gar_mul(a, b); }
inline gar_rep operator/(const gar_rep& a, const gar_rep& b) { return gar_div(a, b); }

// Smooth real map with its derivative, for the delta-method step.
struct smooth_map {
    std::function<double(double)> g;
    std::function<double(double)> dg;
    std::string name;
};

// Delta method: g applied to a representation scales both first-order terms
// by g'(constant).
inline gar_rep gar_delta(const gar_rep& a, const smooth_map& g) {
    if (!g.g || !g.dg) {
        throw config_error("smooth map for the delta method needs g and its derivative");
    }
    double slope = g.dg(a.constant);
    if (!std::isfinite(slope)) {
        throw eval_error("derivative of '" + g.name + "' is not finite at " +
                         std::to_string(a.constant));
    }
    gar_rep out;
    out.constant = g.g(a.constant);
    if (!std::isfinite(out.constant)) {
        throw eval_error("map '" + g.name + "' is not finite at " +
                         std::to_string(a.constant));
    }
    out.fep_term = scale(slope, a.fep_term);
    out.residual = detail::combine_residuals(slope, a.residual, 0.0, std::nullopt);
    out.tag = g.name.empty() ? a.tag : g.name + "(" + a.tag + ")";
    return out;
}

// Realizes the representation on a concrete sample: the model supplies the
// centering mean of the influence term and the quantile map behind the
// indicator process.  Residual integral is the quadrature of
// indicator_process(s) * ell(s) over the rule's nodes.
inline double gar_evaluate(const gar_rep& rep, const sample& s, const distribution_model& m,
                           const quadrature_rule& quad = default_quadrature()) {
    if (quad.size() < 2) {
        throw config_error("gar_evaluate needs a quadrature rule with at least 2 nodes");
    }
    if (!rep.fep_term.valid() || rep.fep_term.is_bivariate()) {
        throw config_error("gar_evaluate supports univariate representations only");
    }
    double mean_h = expect_quantile(m, quad, [&](double x) { return rep.fep_term(x); });
    double first_order = fep_apply(s, rep.fep_term, mean_h);
    if (rep.residual) {
        const auto& ell = rep.residual->ell;
        first_order += quad.integrate(
            [&](double u) { return indicator_process(s, m, u) * ell(u); });
    }
    return rep.constant + first_order / std::sqrt(static_cast<double>(s.size()));
}

} // namespace garkit
