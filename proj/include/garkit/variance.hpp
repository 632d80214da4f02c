#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "garkit/errors.hpp"
#include "garkit/gar.hpp"
#include "garkit/influence.hpp"
#include "garkit/model.hpp"
#include "garkit/quadrature.hpp"

namespace garkit {

// Limit covariance of the empirical process at two influence functions:
// integral of the centered product, computed in the quantile domain so the
// model density is never needed.
inline double gamma_cov(const influence_function& h1, const influence_function& h2,
                        const distribution_model& m,
                        const quadrature_rule& quad = default_quadrature()) {
    if (h1.is_bivariate() || h2.is_bivariate()) {
        throw config_error("gamma_cov integrates univariate influence functions only");
    }
    double m1 = expect_quantile(m, quad, [&](double x) { return h1(x); });
    double m2 = expect_quantile(m, quad, [&](double x) { return h2(x); });
    return quad.integrate([&](double u) {
        double x = m.quantile(u);
        return (h1(x) - m1) * (h2(x) - m2);
    });
}

// Covariance of the indicator processes at s and t; for a continuous model
// this is the Brownian bridge kernel and is model-free.
inline double indicator_cov(double s, double t) {
    if (!(s > 0.0 && s < 1.0 && t > 0.0 && t < 1.0)) {
        throw domain_error("indicator_cov requires s,t in (0,1)");
    }
    return std::min(s, t) - s * t;
}

// Variance contributed by the residual integral:
//   gamma2 = double integral of (min(s,t) - st) * ell(s) * ell(t).
// The kernel has a kink on the diagonal, so the inner integral is split
// there exactly: for fixed s it equals
//   (1-s) * int_0^s t*ell(t) dt + s * int_s^1 (1-t)*ell(t) dt,
// each piece smooth and integrated on a mapped copy of the rule.  A naive
// tensor product over the kink would stall near 1e-5 accuracy.
inline double gamma2(const std::function<double(double)>& ell,
                     const quadrature_rule& quad = default_quadrature()) {
    return quad.integrate([&](double s) {
        double lower = quad.integrate_on(0.0, s, [&](double t) { return t * ell(t); });
        double upper =
            quad.integrate_on(s, 1.0, [&](double t) { return (1.0 - t) * ell(t); });
        return ell(s) * ((1.0 - s) * lower + s * upper);
    });
}

// Cross covariance between the influence term and the residual integral:
//   gamma3 = int_0^1 Gamma(h, indicator at s) * ell(s) ds, with
//   Gamma(h, indicator at s) = int_0^s h(F^{-1}(u)) du - s * E h(X).
inline double gamma3(const influence_function& h, const std::function<double(double)>& ell,
                     const distribution_model& m,
                     const quadrature_rule& quad = default_quadrature()) {
    if (h.is_bivariate()) {
        throw config_error("gamma3 integrates univariate influence functions only");
    }
    double mean_h = expect_quantile(m, quad, [&](double x) { return h(x); });
    return quad.integrate([&](double s) {
        double partial =
            quad.integrate_on(0.0, s, [&](double u) { return h(m.quantile(u)); });
        return (partial - s * mean_h) * ell(s);
    });
}

// Moment-condition diagnostics.  Each flag reports whether the corresponding
// second moment looks finite under the model, judged by stability of the
// quantile-domain integral when the node count doubles.
struct moment_flags {
    bool h_square = true;        // E h(X)^2 finite
    bool h_square_q_square = true; // E h(X)^2 q(X)^2 finite
    bool q_square = true;        // E q(X)^2 finite
};

namespace detail {

template <typename F>
bool doubling_stable(const distribution_model& m, const quadrature_rule& quad, F&& f) {
    quadrature_rule doubled = gauss_legendre(2 * quad.size());
    double coarse = quad.integrate([&](double u) { return f(m.quantile(u), u); });
    double fine = doubled.integrate([&](double u) { return f(m.quantile(u), u); });
    double denom = std::max(std::abs(fine), 1e-12);
    return std::abs(fine - coarse) / denom <= 0.05;
}

} // namespace detail

// Flags are heuristics, not proofs: a divergent moment shows up as the
// integral drifting upward with the node count (the rule's largest node
// creeps toward 1).  q enters through ell since q(F^{-1}(s))^2 = ell(s)^2.
inline moment_flags moment_conditions_check(const gar_rep& rep, const distribution_model& m,
                                            const quadrature_rule& quad = default_quadrature()) {
    if (rep.fep_term.is_bivariate()) {
        throw config_error("moment_conditions_check supports univariate representations");
    }
    moment_flags flags;
    const auto& h = rep.fep_term;
    flags.h_square = detail::doubling_stable(
        m, quad, [&](double x, double) { return h(x) * h(x); });
    if (rep.residual) {
        const auto& ell = rep.residual->ell;
        flags.q_square = detail::doubling_stable(
            m, quad, [&](double, double u) { return ell(u) * ell(u); });
        flags.h_square_q_square = detail::doubling_stable(m, quad, [&](double x, double u) {
            double hx = h(x);
            double lu = ell(u);
            return hx * hx * lu * lu;
        });
    }
    return flags;
}

struct variance_report {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 0.0;
    double total = 0.0; // always gamma1 + gamma2 + 2*gamma3
    moment_flags flags;
};

// Asymptotic variance of sqrt(n) * (J_n - constant) for a representation:
// variance of the influence term, variance of the residual integral, twice
// their covariance.
inline variance_report total_variance(const gar_rep& rep, const distribution_model& m,
                                      const quadrature_rule& quad = default_quadrature()) {
    variance_report report;
    report.gamma1 = gamma_cov(rep.fep_term, rep.fep_term, m, quad);
    if (rep.residual) {
        report.gamma2 = garkit::gamma2(rep.residual->ell, quad);
        report.gamma3 = garkit::gamma3(rep.fep_term, rep.residual->ell, m, quad);
    }
    report.total = report.gamma1 + report.gamma2 + 2.0 * report.gamma3;
    report.flags = moment_conditions_check(rep, m, quad);
    return report;
}

} // namespace garkit
