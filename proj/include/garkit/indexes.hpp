#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "garkit/errors.hpp"
#include "garkit/gar.hpp"
#include "garkit/influence.hpp"
#include "garkit/model.hpp"
#include "garkit/quadrature.hpp"
#include "garkit/sample.hpp"

namespace garkit {

enum class negative_policy { reject, allow };

// Gini index as an L-statistic:
//   J_n = (1/mean) * (1/n) * sum_j ((2j-1)/n - 1) * X_{(j)}
// Equal to half the mean absolute difference divided by the mean; constant
// samples give exactly 0.
inline double gini_estimate(const sample& s,
                            negative_policy policy = negative_policy::reject) {
    const auto& sorted = s.sorted();
    std::size_t n = s.size();
    if (policy == negative_policy::reject && sorted.front() < 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            if (s.values()[i] < 0.0) {
                throw bad_value_error(i, "negative value in a nonnegative index");
            }
        }
    }
    double mean = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
        double x = sorted[j - 1];
        mean += x;
        weighted += ((2.0 * static_cast<double>(j) - 1.0) / static_cast<double>(n) - 1.0) * x;
    }
    mean /= static_cast<double>(n);
    weighted /= static_cast<double>(n);
    if (mean == 0.0) {
        throw degenerate_error("gini index undefined for zero-mean sample");
    }
    return weighted / mean;
}

// Ingredients of the Gini representation under a model:
//   mu    = E X
//   big_h = (2F(x) - 1) x           with mean_big_h = E big_h(X)
//   h     = (mu*big_h(x) - mean_big_h*x) / mu^2   (model mean exactly 0)
//   ell   = 2 F^{-1}(s) / mu        (weight on the indicator process,
//                                    from the rank weight q(x) = 2x/mu)
struct gini_components {
    double mu = 0.0;
    double mean_big_h = 0.0;
    double constant = 0.0;
    influence_function h;
    residual_weight ell;
};

inline gini_components gini_ingredients(const distribution_model& m,
                                        const quadrature_rule& quad = default_quadrature()) {
    gini_components c;
    c.mu = expect_quantile(m, quad, [](double x) { return x; });
    if (c.mu == 0.0 || !std::isfinite(c.mu)) {
        throw degenerate_error("gini representation needs a finite nonzero model mean");
    }
    auto cdf = m.cdf;
    c.mean_big_h =
        quad.integrate([&](double u) { return (2.0 * u - 1.0) * m.quantile(u); });
    c.constant = c.mean_big_h / c.mu;
    double mu = c.mu;
    double mh = c.mean_big_h;
    c.h = influence_function::univariate(
        [mu, mh, cdf](double x) {
            return (mu * (2.0 * cdf(x) - 1.0) * x - mh * x) / (mu * mu);
        },
        "gini-h");
    auto quant = m.quantile;
    c.ell.ell = [mu, quant](double s) { return 2.0 * quant(s) / mu; };
    c.ell.origin_q = weight_function{[mu](double x) { return 2.0 * x / mu; }, "2x/mu"};
    c.ell.tag = "gini-ell";
    return c;
}

inline gar_rep gini_gar(const distribution_model& m,
                        const quadrature_rule& quad = default_quadrature()) {
    gini_components c = gini_ingredients(m, quad);
    gar_rep rep;
    rep.constant = c.constant;
    rep.fep_term = c.h;
    rep.residual = c.ell;
    rep.tag = "gini";
    return rep;
}

// Plug-in correlation coefficient with 1/n moment normalization.
inline double corr_estimate(const bivariate_sample& bs) {
    std::size_t n = bs.size();
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += bs.xs()[i];
        my += bs.ys()[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = bs.xs()[i] - mx;
        double dy = bs.ys()[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw degenerate_error("correlation undefined for a constant coordinate");
    }
    return sxy / std::sqrt(sxx * syy);
}

// Central cross moments of a pair (X,Y); mu_ab = E[(X-EX)^a (Y-EY)^b].
struct correlation_moments {
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    double rho = 0.0;
    double mu22 = 0.0;
    double mu31 = 0.0;
    double mu13 = 0.0;
    double mu40 = 0.0;
    double mu04 = 0.0;

    void validate() const {
        if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) {
            throw domain_error("correlation moments need positive standard deviations");
        }
        if (!(std::abs(rho) < 1.0)) {
            throw domain_error("correlation moments need |rho| < 1");
        }
    }

    // Gaussian pair with unit variances: mu22 = 1+2rho^2, mu31 = mu13 = 3rho,
    // fourth moments 3.
    static correlation_moments standard_bivariate_normal(double rho) {
        correlation_moments mom;
        mom.rho = rho;
        mom.mu22 = 1.0 + 2.0 * rho * rho;
        mom.mu31 = 3.0 * rho;
        mom.mu13 = 3.0 * rho;
        mom.mu40 = 3.0;
        mom.mu04 = 3.0;
        mom.validate();
        return mom;
    }
};

// Asymptotic variance of sqrt(n) * (rho_n - rho):
//   sigma^2 = (1 + rho^2/2) mu22 / (sx^2 sy^2)
//           + rho^2 (mu40/sx^4 + mu04/sy^4) / 4
//           - rho (mu31 / (sx^3 sy) + mu13 / (sx sy^3))
// Independence with unit moments collapses this to mu22 / (sx^2 sy^2).
inline double corr_asymptotic_variance(const correlation_moments& mom) {
    mom.validate();
    double sx2 = mom.sigma_x * mom.sigma_x;
    double sy2 = mom.sigma_y * mom.sigma_y;
    double term1 = (1.0 + mom.rho * mom.rho / 2.0) * mom.mu22 / (sx2 * sy2);
    double term2 =
        mom.rho * mom.rho * (mom.mu40 / (sx2 * sx2) + mom.mu04 / (sy2 * sy2)) / 4.0;
    double term3 = mom.rho * (mom.mu31 / (sx2 * mom.sigma_x * mom.sigma_y) +
                              mom.mu13 / (mom.sigma_x * sy2 * mom.sigma_y));
    return term1 + term2 - term3;
}

// Statistic of the form g( (1/n) sum h(X_j) ) together with its (residual-
// free) representation under a model.
struct smooth_index {
    influence_function h;
    std::optional<smooth_map> transform;

    double estimate(const sample& s) const {
        if (!h.valid() || h.is_bivariate()) {
            throw config_error("smooth index needs a univariate influence function");
        }
        double acc = 0.0;
        for (double x : s.values()) {
            acc += h(x);
        }
        double mean = acc / static_cast<double>(s.size());
        if (!transform) {
            return mean;
        }
        double out = transform->g(mean);
        if (!std::isfinite(out)) {
            throw eval_error("transform '" + transform->name + "' not finite at " +
                             std::to_string(mean));
        }
        return out;
    }

    gar_rep gar(const distribution_model& m,
                const quadrature_rule& quad = default_quadrature()) const {
        gar_rep rep;
        rep.constant = expect_quantile(m, quad, [&](double x) { return h(x); });
        rep.fep_term = h;
        rep.tag = h.tag().empty() ? "moment" : h.tag();
        if (transform) {
            rep = gar_delta(rep, *transform);
        }
        return rep;
    }
};

inline smooth_index smooth_moment_index(influence_function h,
                                        std::optional<smooth_map> transform = std::nullopt) {
    if (!h.valid() || h.is_bivariate()) {
        throw config_error("smooth_moment_index needs a univariate influence function");
    }
    return smooth_index{std::move(h), std::move(transform)};
}

} // namespace garkit
