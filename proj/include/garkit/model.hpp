#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "garkit/errors.hpp"
#include "garkit/normal.hpp"
#include "garkit/quadrature.hpp"
#include "garkit/rng.hpp"

namespace garkit {

struct interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

// Reference distribution: the truth every model-based quantity (means,
// covariances, predicted variances) is computed against.  Quantile and CDF
// are the load-bearing members; sampling is quantile-transformed uniforms,
// so no model ever needs a sampler of its own and the density is optional
// metadata.
struct distribution_model {
    std::string name;
    std::vector<double> params;
    std::function<double(double)> cdf;
    std::function<double(double)> quantile; // defined on (0,1)
    std::function<double(double)> density;  // optional
    interval support;

    double draw(counter_rng& rng) const { return quantile(rng.next_uniform()); }
};

// E_model[f(X)] in the quantile domain: integral over (0,1) of f(F^{-1}(u)).
template <typename F>
double expect_quantile(const distribution_model& m, const quadrature_rule& quad, F&& f) {
    return quad.integrate([&](double u) { return f(m.quantile(u)); });
}

inline distribution_model uniform_model(double a, double b) {
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
        throw model_error("uniform model requires finite a < b");
    }
    distribution_model m;
    m.name = "uniform";
    m.params = {a, b};
    m.support = {a, b};
    m.cdf = [a, b](double x) {
        if (x <= a) return 0.0;
        if (x >= b) return 1.0;
        return (x - a) / (b - a);
    };
    m.quantile = [a, b](double s) {
        if (!(s > 0.0 && s < 1.0)) throw domain_error("quantile requires s in (0,1)");
        return a + s * (b - a);
    };
    m.density = [a, b](double x) { return (x >= a && x <= b) ? 1.0 / (b - a) : 0.0; };
    return m;
}

inline distribution_model exponential_model(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw model_error("exponential model requires rate > 0");
    }
    distribution_model m;
    m.name = "exp";
    m.params = {rate};
    m.support = {0.0, std::numeric_limits<double>::infinity()};
    m.cdf = [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); };
    m.quantile = [rate](double s) {
        if (!(s > 0.0 && s < 1.0)) throw domain_error("quantile requires s in (0,1)");
        return -std::log1p(-s) / rate;
    };
    m.density = [rate](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); };
    return m;
}

inline distribution_model pareto_model(double scale, double shape) {
    if (!(scale > 0.0) || !(shape > 0.0) || !std::isfinite(scale) || !std::isfinite(shape)) {
        throw model_error("pareto model requires scale > 0 and shape > 0");
    }
    distribution_model m;
    m.name = "pareto";
    m.params = {scale, shape};
    m.support = {scale, std::numeric_limits<double>::infinity()};
    m.cdf = [scale, shape](double x) {
        return x <= scale ? 0.0 : 1.0 - std::pow(scale / x, shape);
    };
    m.quantile = [scale, shape](double s) {
        if (!(s > 0.0 && s < 1.0)) throw domain_error("quantile requires s in (0,1)");
        return scale * std::pow(1.0 - s, -1.0 / shape);
    };
    m.density = [scale, shape](double x) {
        return x < scale ? 0.0 : shape * std::pow(scale, shape) / std::pow(x, shape + 1.0);
    };
    return m;
}

inline distribution_model lognormal_model(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(mu) || !std::isfinite(sigma)) {
        throw model_error("lognormal model requires finite mu and sigma > 0");
    }
    distribution_model m;
    m.name = "lognormal";
    m.params = {mu, sigma};
    m.support = {0.0, std::numeric_limits<double>::infinity()};
    m.cdf = [mu, sigma](double x) {
        return x <= 0.0 ? 0.0 : normal_cdf((std::log(x) - mu) / sigma);
    };
    m.quantile = [mu, sigma](double s) {
        return std::exp(mu + sigma * normal_quantile(s));
    };
    m.density = [mu, sigma](double x) {
        if (x <= 0.0) return 0.0;
        double z = (std::log(x) - mu) / sigma;
        return std::exp(-0.5 * z * z) / (x * sigma * 2.5066282746310005024);
    };
    return m;
}

// cdf(quantile(s)) == s on a grid: the generalized-inverse consistency every
// model must satisfy before it is trusted as a reference distribution.
inline void validate_model(const distribution_model& m, std::size_t grid = 1000,
                           double tol = 1e-9) {
    for (std::size_t k = 1; k <= grid; ++k) {
        double s = static_cast<double>(k) / static_cast<double>(grid + 1);
        double back = m.cdf(m.quantile(s));
        if (!(std::abs(back - s) <= tol)) {
            throw model_error("model " + m.name + " fails cdf(quantile(s))=s at s=" +
                              std::to_string(s));
        }
    }
}

namespace detail {

inline double parse_param(const std::string& text, const std::string& spec) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw config_error("bad numeric parameter '" + text + "' in model spec '" + spec +
                           "'");
    }
    return v;
}

} // namespace detail

// Splits "name:p1,p2" into the name and numeric parameters; the grammar is
// deliberately independent of the expression DSL.
inline std::pair<std::string, std::vector<double>> split_model_spec(const std::string& spec) {
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string::npos) {
        std::string rest = spec.substr(colon + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            auto comma = rest.find(',', pos);
            std::string tok =
                rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (tok.empty()) {
                throw config_error("empty parameter in model spec '" + spec + "'");
            }
            params.push_back(detail::parse_param(tok, spec));
            if (comma == std::string::npos) {
                break;
            }
            pos = comma + 1;
        }
    }
    if (name.empty()) {
        throw config_error("empty model name in spec '" + spec + "'");
    }
    return {name, params};
}

inline distribution_model parse_model_spec(const std::string& spec) {
    auto [name, p] = split_model_spec(spec);
    auto arity = [&](std::size_t want) {
        if (p.size() != want) {
            throw config_error("model '" + name + "' takes " + std::to_string(want) +
                               " parameter(s), got " + std::to_string(p.size()));
        }
    };
    distribution_model m;
    if (name == "uniform") {
        arity(2);
        m = uniform_model(p[0], p[1]);
    } else if (name == "exp" || name == "exponential") {
        arity(1);
        m = exponential_model(p[0]);
    } else if (name == "pareto") {
        arity(2);
        m = pareto_model(p[0], p[1]);
    } else if (name == "lognormal") {
        arity(2);
        m = lognormal_model(p[0], p[1]);
    } else {
        throw config_error("unknown model '" + name + "'");
    }
    validate_model(m);
    return m;
}

} // namespace garkit
