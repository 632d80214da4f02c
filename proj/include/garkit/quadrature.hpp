#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "garkit/errors.hpp"

namespace garkit {

// Gauss-Legendre rule mapped onto the open interval (0,1).  All integrals in
// the library live in the quantile domain, so nodes never touch 0 or 1 and
// integrands are never evaluated at distribution endpoints.
struct quadrature_rule {
    std::vector<double> nodes;   // strictly increasing, inside (0,1)
    std::vector<double> weights; // positive, summing to 1

    std::size_t size() const noexcept { return nodes.size(); }

    template <typename F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            acc += weights[k] * f(nodes[k]);
        }
        return acc;
    }

    // Same rule affinely mapped to (a,b) inside (0,1); used for integrals
    // that must be split at an interior point.
    template <typename F>
    double integrate_on(double a, double b, F&& f) const {
        double span = b - a;
        if (span <= 0.0) {
            return 0.0;
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            acc += weights[k] * f(a + span * nodes[k]);
        }
        return span * acc;
    }
};

// Nodes are roots of the Legendre polynomial P_n, found by Newton iteration
// from the Chebyshev-angle initial guess; weights from the standard formula
// w = 2 / ((1-x^2) P_n'(x)^2), halved by the map [-1,1] -> (0,1).
inline quadrature_rule gauss_legendre(std::size_t n) {
    if (n < 2) {
        throw config_error("quadrature rule needs at least 2 nodes");
    }
    quadrature_rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double pi = 3.14159265358979323846;
    for (std::size_t k = 0; k < (n + 1) / 2; ++k) {
        double x = std::cos(pi * (static_cast<double>(k) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Bonnet recurrence for P_n(x) and P_{n-1}(x).
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t j = 2; j <= n; ++j) {
                double p2 = ((2.0 * static_cast<double>(j) - 1.0) * x * p1 -
                             (static_cast<double>(j) - 1.0) * p0) /
                            static_cast<double>(j);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the k-th root from the top on [-1,1]; map to (0,1).
        rule.nodes[n - 1 - k] = 0.5 * (1.0 + x);
        rule.nodes[k] = 0.5 * (1.0 - x);
        rule.weights[n - 1 - k] = 0.5 * w;
        rule.weights[k] = 0.5 * w;
    }
    return rule;
}

inline const quadrature_rule& default_quadrature() {
    static const quadrature_rule rule = gauss_legendre(256);
    return rule;
}

} // namespace garkit
