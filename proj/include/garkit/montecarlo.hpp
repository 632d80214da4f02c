#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "garkit/errors.hpp"
#include "garkit/gar.hpp"
#include "garkit/indexes.hpp"
#include "garkit/model.hpp"
#include "garkit/normal.hpp"
#include "garkit/processes.hpp"
#include "garkit/quadrature.hpp"
#include "garkit/rng.hpp"
#include "garkit/sample.hpp"
#include "garkit/variance.hpp"

namespace garkit {

// Worker count: explicit request wins, then GARKIT_THREADS, then hardware.
// Results never depend on this because every replicate owns a counter-based
// stream and lands in a preassigned slot.
inline unsigned resolve_thread_count(unsigned requested = 0) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("GARKIT_THREADS")) {
        unsigned v = 0;
        std::string text(env);
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || v == 0) {
            throw config_error("GARKIT_THREADS must be a positive integer, got '" + text +
                               "'");
        }
        return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

namespace detail {

// Runs body(i) for i in [0,count) on the given number of workers.  Work is
// claimed through an atomic counter; outputs must go to per-index slots.
// The first thrown exception (by index) is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    if (count == 0) {
        return;
    }
    unsigned workers = std::min<std::size_t>(threads == 0 ? 1 : threads, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back(work);
    }
    for (auto& t : pool) {
        t.join();
    }
    for (const auto& err : errors) {
        if (err) {
            std::rethrow_exception(err);
        }
    }
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n == 0) {
        throw domain_error("median of an empty collection");
    }
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

// n independent draws from the model via quantile-transformed uniforms from
// a counter-based stream keyed by the seed.
inline sample sample_from(const distribution_model& m, std::size_t n, std::uint64_t seed) {
    counter_rng rng(seed);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = m.quantile(rng.next_uniform());
    }
    return sample(std::move(values));
}

// Two-sided Kolmogorov-Smirnov distance between the empirical distribution
// of the values and a centered normal with the given variance.
inline double ks_test_normal(const std::vector<double>& values, double variance) {
    if (values.size() < 100) {
        throw domain_error("ks_test_normal needs at least 100 values");
    }
    if (!(variance > 0.0)) {
        throw domain_error("ks_test_normal needs a positive variance");
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double sigma = std::sqrt(variance);
    double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        double f = normal_cdf(sorted[i] / sigma);
        double hi = (static_cast<double>(i) + 1.0) / n - f;
        double lo = f - static_cast<double>(i) / n;
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

struct gini_experiment {
    distribution_model model;
};

// Standard bivariate normal pairs with the given correlation.
struct correlation_experiment {
    double rho = 0.0;
};

// Caller-supplied representation; the estimator defaults to realizing the
// representation itself on each replicate.
struct custom_experiment {
    distribution_model model;
    gar_rep rep;
    std::function<double(const sample&)> estimator;
};

using experiment_index =
    std::variant<gini_experiment, correlation_experiment, custom_experiment>;

struct experiment_config {
    experiment_index index;
    std::size_t n = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    quadrature_rule quad = default_quadrature();
    unsigned threads = 0; // 0 -> resolve_thread_count()
};

struct monte_carlo_report {
    std::size_t n = 0;
    std::size_t reps = 0;
    std::size_t failures = 0;
    double center = 0.0;        // limit constant the estimator is centered at
    double predicted_var = 0.0; // model asymptotic variance
    double empirical_mean = 0.0;
    double empirical_var = 0.0;
    double var_ratio = 0.0;
    double ks_statistic = 0.0;
    double ci_coverage = 0.0;
    std::vector<double> standardized; // sqrt(n) * (estimate - center), kept replicates
};

inline bivariate_sample sample_bivariate_normal(double rho, std::size_t n,
                                                std::uint64_t seed) {
    counter_rng rng(seed);
    double tail = std::sqrt(1.0 - rho * rho);
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = normal_quantile(rng.next_uniform());
        double z = normal_quantile(rng.next_uniform());
        xs[i] = x;
        ys[i] = rho * x + tail * z;
    }
    return bivariate_sample(std::move(xs), std::move(ys));
}

// Repeats the estimator on fresh replicates (per-replicate seed = seed xor
// replicate id), standardizes against the model limit, and reports how the
// draws compare with the predicted normal limit.  Replicates that raise a
// library error are dropped; more than 1% of them is a failed experiment.
inline monte_carlo_report run_experiment(const experiment_config& cfg) {
    if (cfg.n < 2) {
        throw config_error("experiment needs n >= 2");
    }
    if (cfg.reps < 100) {
        throw config_error("experiment needs at least 100 replicates");
    }

    monte_carlo_report report;
    report.n = cfg.n;
    report.reps = cfg.reps;

    std::function<double(std::uint64_t)> replicate;
    if (const auto* g = std::get_if<gini_experiment>(&cfg.index)) {
        gar_rep rep = gini_gar(g->model, cfg.quad);
        report.center = rep.constant;
        report.predicted_var = total_variance(rep, g->model, cfg.quad).total;
        const distribution_model& model = g->model;
        std::size_t n = cfg.n;
        replicate = [&model, n](std::uint64_t seed) {
            return gini_estimate(sample_from(model, n, seed));
        };
    } else if (const auto* c = std::get_if<correlation_experiment>(&cfg.index)) {
        if (!(std::abs(c->rho) < 1.0)) {
            throw config_error("correlation experiment needs |rho| < 1");
        }
        report.center = c->rho;
        report.predicted_var =
            corr_asymptotic_variance(correlation_moments::standard_bivariate_normal(c->rho));
        double rho = c->rho;
        std::size_t n = cfg.n;
        replicate = [rho, n](std::uint64_t seed) {
            return corr_estimate(sample_bivariate_normal(rho, n, seed));
        };
    } else {
        const auto& cu = std::get<custom_experiment>(cfg.index);
        report.center = cu.rep.constant;
        report.predicted_var = total_variance(cu.rep, cu.model, cfg.quad).total;
        const distribution_model& model = cu.model;
        const gar_rep& rep = cu.rep;
        const quadrature_rule& quad = cfg.quad;
        std::size_t n = cfg.n;
        if (cu.estimator) {
            auto est = cu.estimator;
            replicate = [&model, n, est](std::uint64_t seed) {
                return est(sample_from(model, n, seed));
            };
        } else {
            replicate = [&model, &rep, &quad, n](std::uint64_t seed) {
                return gar_evaluate(rep, sample_from(model, n, seed), model, quad);
            };
        }
    }

    double root_n = std::sqrt(static_cast<double>(cfg.n));
    std::vector<double> values(cfg.reps, 0.0);
    std::vector<char> ok(cfg.reps, 0);
    detail::parallel_for(cfg.reps, resolve_thread_count(cfg.threads), [&](std::size_t i) {
        std::uint64_t seed = cfg.seed ^ static_cast<std::uint64_t>(i + 1);
        try {
            values[i] = root_n * (replicate(seed) - report.center);
            ok[i] = 1;
        } catch (const error&) {
            ok[i] = 0;
        }
    });

    std::vector<double>& kept = report.standardized;
    kept.reserve(cfg.reps);
    for (std::size_t i = 0; i < cfg.reps; ++i) {
        if (ok[i]) {
            kept.push_back(values[i]);
        } else {
            ++report.failures;
        }
    }
    if (report.failures * 100 > cfg.reps) {
        throw experiment_error("more than 1% of replicates failed (" +
                               std::to_string(report.failures) + " of " +
                               std::to_string(cfg.reps) + ")");
    }
    if (kept.size() < 2) {
        throw experiment_error("too few successful replicates");
    }

    double mean = 0.0;
    for (double v : kept) {
        mean += v;
    }
    mean /= static_cast<double>(kept.size());
    double ss = 0.0;
    for (double v : kept) {
        ss += (v - mean) * (v - mean);
    }
    report.empirical_mean = mean;
    report.empirical_var = ss / static_cast<double>(kept.size() - 1);

    if (report.predicted_var > 0.0) {
        report.ks_statistic = ks_test_normal(kept, report.predicted_var);
        report.var_ratio = report.empirical_var / report.predicted_var;
    } else {
        // Degenerate limit: compare against a point mass at zero.
        bool all_zero = std::all_of(kept.begin(), kept.end(),
                                    [](double v) { return v == 0.0; });
        report.ks_statistic = all_zero ? 0.0 : 1.0;
        report.var_ratio = report.empirical_var == 0.0 ? 1.0 : report.empirical_var / 0.0;
    }

    double half_width = 1.96 * std::sqrt(report.predicted_var);
    std::size_t covered = 0;
    for (double v : kept) {
        if (std::abs(v) <= half_width) {
            ++covered;
        }
    }
    report.ci_coverage = static_cast<double>(covered) / static_cast<double>(kept.size());
    return report;
}

struct gap_row {
    std::size_t n = 0;
    double median_gap = 0.0;
};

// Median over replicates of |sqrt(n) * residual average - quadrature of the
// indicator process against ell| for each n in the grid.  Both sides are
// computed on the same replicate; the residual needs its rank weight so the
// left side can be evaluated at raw observations.
inline std::vector<gap_row> representation_gap(const gar_rep& rep, const distribution_model& m,
                                               const std::vector<std::size_t>& n_grid,
                                               std::size_t reps, std::uint64_t seed,
                                               const quadrature_rule& quad = default_quadrature(),
                                               unsigned threads = 0) {
    if (!rep.residual || !rep.residual->origin_q) {
        throw config_error(
            "representation_gap needs a residual with its rank weight recorded");
    }
    if (reps == 0 || n_grid.empty()) {
        throw config_error("representation_gap needs replicates and a grid of sizes");
    }
    const weight_function& q = *rep.residual->origin_q;
    const auto& ell = rep.residual->ell;
    unsigned workers = resolve_thread_count(threads);

    std::vector<gap_row> rows;
    rows.reserve(n_grid.size());
    for (std::size_t row = 0; row < n_grid.size(); ++row) {
        std::size_t n = n_grid[row];
        if (n < 2) {
            throw config_error("representation_gap grid entries must be >= 2");
        }
        std::vector<double> gaps(reps, 0.0);
        detail::parallel_for(reps, workers, [&](std::size_t i) {
            std::uint64_t rep_seed = seed ^ (static_cast<std::uint64_t>(row * reps + i + 1));
            sample s = sample_from(m, n, rep_seed);
            double lhs =
                std::sqrt(static_cast<double>(n)) * residual_process(s, m.cdf, q);
            double rhs =
                quad.integrate([&](double u) { return indicator_process(s, m, u) * ell(u); });
            gaps[i] = std::abs(lhs - rhs);
        });
        rows.push_back({n, detail::median_of(std::move(gaps))});
    }
    return rows;
}

struct residual_condition_row {
    std::size_t n = 0;
    double integral_stat = 0.0; // |int sqrt(n)(s - V_n(s)) Delta_n(q,s) ds|
    double weighted_stat = 0.0; // int sqrt(s(1-s)) |Delta_n(q,s)| ds
    double mean_stat = 0.0;     // n^{-1/2} * mean of q(X_j)
};

struct residual_diagnostic {
    std::vector<residual_condition_row> rows;
    bool tail_warning = false;
    std::string warning;
};

// Replicate medians of the three vanishing statistics behind the residual
// representation, plus a tail warning when they refuse to shrink or the
// model second moment of q looks divergent.  Delta_n(q,s) compares q at the
// empirical versus model quantile; V_n comes from the underlying uniforms.
inline residual_diagnostic residual_condition_diagnostic(
    const weight_function& q, const distribution_model& m,
    const std::vector<std::size_t>& n_grid, std::size_t reps, std::uint64_t seed,
    const quadrature_rule& quad = default_quadrature(), unsigned threads = 0) {
    if (reps == 0 || n_grid.empty()) {
        throw config_error("residual diagnostic needs replicates and a grid of sizes");
    }
    unsigned workers = resolve_thread_count(threads);
    residual_diagnostic out;

    for (std::size_t row = 0; row < n_grid.size(); ++row) {
        std::size_t n = n_grid[row];
        if (n < 2) {
            throw config_error("residual diagnostic grid entries must be >= 2");
        }
        std::vector<double> stat_a(reps), stat_b(reps), stat_c(reps);
        detail::parallel_for(reps, workers, [&](std::size_t i) {
            std::uint64_t rep_seed =
                seed ^ (static_cast<std::uint64_t>(0x5D) << 56) ^
                static_cast<std::uint64_t>(row * reps + i + 1);
            counter_rng rng(rep_seed);
            std::vector<double> uniforms(n);
            for (auto& u : uniforms) {
                u = rng.next_uniform();
            }
            std::vector<double> sorted_u = uniforms;
            std::sort(sorted_u.begin(), sorted_u.end());
            double root_n = std::sqrt(static_cast<double>(n));

            double mean_q = 0.0;
            for (double u : uniforms) {
                mean_q += q(m.quantile(u));
            }
            mean_q /= static_cast<double>(n);
            stat_c[i] = mean_q / root_n;

            double acc_a = 0.0;
            double acc_b = 0.0;
            for (std::size_t k = 0; k < quad.size(); ++k) {
                double s = quad.nodes[k];
                double w = quad.weights[k];
                double vn = sorted_u[detail::quantile_block(s, n) - 1];
                double delta = q(m.quantile(vn)) - q(m.quantile(s));
                acc_a += w * root_n * (s - vn) * delta;
                acc_b += w * std::sqrt(s * (1.0 - s)) * std::abs(delta);
            }
            stat_a[i] = std::abs(acc_a);
            stat_b[i] = acc_b;
        });
        residual_condition_row r;
        r.n = n;
        r.integral_stat = detail::median_of(std::move(stat_a));
        r.weighted_stat = detail::median_of(std::move(stat_b));
        r.mean_stat = detail::median_of(std::move(stat_c));
        out.rows.push_back(r);
    }

    // A statistic that is already at the numerical floor cannot shrink
    // further and counts as converged.
    constexpr double floor = 1e-12;
    bool shrinking = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i) {
        bool a_ok = out.rows[i].integral_stat < out.rows[i - 1].integral_stat ||
                    out.rows[i].integral_stat <= floor;
        bool b_ok = out.rows[i].weighted_stat < out.rows[i - 1].weighted_stat ||
                    out.rows[i].weighted_stat <= floor;
        if (!a_ok || !b_ok) {
            shrinking = false;
        }
    }
    bool q_square_stable = detail::doubling_stable(m, quad, [&](double x, double) {
        double v = q(x);
        return v * v;
    });
    if (!q_square_stable) {
        out.tail_warning = true;
        out.warning = "second moment of the weight looks divergent under this model";
    } else if (!shrinking) {
        out.tail_warning = true;
        out.warning = "diagnostic statistics are not shrinking along the size grid";
    }
    return out;
}

// Median Bahadur gap on uniform probes for each n: the raw empirical vs
// quantile process cancellation, no model involved.
inline std::vector<gap_row> bahadur_gap_medians(const std::vector<std::size_t>& n_grid,
                                                std::size_t reps, std::uint64_t seed,
                                                unsigned threads = 0) {
    if (reps == 0 || n_grid.empty()) {
        throw config_error("bahadur diagnostic needs replicates and a grid of sizes");
    }
    unsigned workers = resolve_thread_count(threads);
    std::vector<gap_row> rows;
    rows.reserve(n_grid.size());
    for (std::size_t row = 0; row < n_grid.size(); ++row) {
        std::size_t n = n_grid[row];
        std::vector<double> gaps(reps, 0.0);
        detail::parallel_for(reps, workers, [&](std::size_t i) {
            std::uint64_t rep_seed = seed ^ (static_cast<std::uint64_t>(0xBA) << 56) ^
                                     static_cast<std::uint64_t>(row * reps + i + 1);
            counter_rng rng(rep_seed);
            std::vector<double> uniforms(n);
            for (auto& u : uniforms) {
                u = rng.next_uniform();
            }
            gaps[i] = bahadur_gap(sample(std::move(uniforms)));
        });
        rows.push_back({n, detail::median_of(std::move(gaps))});
    }
    return rows;
}

} // namespace garkit
