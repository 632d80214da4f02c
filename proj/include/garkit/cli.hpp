#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "garkit/csv.hpp"
#include "garkit/errors.hpp"
#include "garkit/expr.hpp"
#include "garkit/gar.hpp"
#include "garkit/indexes.hpp"
#include "garkit/model.hpp"
#include "garkit/montecarlo.hpp"
#include "garkit/normal.hpp"
#include "garkit/quadrature.hpp"
#include "garkit/sample.hpp"
#include "garkit/variance.hpp"
#include "garkit/version.hpp"

namespace garkit::cli {

using json = nlohmann::ordered_json;

inline constexpr int report_schema_version = 1;

inline std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Every report and error document embeds the full invocation so any number
// in it can be reproduced from the document alone.
inline json make_manifest(const std::string& command, const std::vector<std::string>& args,
                          std::optional<std::uint64_t> seed) {
    json m;
    m["command"] = command;
    m["args"] = args;
    m["version"] = version_string;
    if (seed) {
        m["seed"] = *seed;
    } else {
        m["seed"] = nullptr;
    }
    m["timestamp"] = utc_timestamp();
    return m;
}

inline smooth_map named_transform(const std::string& name) {
    if (name == "identity") {
        return {[](double v) { return v; }, [](double) { return 1.0; }, "identity"};
    }
    if (name == "sqrt") {
        return {[](double v) { return std::sqrt(v); },
                [](double v) { return 0.5 / std::sqrt(v); }, "sqrt"};
    }
    if (name == "square") {
        return {[](double v) { return v * v; }, [](double v) { return 2.0 * v; }, "square"};
    }
    if (name == "log") {
        return {[](double v) { return std::log(v); }, [](double v) { return 1.0 / v; },
                "log"};
    }
    throw config_error("unknown transform '" + name + "'");
}

namespace clidetail {

inline influence_function expr_influence(const expr& ast,
                                         std::optional<distribution_model> model,
                                         const std::string& text) {
    return influence_function::univariate(
        [ast, model = std::move(model)](double x) {
            return evaluate(ast, x, model ? &*model : nullptr);
        },
        text);
}

inline smooth_index build_custom_index(const std::string& h_text, const std::string& g_name,
                                       const std::optional<distribution_model>& model) {
    if (h_text.empty()) {
        throw config_error("custom index needs --h EXPR");
    }
    expr ast = parse(h_text);
    std::optional<smooth_map> transform;
    if (g_name != "identity") {
        transform = named_transform(g_name);
    }
    return smooth_moment_index(clidetail::expr_influence(ast, model, h_text),
                               std::move(transform));
}

inline double binormal_rho(const std::string& spec) {
    auto [name, p] = split_model_spec(spec);
    if (name != "binormal") {
        throw config_error("the correlation index takes --model binormal:RHO, got '" + spec +
                           "'");
    }
    if (p.size() != 1) {
        throw config_error("binormal takes 1 parameter, got " + std::to_string(p.size()));
    }
    if (!(std::abs(p[0]) < 1.0)) {
        throw config_error("binormal correlation must satisfy |rho| < 1");
    }
    return p[0];
}

// binormal is only meaningful for the correlation index; everything else
// goes through the univariate model grammar.
inline distribution_model univariate_model(const std::string& spec) {
    if (split_model_spec(spec).first == "binormal") {
        throw config_error("model 'binormal' is only valid with the correlation index");
    }
    return parse_model_spec(spec);
}

inline quadrature_rule rule_for(unsigned nodes) {
    return nodes == 256 ? default_quadrature() : gauss_legendre(nodes);
}

inline json gap_rows_json(const std::vector<gap_row>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json row;
        row["n"] = r.n;
        row["median_gap"] = r.median_gap;
        arr.push_back(std::move(row));
    }
    return arr;
}

} // namespace clidetail

struct estimate_options {
    std::string index;
    std::string input;
    std::string h_text;
    std::string g_name = "identity";
    double ci_level = 0.95;
    std::string model_spec;
    bool allow_negative = false;
};

inline json run_estimate(const estimate_options& o) {
    if (!(o.ci_level > 0.0 && o.ci_level < 1.0)) {
        throw config_error("--ci level must be strictly between 0 and 1");
    }
    csv_table table = read_numeric_csv_file(o.input);
    std::vector<std::string> warnings;

    double estimate = 0.0;
    std::size_t n = 0;
    std::optional<double> variance;

    if (o.index == "correlation") {
        if (table.columns.size() != 2) {
            throw config_error("correlation needs a two-column CSV, got " +
                               std::to_string(table.columns.size()) + " column(s)");
        }
        bivariate_sample bs(table.columns[0], table.columns[1]);
        n = bs.size();
        estimate = corr_estimate(bs);
        bool boundary = std::abs(estimate) >= 1.0 - 1e-12;
        if (boundary) {
            warnings.push_back(
                "boundary correlation; asymptotic confidence interval invalid "
                "(|rho| = 1 excluded)");
        }
        if (!o.model_spec.empty() && !boundary) {
            variance = corr_asymptotic_variance(correlation_moments::standard_bivariate_normal(
                clidetail::binormal_rho(o.model_spec)));
        }
    } else if (o.index == "gini") {
        if (table.columns.size() != 1) {
            throw config_error("gini needs a one-column CSV, got " +
                               std::to_string(table.columns.size()) + " column(s)");
        }
        sample s(table.columns[0]);
        n = s.size();
        estimate = gini_estimate(s, o.allow_negative ? negative_policy::allow
                                                     : negative_policy::reject);
        if (!o.model_spec.empty()) {
            distribution_model m = clidetail::univariate_model(o.model_spec);
            variance = total_variance(gini_gar(m), m).total;
        }
    } else if (o.index == "custom") {
        if (table.columns.size() != 1) {
            throw config_error("custom index needs a one-column CSV, got " +
                               std::to_string(table.columns.size()) + " column(s)");
        }
        sample s(table.columns[0]);
        n = s.size();
        std::optional<distribution_model> m;
        if (!o.model_spec.empty()) {
            m = clidetail::univariate_model(o.model_spec);
        }
        smooth_index idx = clidetail::build_custom_index(o.h_text, o.g_name, m);
        estimate = idx.estimate(s);
        if (m) {
            variance = total_variance(idx.gar(*m), *m).total;
        }
    } else {
        throw config_error("unknown index '" + o.index + "'");
    }

    json doc;
    doc["schema_version"] = report_schema_version;
    doc["command"] = "estimate";
    doc["index"] = o.index;
    doc["estimate"] = estimate;
    doc["n"] = n;
    json ci;
    if (variance) {
        double z = normal_quantile(0.5 + o.ci_level / 2.0);
        double half = z * std::sqrt(*variance / static_cast<double>(n));
        ci["lo"] = estimate - half;
        ci["hi"] = estimate + half;
        ci["level"] = o.ci_level;
        ci["method"] = "gar_normal";
    } else {
        ci["level"] = o.ci_level;
        ci["method"] = "none";
    }
    doc["ci"] = std::move(ci);
    if (!warnings.empty()) {
        doc["warnings"] = warnings;
    }
    return doc;
}

struct variance_options {
    std::string index;
    std::string model_spec;
    std::string h_text;
    std::string g_name = "identity";
    unsigned nodes = 256;
};

inline json run_variance(const variance_options& o) {
    quadrature_rule quad = clidetail::rule_for(o.nodes);
    variance_report rep;
    if (o.index == "correlation") {
        rep.gamma1 = corr_asymptotic_variance(correlation_moments::standard_bivariate_normal(
            clidetail::binormal_rho(o.model_spec)));
        rep.gamma2 = 0.0;
        rep.gamma3 = 0.0;
        rep.total = rep.gamma1;
        rep.flags = moment_flags{};
    } else if (o.index == "gini") {
        distribution_model m = clidetail::univariate_model(o.model_spec);
        rep = total_variance(gini_gar(m, quad), m, quad);
    } else if (o.index == "custom") {
        distribution_model m = clidetail::univariate_model(o.model_spec);
        smooth_index idx = clidetail::build_custom_index(o.h_text, o.g_name, m);
        rep = total_variance(idx.gar(m, quad), m, quad);
    } else {
        throw config_error("unknown index '" + o.index + "'");
    }

    json doc;
    doc["schema_version"] = report_schema_version;
    doc["command"] = "variance";
    doc["index"] = o.index;
    doc["model"] = o.model_spec;
    doc["gamma1"] = rep.gamma1;
    doc["gamma2"] = rep.gamma2;
    doc["gamma3"] = rep.gamma3;
    doc["total"] = rep.total;
    json flags;
    flags["h_square"] = rep.flags.h_square;
    flags["q_square"] = rep.flags.q_square;
    flags["h_square_q_square"] = rep.flags.h_square_q_square;
    doc["moment_flags"] = std::move(flags);
    return doc;
}

struct simulate_options {
    std::string index;
    std::string model_spec;
    std::string h_text;
    std::string g_name = "identity";
    std::string hist_path;
    std::size_t n = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    unsigned nodes = 256;
};

inline json run_simulate(const simulate_options& o) {
    experiment_config cfg;
    cfg.n = o.n;
    cfg.reps = o.reps;
    cfg.seed = o.seed;
    cfg.quad = clidetail::rule_for(o.nodes);

    if (o.index == "gini") {
        cfg.index = gini_experiment{clidetail::univariate_model(o.model_spec)};
    } else if (o.index == "correlation") {
        cfg.index = correlation_experiment{clidetail::binormal_rho(o.model_spec)};
    } else if (o.index == "custom") {
        distribution_model m = clidetail::univariate_model(o.model_spec);
        smooth_index idx = clidetail::build_custom_index(o.h_text, o.g_name, m);
        custom_experiment cu;
        cu.rep = idx.gar(m, cfg.quad);
        cu.estimator = [idx](const sample& s) { return idx.estimate(s); };
        cu.model = std::move(m);
        cfg.index = std::move(cu);
    } else {
        throw config_error("unknown index '" + o.index + "'");
    }

    monte_carlo_report r = run_experiment(cfg);

    if (!o.hist_path.empty()) {
        std::ofstream hist(o.hist_path);
        if (!hist) {
            throw config_error("cannot open histogram file '" + o.hist_path + "'");
        }
        hist << "standardized\n";
        char buf[40];
        for (double v : r.standardized) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            hist << buf << "\n";
        }
    }

    json doc;
    doc["schema_version"] = report_schema_version;
    doc["command"] = "simulate";
    doc["index"] = o.index;
    doc["model"] = o.model_spec;
    doc["n"] = r.n;
    doc["reps"] = r.reps;
    doc["failures"] = r.failures;
    doc["center"] = r.center;
    doc["predicted_var"] = r.predicted_var;
    doc["empirical_mean"] = r.empirical_mean;
    doc["empirical_var"] = r.empirical_var;
    doc["var_ratio"] = r.var_ratio;
    doc["ks_statistic"] = r.ks_statistic;
    doc["ci_coverage"] = r.ci_coverage;
    if (!o.hist_path.empty()) {
        doc["hist_file"] = o.hist_path;
    }
    return doc;
}

struct diagnose_options {
    std::string q_text;
    std::string model_spec;
    std::vector<std::size_t> ngrid;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    bool bahadur = false;
    unsigned nodes = 256;
};

inline json run_diagnose(const diagnose_options& o) {
    distribution_model m = clidetail::univariate_model(o.model_spec);
    expr ast = parse(o.q_text);
    weight_function q{[ast, m](double x) { return evaluate(ast, x, &m); }, o.q_text};
    quadrature_rule quad = clidetail::rule_for(o.nodes);

    gar_rep rep;
    rep.constant = 0.0;
    rep.fep_term = influence_function::zero();
    rep.residual =
        residual_weight{[q, m](double s) { return q(m.quantile(s)); }, q, o.q_text};

    auto gaps = representation_gap(rep, m, o.ngrid, o.reps, o.seed, quad);
    auto diag = residual_condition_diagnostic(q, m, o.ngrid, o.reps, o.seed, quad);

    json doc;
    doc["schema_version"] = report_schema_version;
    doc["command"] = "diagnose";
    doc["q"] = o.q_text;
    doc["model"] = o.model_spec;
    doc["ngrid"] = o.ngrid;
    doc["reps"] = o.reps;
    doc["representation_gap"] = clidetail::gap_rows_json(gaps);
    json conditions = json::array();
    for (const auto& r : diag.rows) {
        json row;
        row["n"] = r.n;
        row["integral_stat"] = r.integral_stat;
        row["weighted_stat"] = r.weighted_stat;
        row["mean_stat"] = r.mean_stat;
        conditions.push_back(std::move(row));
    }
    doc["residual_conditions"] = std::move(conditions);
    doc["tail_warning"] = diag.tail_warning;
    if (!diag.warning.empty()) {
        doc["warning"] = diag.warning;
    }
    if (o.bahadur) {
        doc["bahadur_gap"] =
            clidetail::gap_rows_json(bahadur_gap_medians(o.ngrid, o.reps, o.seed));
    }
    return doc;
}

namespace clidetail {

inline void emit(const json& doc, const std::string& output_path, std::ostream& out) {
    if (output_path.empty()) {
        out << doc.dump(2) << "\n";
        return;
    }
    std::ofstream f(output_path);
    if (!f) {
        throw config_error("cannot open output file '" + output_path + "'");
    }
    f << doc.dump(2) << "\n";
}

inline int emit_error(int code, const std::string& type, const std::string& message,
                      const json& manifest, std::ostream& out) {
    json doc;
    doc["schema_version"] = report_schema_version;
    json e;
    e["type"] = type;
    e["message"] = message;
    doc["error"] = std::move(e);
    doc["manifest"] = manifest;
    out << doc.dump(2) << "\n";
    return code;
}

} // namespace clidetail

// Front end: four subcommands, one JSON document per invocation.  Reports go
// to --output or stdout; error documents always go to stdout with exit code
// 2 (config), 3 (degenerate data), or 4 (numerical failure).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Asymptotic analysis of statistical indexes: estimation, variance "
                 "decomposition, simulation, and residual diagnostics",
                 "garkit"};
    app.set_help_flag("--help", "print help and exit");
    app.set_version_flag("--version", std::string(version_string));
    app.require_subcommand(1);
    app.fallthrough();

    std::string output_path;
    app.add_option("--output", output_path, "write the JSON report to FILE instead of stdout");

    estimate_options eo;
    auto* est = app.add_subcommand("estimate", "point estimate of an index from CSV data");
    est->set_help_flag("--help", "print help and exit");
    est->add_option("--index", eo.index, "index to estimate")
        ->required()
        ->check(CLI::IsMember({"gini", "correlation", "custom"}));
    est->add_option("--input", eo.input, "CSV file (one column; two for correlation)")
        ->required();
    est->add_option("--h", eo.h_text, "influence expression for the custom index");
    est->add_option("--g", eo.g_name, "transform applied to the mean of h")
        ->check(CLI::IsMember({"identity", "sqrt", "square", "log"}))
        ->capture_default_str();
    est->add_option("--ci", eo.ci_level, "confidence level")->capture_default_str();
    est->add_option("--model", eo.model_spec,
                    "model spec name:p1,p2 enabling a model-based confidence interval");
    est->add_flag("--allow-negative", eo.allow_negative,
                  "accept negative observations in the gini estimator");

    variance_options vo;
    auto* var = app.add_subcommand("variance",
                                   "asymptotic variance decomposition under a model");
    var->set_help_flag("--help", "print help and exit");
    var->add_option("--index", vo.index, "index to analyze")
        ->required()
        ->check(CLI::IsMember({"gini", "correlation", "custom"}));
    var->add_option("--model", vo.model_spec, "model spec name:p1,p2")->required();
    var->add_option("--h", vo.h_text, "influence expression for the custom index");
    var->add_option("--g", vo.g_name, "transform applied to the mean of h")
        ->check(CLI::IsMember({"identity", "sqrt", "square", "log"}))
        ->capture_default_str();
    var->add_option("--nodes", vo.nodes, "quadrature nodes")->capture_default_str();

    simulate_options so;
    auto* sim = app.add_subcommand("simulate", "seeded Monte Carlo check of the normal limit");
    sim->set_help_flag("--help", "print help and exit");
    sim->add_option("--index", so.index, "index to simulate")
        ->required()
        ->check(CLI::IsMember({"gini", "correlation", "custom"}));
    sim->add_option("--model", so.model_spec, "model spec name:p1,p2")->required();
    sim->add_option("--h", so.h_text, "influence expression for the custom index");
    sim->add_option("--g", so.g_name, "transform applied to the mean of h")
        ->check(CLI::IsMember({"identity", "sqrt", "square", "log"}))
        ->capture_default_str();
    sim->add_option("--n", so.n, "sample size per replicate")->required();
    sim->add_option("--reps", so.reps, "number of replicates")->required();
    sim->add_option("--seed", so.seed, "master seed")->required();
    sim->add_option("--nodes", so.nodes, "quadrature nodes")->capture_default_str();
    sim->add_option("--hist", so.hist_path, "CSV dump of the standardized values");

    diagnose_options dgo;
    auto* dia = app.add_subcommand("diagnose",
                                   "residual representation and condition diagnostics");
    dia->set_help_flag("--help", "print help and exit");
    dia->add_option("--q", dgo.q_text, "weight expression q(x)")->required();
    dia->add_option("--model", dgo.model_spec, "model spec name:p1,p2")->required();
    dia->add_option("--ngrid", dgo.ngrid, "comma-separated sample sizes")
        ->required()
        ->delimiter(',');
    dia->add_option("--reps", dgo.reps, "replicates per size")->required();
    dia->add_option("--seed", dgo.seed, "master seed")->required();
    dia->add_flag("--bahadur", dgo.bahadur, "also report raw empirical-quantile gap medians");
    dia->add_option("--nodes", dgo.nodes, "quadrature nodes")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    std::optional<std::uint64_t> seed;
    if (sub == sim) {
        seed = so.seed;
    } else if (sub == dia) {
        seed = dgo.seed;
    }
    json manifest = make_manifest(command, args, seed);

    try {
        json doc;
        if (sub == est) {
            doc = run_estimate(eo);
        } else if (sub == var) {
            doc = run_variance(vo);
        } else if (sub == sim) {
            doc = run_simulate(so);
        } else {
            doc = run_diagnose(dgo);
        }
        doc["manifest"] = std::move(manifest);
        clidetail::emit(doc, output_path, out);
        return 0;
    } catch (const config_error& e) {
        return clidetail::emit_error(2, "config", e.what(), manifest, out);
    } catch (const degenerate_error& e) {
        return clidetail::emit_error(3, "degenerate", e.what(), manifest, out);
    } catch (const error& e) {
        return clidetail::emit_error(4, "numeric", e.what(), manifest, out);
    } catch (const std::exception& e) {
        return clidetail::emit_error(4, "internal", e.what(), manifest, out);
    }
}

} // namespace garkit::cli
