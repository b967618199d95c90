#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sparsevar/bootstrap.hpp"
#include "sparsevar/desparsify.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/io.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/reference_models.hpp"
#include "sparsevar/replicate.hpp"
#include "sparsevar/report.hpp"
#include "sparsevar/testing.hpp"

// Command-line front end. Kept in a header so the test suite can drive it
// in-process; tools/sparsevar.cpp only forwards main() here.
namespace sparsevar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Tuning shared by fit, ci, test and replicate. Unset optionals fall back to
/// lambda (user data) or to the example's reference values (replicate).
struct RunConfig {
    int d = 1;
    double lambda = 0.1;
    std::optional<double> lambda_nodewise;
    std::optional<double> lambda_eps;
    std::optional<double> a_n;
    int B = 500;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int n_mc = 500;
    int workers = 1;
    Index burn_in = -1;
    bool center = false;
    std::string convention = "direct";

    EstimatorConfig estimator() const {
        EstimatorConfig e;
        e.lambda = lambda;
        e.lambda_nodewise = lambda_nodewise;
        return e;
    }
    double eps() const { return lambda_eps.value_or(lambda); }
    double threshold() const { return a_n.value_or(lambda); }
    CiConvention ci_convention() const {
        return convention == "reflected" ? CiConvention::Reflected : CiConvention::Direct;
    }
    void validate() const {
        if (d < 1) throw ArgumentError("--d must be >= 1");
        if (!(lambda >= 0.0)) throw ArgumentError("--lambda must be >= 0");
        if (lambda_nodewise && !(*lambda_nodewise >= 0.0)) throw ArgumentError("--lambda-nodewise must be >= 0");
        if (!(eps() >= 0.0)) throw ArgumentError("--lambda-eps must be >= 0");
        if (!(threshold() >= 0.0)) throw ArgumentError("--a-n must be >= 0");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("--alpha must lie in (0, 1)");
        if (n_mc < 1) throw ArgumentError("--mc must be >= 1");
    }
};

namespace detail {

inline void add_tuning(CLI::App* app, RunConfig& cfg) {
    app->add_option("--d", cfg.d, "VAR order")->check(CLI::PositiveNumber);
    app->add_option("--lambda", cfg.lambda, "lasso penalty for row and nodewise regressions");
    app->add_option("--lambda-nodewise", cfg.lambda_nodewise, "separate penalty for nodewise regressions");
    app->add_option("--lambda-eps", cfg.lambda_eps, "covariance threshold (default: lambda)");
    app->add_option("--a-n", cfg.a_n, "coefficient threshold for the bootstrap model (default: lambda)");
    app->add_option("--alpha", cfg.alpha, "significance level");
    app->add_option("--seed", cfg.seed, "master seed");
    app->add_option("--workers", cfg.workers, "worker threads (SPARSEVAR_THREADS overrides)");
    app->add_option("--burn-in", cfg.burn_in, "burn-in length for simulated series (default 50 d)");
    app->add_flag("--center", cfg.center, "subtract column means from the data");
}

inline std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t(io::detail::trim(item));
        if (t.empty()) continue;
        try {
            out.push_back(io::detail::parse_double(t, 1, 1));
        } catch (const ParseError&) {
            throw ArgumentError(std::string("invalid value '") + t + "' in " + what);
        }
    }
    if (out.empty()) throw ArgumentError(std::string("empty list for ") + what);
    return out;
}

/// "eq,var[,lag]" with 1-based indices.
inline CoefIndex parse_target(const std::string& text) {
    const auto v = parse_list(text, "--target");
    if (v.size() != 2 && v.size() != 3) throw ArgumentError("--target expects eq,var[,lag]");
    for (double x : v)
        if (x != static_cast<int>(x) || x < 1) throw ArgumentError("--target indices must be positive integers");
    return {static_cast<int>(v[0]) - 1, static_cast<int>(v[1]) - 1, v.size() == 3 ? static_cast<int>(v[2]) - 1 : 0};
}

inline TimeSeries load_series(const std::string& path, bool center) {
    TimeSeries ts = io::read_csv(path);
    return center ? ts.centered() : ts;
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            file_.open(path);
            if (!file_) throw ArgumentError("cannot open output file " + path);
            stream_ = &file_;
        }
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

inline void emit(std::ostream& out, const report::json& j) { out << j.dump() << '\n'; }

struct ExampleSetup {
    double lambda;
    double lambda_eps;
    std::vector<int> sizes;
};

inline ExampleSetup example_defaults(int example, const std::string& table) {
    if (example == 1) return {0.11, 0.11, table == "coverage" ? std::vector<int>{100} : std::vector<int>{50, 100}};
    return {0.14, 0.255, table == "coverage" ? std::vector<int>{200} : std::vector<int>{128, 200}};
}

inline std::vector<RejectionScenario> rejection_scenarios(int example) {
    std::vector<RejectionScenario> out;
    if (example == 1) {
        const double grid[][2] = {{0.0, 0.0}, {0.3, 0.0}, {0.7, 0.0}, {0.0, 0.25}, {0.0, 0.5}, {0.3, 0.25}};
        for (const auto& g : grid)
            out.push_back({g[0] == 0.0 && g[1] == 0.0 ? "H0" : "H1",
                           {{"delta_a", g[0]}, {"delta_c", g[1]}},
                           reference::example1_testing(g[0], g[1])});
        return out;
    }
    out.push_back({"H0", {{"delta", 0.0}}, reference::example2()});
    for (double delta : {0.3, 0.5, 0.7, 0.9}) out.push_back({"H1A", {{"delta", delta}}, reference::example2_single(delta)});
    for (double delta : {0.3, 0.5}) out.push_back({"H1B", {{"delta", delta}}, reference::example2_multiple(delta)});
    return out;
}

inline std::string seed_string(std::uint64_t s) { return std::to_string(s); }

} // namespace detail

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inference for sparse vector autoregressions: de-sparsified lasso, bootstrap intervals, max-type tests"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string output;

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate a series from a model file or a built-in example");
    std::string model_path;
    int example = 0;
    Index n = 100;
    double delta_a = 0.0, delta_c = 0.0, delta = 0.0;
    std::string alternative = "none";
    auto* sim_model = sim->add_option("--model", model_path, "model file with [A1]..[Ad] and [SIGMA] sections");
    auto* sim_example = sim->add_option("--example", example, "built-in model")->check(CLI::IsMember({1, 2}));
    sim_model->excludes(sim_example);
    sim->add_option("--n", n, "series length")->check(CLI::PositiveNumber);
    sim->add_option("--delta-a", delta_a, "example 1: coefficient A(6,1)");
    sim->add_option("--delta-c", delta_c, "example 1: innovation covariance (6,1)");
    sim->add_option("--alternative", alternative, "example 2: none, single or multiple")
        ->check(CLI::IsMember({"none", "single", "multiple"}));
    sim->add_option("--delta", delta, "example 2: size of the alternative coefficients");
    sim->add_option("--seed", cfg.seed, "seed");
    sim->add_option("--burn-in", cfg.burn_in, "burn-in length (default 50 d)");
    sim->add_option("-o,--output", output, "output CSV (default stdout)");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "de-sparsified lasso estimates and standard errors");
    std::string data_path;
    fit_cmd->add_option("--data", data_path, "series CSV")->required();
    detail::add_tuning(fit_cmd, cfg);
    fit_cmd->add_option("-o,--output", output, "output JSON lines (default stdout)");

    // ci
    auto* ci_cmd = app.add_subcommand("ci", "pointwise confidence intervals");
    std::vector<std::string> target_args;
    std::string method = "bootstrap";
    ci_cmd->add_option("--data", data_path, "series CSV")->required();
    detail::add_tuning(ci_cmd, cfg);
    ci_cmd->add_option("--B", cfg.B, "bootstrap replicates");
    ci_cmd->add_option("--target", target_args, "eq,var[,lag] (1-based, repeatable); default all");
    ci_cmd->add_option("--method", method, "bootstrap or asymptotic")->check(CLI::IsMember({"bootstrap", "asymptotic"}));
    ci_cmd->add_option("--convention", cfg.convention, "bootstrap interval convention: direct or reflected")
        ->check(CLI::IsMember({"direct", "reflected"}));
    ci_cmd->add_option("-o,--output", output, "output JSON lines (default stdout)");

    // test
    auto* test_cmd = app.add_subcommand("test", "bootstrap max-type test of a zero restriction");
    std::string group_path, lambda_grid;
    bool restricted_observed = false;
    cfg.B = 500;
    test_cmd->add_option("--data", data_path, "series CSV")->required();
    test_cmd->add_option("--group", group_path, "group file (A eq var [lag] / S i j)")->required();
    detail::add_tuning(test_cmd, cfg);
    test_cmd->add_option("--B", cfg.B, "bootstrap replicates");
    test_cmd->add_option("--lambda-grid", lambda_grid, "comma-separated penalties; emits one sweep record per value");
    test_cmd->add_flag("--restricted-observed", restricted_observed,
                       "compute the observed statistic from the null-restricted fit");
    test_cmd->add_option("-o,--output", output, "output JSON lines (default stdout)");

    // replicate
    auto* rep = app.add_subcommand("replicate", "Monte-Carlo coverage or rejection tables for a built-in example");
    std::string table = "rejection", sizes_arg, rows_arg;
    rep->add_option("--example", example, "built-in example")->required()->check(CLI::IsMember({1, 2}));
    rep->add_option("--table", table, "coverage or rejection")->check(CLI::IsMember({"coverage", "rejection"}));
    rep->add_option("--mc", cfg.n_mc, "Monte-Carlo trials");
    rep->add_option("--B", cfg.B, "bootstrap replicates per trial");
    rep->add_option("--n", sizes_arg, "comma-separated sample sizes (default: the example's reference sizes)");
    rep->add_option("--rows", rows_arg, "comma-separated hypothesis labels to keep (e.g. H0)");
    rep->add_option("--lambda", cfg.lambda, "lasso penalty (default: the example's)");
    rep->add_option("--lambda-eps", cfg.lambda_eps, "covariance threshold (default: the example's)");
    rep->add_option("--a-n", cfg.a_n, "coefficient threshold (default: lambda)");
    rep->add_option("--seed", cfg.seed, "master seed");
    rep->add_option("--workers", cfg.workers, "worker threads (SPARSEVAR_THREADS overrides)");
    rep->add_option("--burn-in", cfg.burn_in, "burn-in length (default 50 d)");
    rep->add_option("--convention", cfg.convention, "bootstrap interval convention")
        ->check(CLI::IsMember({"direct", "reflected"}));
    rep->add_option("-o,--output", output, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    cfg.workers = resolve_workers(cfg.workers);

    try {
        if (sim->parsed()) {
            if (model_path.empty() && example == 0) throw ArgumentError("simulate needs --model or --example");
            const VarModel model = [&] {
                if (!model_path.empty()) return io::read_model(model_path);
                if (example == 1)
                    return delta_a == 0.0 && delta_c == 0.0 ? reference::example1()
                                                            : reference::example1_testing(delta_a, delta_c);
                if (alternative == "single") return reference::example2_single(delta);
                if (alternative == "multiple") return reference::example2_multiple(delta);
                return reference::example2();
            }();
            if (!is_stable(model))
                throw UnstableModelError("model is not stable (companion spectral radius " +
                                         io::detail::format_double(spectral_radius(CompanionMatrix::from(model).mat)) + ")");
            if (n <= model.d()) throw ArgumentError("--n must exceed the VAR order");
            detail::Output o(output, out);
            io::write_csv(*o, simulate(model, n, cfg.seed, cfg.burn_in));
            return kExitOk;
        }

        if (fit_cmd->parsed()) {
            cfg.validate();
            const TimeSeries ts = detail::load_series(data_path, cfg.center);
            const DesparsifiedFit fit = estimate(build_design(ts, cfg.d), cfg.estimator());
            detail::Output o(output, out);
            for (const auto& c : all_targets(cfg.d, ts.p())) detail::emit(*o, report::estimate_record(fit, c));
            return kExitOk;
        }

        if (ci_cmd->parsed()) {
            cfg.validate();
            const TimeSeries ts = detail::load_series(data_path, cfg.center);
            std::vector<CoefIndex> targets;
            for (const auto& t : target_args) {
                if (t == "all") {
                    targets.clear();
                    break;
                }
                targets.push_back(detail::parse_target(t));
            }
            if (targets.empty()) targets = all_targets(cfg.d, ts.p());
            const LaggedDesign design = build_design(ts, cfg.d);
            const DesparsifiedFit fit = estimate(design, cfg.estimator());
            for (const auto& c : targets)
                if (c.eq >= fit.p || c.var >= fit.p || c.lag >= fit.d)
                    throw ArgumentError("--target (" + std::to_string(c.eq + 1) + "," + std::to_string(c.var + 1) + "," +
                                        std::to_string(c.lag + 1) + ") out of range");
            detail::Output o(output, out);
            if (method == "asymptotic") {
                for (const auto& c : targets)
                    detail::emit(*o, report::ci_record(asymptotic_interval(fit, c, cfg.alpha), method, 0, 0));
                return kExitOk;
            }
            const ThresholdedModel thr = make_thresholded_model(design, fit, cfg.threshold(), cfg.eps());
            BootstrapOptions opts;
            opts.workers = cfg.workers;
            opts.burn_in = cfg.burn_in;
            opts.convention = cfg.ci_convention();
            const BootstrapResult boot = run_bootstrap(fit, thr, targets, cfg.B, cfg.alpha, cfg.seed, cfg.estimator(), opts);
            for (const auto& w : boot.run.warnings) err << "warning: " << w << '\n';
            for (const auto& ci : boot.intervals)
                detail::emit(*o, report::ci_record(ci, method, cfg.B, boot.run.rejected));
            return kExitOk;
        }

        if (test_cmd->parsed()) {
            cfg.validate();
            const TimeSeries ts = detail::load_series(data_path, cfg.center);
            GroupSpec group = io::read_group(group_path);
            group.normalize(cfg.d, ts.p());
            const LaggedDesign design = build_design(ts, cfg.d);
            auto config_for = [&](double lambda) {
                TestConfig tc;
                RunConfig local = cfg;
                local.lambda = lambda;
                tc.estimator = local.estimator();
                tc.a_n = local.threshold();
                tc.lambda_eps = local.eps();
                tc.B = cfg.B;
                tc.alpha = cfg.alpha;
                tc.seed = cfg.seed;
                tc.workers = cfg.workers;
                tc.burn_in = cfg.burn_in;
                tc.restricted_observed = restricted_observed;
                return tc;
            };
            detail::Output o(output, out);
            if (!lambda_grid.empty()) {
                for (double lambda : detail::parse_list(lambda_grid, "--lambda-grid")) {
                    if (!(lambda >= 0.0)) throw ArgumentError("--lambda-grid values must be >= 0");
                    detail::emit(*o, report::sweep_record(lambda, bootstrap_test(design, group, config_for(lambda))));
                }
                return kExitOk;
            }
            const TestResult res = bootstrap_test(design, group, config_for(cfg.lambda));
            for (const auto& w : res.warnings) err << "warning: " << w << '\n';
            detail::emit(*o, report::test_record(res, group, cfg.alpha));
            return kExitOk;
        }

        if (rep->parsed()) {
            if (cfg.n_mc < 1) throw ArgumentError("--mc must be >= 1");
            const detail::ExampleSetup setup = detail::example_defaults(example, table);
            const bool lambda_given = rep->count("--lambda") > 0;
            if (!lambda_given) cfg.lambda = setup.lambda;
            if (!cfg.lambda_eps) cfg.lambda_eps = lambda_given ? cfg.lambda : setup.lambda_eps;
            cfg.validate();
            std::vector<int> sizes = setup.sizes;
            if (!sizes_arg.empty()) {
                sizes.clear();
                for (double v : detail::parse_list(sizes_arg, "--n")) {
                    if (v != static_cast<int>(v) || v < 4) throw ArgumentError("--n values must be integers >= 4");
                    sizes.push_back(static_cast<int>(v));
                }
            }
            Metadata meta{{"schema", "sparsevar-table/1"},
                          {"table", table},
                          {"example", std::to_string(example)},
                          {"n_mc", std::to_string(cfg.n_mc)},
                          {"B", std::to_string(cfg.B)},
                          {"lambda", io::detail::format_double(cfg.lambda)},
                          {"lambda_eps", io::detail::format_double(cfg.eps())},
                          {"a_n", io::detail::format_double(cfg.threshold())},
                          {"seed", detail::seed_string(cfg.seed)},
                          {"burn_in", std::to_string(cfg.burn_in < 0 ? default_burn_in(1) : cfg.burn_in)}};
            detail::Output o(output, out);
            if (table == "coverage") {
                if (cfg.B < 100) throw ArgumentError("--B must be >= 100");
                meta.emplace_back("convention", cfg.convention);
                std::string text;
                for (int size : sizes) {
                    CoverageConfig cc;
                    cc.n = size;
                    cc.estimator = cfg.estimator();
                    cc.a_n = cfg.threshold();
                    cc.lambda_eps = cfg.eps();
                    cc.B = cfg.B;
                    cc.n_mc = cfg.n_mc;
                    cc.seed = cfg.seed;
                    cc.workers = cfg.workers;
                    cc.burn_in = cfg.burn_in;
                    cc.convention = cfg.ci_convention();
                    const VarModel model = example == 1 ? reference::example1() : reference::example2();
                    Metadata m = meta;
                    m.emplace_back("n", std::to_string(size));
                    *o << render_coverage(coverage_study(model, cc), m);
                }
                return kExitOk;
            }
            if (cfg.B < 199) throw ArgumentError("--B must be >= 199 for the test");
            meta.emplace_back("alpha", "0.05,0.10");
            std::vector<std::string> keep;
            if (!rows_arg.empty()) {
                std::stringstream ss(rows_arg);
                std::string item;
                while (std::getline(ss, item, ',')) keep.emplace_back(io::detail::trim(item));
            }
            const GroupSpec group = example == 1 ? reference::example1_group() : reference::example2_group();
            std::vector<RejectionRow> rows;
            for (const auto& sc : detail::rejection_scenarios(example)) {
                if (!keep.empty() && std::find(keep.begin(), keep.end(), sc.label) == keep.end()) continue;
                for (int size : sizes) {
                    RejectionConfig rc;
                    rc.n = size;
                    rc.n_mc = cfg.n_mc;
                    rc.seed = cfg.seed;
                    rc.workers = cfg.workers;
                    rc.test.estimator = cfg.estimator();
                    rc.test.a_n = cfg.threshold();
                    rc.test.lambda_eps = cfg.eps();
                    rc.test.B = cfg.B;
                    rc.test.burn_in = cfg.burn_in;
                    rows.push_back({sc.label, sc.params, size, rejection_study(sc.model, group, rc)});
                }
            }
            if (rows.empty()) throw ArgumentError("--rows selected no scenario");
            *o << render_rejection(rows, meta);
            return kExitOk;
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SizeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidModelError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitUsage;
}

} // namespace sparsevar::cli
