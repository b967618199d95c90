#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sparsevar/bootstrap.hpp"
#include "sparsevar/desparsify.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/rng.hpp"
#include "sparsevar/testing.hpp"
#include "sparsevar/varmodel.hpp"

// Monte-Carlo harness for the coverage and rejection-frequency studies.
// Trial t simulates its data from stream_seed(seed, t, 0) and bootstraps with
// master seed stream_seed(seed, t, 1), so every number is a function of the
// configuration only, never of the worker count.
namespace sparsevar {

struct CoverageConfig {
    int n = 100;
    EstimatorConfig estimator;
    double a_n = 0.11;
    double lambda_eps = 0.11;
    int B = 500;
    std::vector<double> levels{0.90, 0.95};
    int n_mc = 500;
    std::uint64_t seed = 20240101;
    int workers = 1;
    Index burn_in = -1;
    CiConvention convention = CiConvention::Direct;
};

/// Coverage frequencies per confidence level, laid out like the coefficients.
struct CoverageTable {
    std::vector<double> levels;
    std::vector<LagMatrices> bootstrap;   // one entry per level
    std::vector<LagMatrices> asymptotic;
    std::vector<LagMatrices> mean_width;  // bootstrap interval widths
    int trials = 0;
    int skipped = 0;  // unstable thresholded model or degenerate fit
    int replicates_rejected = 0;

    double mean_coverage(const std::vector<LagMatrices>& cov, std::size_t level) const {
        double sum = 0.0;
        Index count = 0;
        for (const auto& m : cov[level]) {
            sum += m.sum();
            count += m.size();
        }
        return sum / static_cast<double>(count);
    }
};

namespace detail {

struct CoverageTrial {
    bool used = false;
    int rejected = 0;
    std::vector<LagMatrices> boot_hit;
    std::vector<LagMatrices> asym_hit;
    std::vector<LagMatrices> width;
};

inline CoverageTrial coverage_trial(const VarModel& model, const CoverageConfig& cfg, std::size_t t) {
    CoverageTrial out;
    const int d = model.d();
    const Index p = model.p();
    const TimeSeries series = simulate(model, cfg.n, stream_seed(cfg.seed, t, 0), cfg.burn_in);
    const LaggedDesign design = build_design(series, d);
    DesparsifiedFit fit;
    ThresholdedModel thr;
    try {
        fit = estimate(design, cfg.estimator);
        thr = make_thresholded_model(design, fit, cfg.a_n, cfg.lambda_eps);
    } catch (const DegenerateDenominatorError&) {
        return out;
    }
    if (!thr.stable) return out;
    const auto targets = all_targets(d, p);
    BootstrapResult boot;
    try {
        BootstrapOptions opts;
        opts.workers = 1;
        opts.burn_in = cfg.burn_in;
        opts.convention = cfg.convention;
        boot = run_bootstrap(fit, thr, targets, cfg.B, 0.05, stream_seed(cfg.seed, t, 1), cfg.estimator, opts);
    } catch (const NumericError&) {
        return out;
    }
    out.used = true;
    out.rejected = boot.run.rejected;
    const MatrixXd& stats = boot.run.stats;
    std::vector<double> column(static_cast<std::size_t>(stats.rows()));
    for (double level : cfg.levels) {
        LagMatrices bh = zero_coefficients(d, p), ah = bh, w = bh;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            const auto& c = targets[k];
            for (Index i = 0; i < stats.rows(); ++i) column[static_cast<std::size_t>(i)] = stats(i, static_cast<Index>(k));
            std::sort(column.begin(), column.end());
            const double alpha = 1.0 - level;
            const ConfidenceInterval bi = bootstrap_interval(fit, c, column, alpha, cfg.convention);
            const ConfidenceInterval ai = asymptotic_interval(fit, c, alpha);
            const double truth = model.coeff(c.lag)(c.eq, c.var);
            const auto s = static_cast<std::size_t>(c.lag);
            bh[s](c.eq, c.var) = (bi.lower <= truth && truth <= bi.upper) ? 1.0 : 0.0;
            ah[s](c.eq, c.var) = (ai.lower <= truth && truth <= ai.upper) ? 1.0 : 0.0;
            w[s](c.eq, c.var) = bi.upper - bi.lower;
        }
        out.boot_hit.push_back(std::move(bh));
        out.asym_hit.push_back(std::move(ah));
        out.width.push_back(std::move(w));
    }
    return out;
}

} // namespace detail

/// Empirical coverage of bootstrap and asymptotic pointwise intervals for
/// every coefficient of `model`.
inline CoverageTable coverage_study(const VarModel& model, const CoverageConfig& cfg) {
    if (cfg.n_mc < 1) throw ArgumentError("need at least one Monte-Carlo trial");
    std::vector<detail::CoverageTrial> trials(static_cast<std::size_t>(cfg.n_mc));
    parallel_for(trials.size(), cfg.workers, [&](std::size_t t) { trials[t] = detail::coverage_trial(model, cfg, t); });

    CoverageTable table;
    table.levels = cfg.levels;
    const LagMatrices zero = zero_coefficients(model.d(), model.p());
    table.bootstrap.assign(cfg.levels.size(), zero);
    table.asymptotic.assign(cfg.levels.size(), zero);
    table.mean_width.assign(cfg.levels.size(), zero);
    // Summation in trial order keeps results bit-identical across worker counts.
    for (const auto& tr : trials) {
        if (!tr.used) {
            ++table.skipped;
            continue;
        }
        ++table.trials;
        table.replicates_rejected += tr.rejected;
        for (std::size_t l = 0; l < cfg.levels.size(); ++l)
            for (std::size_t s = 0; s < zero.size(); ++s) {
                table.bootstrap[l][s] += tr.boot_hit[l][s];
                table.asymptotic[l][s] += tr.asym_hit[l][s];
                table.mean_width[l][s] += tr.width[l][s];
            }
    }
    if (table.trials == 0) throw NumericError("no usable Monte-Carlo trial");
    const double inv = 1.0 / table.trials;
    for (std::size_t l = 0; l < cfg.levels.size(); ++l)
        for (std::size_t s = 0; s < zero.size(); ++s) {
            table.bootstrap[l][s] *= inv;
            table.asymptotic[l][s] *= inv;
            table.mean_width[l][s] *= inv;
        }
    return table;
}

struct RejectionConfig {
    int n = 100;
    TestConfig test;
    std::vector<double> alphas{0.05, 0.10};
    int n_mc = 500;
    std::uint64_t seed = 20240101;
    int workers = 1;
};

struct RejectionResult {
    std::vector<double> alphas;
    std::vector<double> rate;  // rejection frequency per alpha
    int trials = 0;
    int skipped = 0;
    std::vector<double> p_values;  // per used trial, in trial order
};

/// Rejection frequency of the bootstrap max test on data simulated from `model`.
inline RejectionResult rejection_study(const VarModel& model, const GroupSpec& group, const RejectionConfig& cfg) {
    if (cfg.n_mc < 1) throw ArgumentError("need at least one Monte-Carlo trial");
    struct Trial {
        bool used = false;
        std::vector<char> reject;
        double p_value = 1.0;
    };
    std::vector<Trial> trials(static_cast<std::size_t>(cfg.n_mc));
    parallel_for(trials.size(), cfg.workers, [&](std::size_t t) {
        const TimeSeries series = simulate(model, cfg.n, stream_seed(cfg.seed, t, 0), cfg.test.burn_in);
        TestConfig tc = cfg.test;
        tc.workers = 1;
        tc.seed = stream_seed(cfg.seed, t, 1);
        TestResult res;
        try {
            res = bootstrap_test(build_design(series, model.d()), group, tc);
        } catch (const UnstableModelError&) {
            return;
        } catch (const DegenerateDenominatorError&) {
            return;
        } catch (const NumericError&) {
            return;
        }
        Trial& tr = trials[t];
        tr.used = true;
        tr.p_value = res.p_value;
        for (double a : cfg.alphas) tr.reject.push_back(res.t_obs > quantile_sorted(res.t_star, 1.0 - a) ? 1 : 0);
    });
    RejectionResult out;
    out.alphas = cfg.alphas;
    out.rate.assign(cfg.alphas.size(), 0.0);
    for (const auto& tr : trials) {
        if (!tr.used) {
            ++out.skipped;
            continue;
        }
        ++out.trials;
        out.p_values.push_back(tr.p_value);
        for (std::size_t a = 0; a < cfg.alphas.size(); ++a) out.rate[a] += tr.reject[a];
    }
    if (out.trials == 0) throw NumericError("no usable Monte-Carlo trial");
    for (auto& r : out.rate) r /= out.trials;
    return out;
}

/// One row of a rejection table: a named scenario and its data-generating model.
struct RejectionScenario {
    std::string label;  // e.g. "H0", "H1A"
    std::vector<std::pair<std::string, double>> params;
    VarModel model;
};

namespace detail {

inline std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace detail

using Metadata = std::vector<std::pair<std::string, std::string>>;

inline std::string metadata_block(const Metadata& meta) {
    std::ostringstream os;
    for (const auto& [k, v] : meta) os << "# " << k << " = " << v << '\n';
    return os.str();
}

/// CSV rendering of a coverage table: one line per (level, equation) with the
/// asymptotic columns followed by the bootstrap columns.
inline std::string render_coverage(const CoverageTable& t, const Metadata& meta) {
    std::ostringstream os;
    os << metadata_block(meta);
    os << "# trials = " << t.trials << "\n# skipped = " << t.skipped << "\n# replicates_rejected = "
       << t.replicates_rejected << '\n';
    const auto d = t.bootstrap.front().size();
    const Index p = t.bootstrap.front().front().rows();
    os << "level,lag,row";
    for (Index r = 0; r < p; ++r) os << ",asym_" << r + 1;
    for (Index r = 0; r < p; ++r) os << ",boot_" << r + 1;
    os << '\n';
    for (std::size_t l = 0; l < t.levels.size(); ++l)
        for (std::size_t s = 0; s < d; ++s)
            for (Index j = 0; j < p; ++j) {
                os << detail::fixed(t.levels[l], 2) << ',' << s + 1 << ',' << j + 1;
                for (Index r = 0; r < p; ++r) os << ',' << detail::fixed(t.asymptotic[l][s](j, r));
                for (Index r = 0; r < p; ++r) os << ',' << detail::fixed(t.bootstrap[l][s](j, r));
                os << '\n';
            }
    return os.str();
}

/// CSV rendering of rejection frequencies, one line per (scenario, n).
struct RejectionRow {
    std::string label;
    std::vector<std::pair<std::string, double>> params;
    int n = 0;
    RejectionResult result;
};

inline std::string render_rejection(const std::vector<RejectionRow>& rows, const Metadata& meta) {
    std::ostringstream os;
    os << metadata_block(meta);
    if (rows.empty()) return os.str();
    os << "hypothesis";
    for (const auto& [k, v] : rows.front().params) os << ',' << k;
    os << ",n";
    for (double a : rows.front().result.alphas) os << ",alpha_" << detail::fixed(a, 2);
    os << ",trials,skipped\n";
    for (const auto& row : rows) {
        os << row.label;
        for (const auto& [k, v] : row.params) os << ',' << detail::fixed(v, 2);
        os << ',' << row.n;
        for (double r : row.result.rate) os << ',' << detail::fixed(r);
        os << ',' << row.result.trials << ',' << row.result.skipped << '\n';
    }
    return os.str();
}

} // namespace sparsevar
