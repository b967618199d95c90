#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <Eigen/Dense>

#include "sparsevar/design.hpp"
#include "sparsevar/desparsify.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/rng.hpp"
#include "sparsevar/varmodel.hpp"

namespace sparsevar {

/// Sparse model used to generate bootstrap series.
struct ThresholdedModel {
    LagMatrices a_thr;
    MatrixXd sigma_thr;
    double a_n = 0.0;
    double lambda_eps = 0.0;
    bool stable = false;
};

/// Keeps the de-biased value where |a_init| >= a_n, zero elsewhere.
inline LagMatrices threshold_model(const LagMatrices& a_init, const LagMatrices& a_de, double a_n) {
    if (!(a_n >= 0.0)) throw ArgumentError("coefficient threshold a_n must be >= 0");
    if (a_init.size() != a_de.size()) throw SizeError("initial and de-biased estimates differ in lag order");
    LagMatrices out(a_init.size());
    for (std::size_t s = 0; s < a_init.size(); ++s) {
        if (a_init[s].rows() != a_de[s].rows() || a_init[s].cols() != a_de[s].cols())
            throw SizeError("initial and de-biased estimates differ in shape");
        out[s] = (a_init[s].array().abs() >= a_n).select(a_de[s], 0.0);
    }
    return out;
}

/// (1/(n-d)) sum_t e_t e_t^T with e_t = X_t - sum_s A^(s) X_{t-s}.
inline MatrixXd sigma_eps_hat(const LaggedDesign& design, const LagMatrices& a_thr) {
    if (static_cast<int>(a_thr.size()) != design.d) throw SizeError("coefficients must have d matrices");
    const MatrixXd resid = design.responses - design.x * stack_coefficients(a_thr);
    MatrixXd s = resid.transpose() * resid / static_cast<double>(design.rows());
    return 0.5 * (s + s.transpose());
}

/// Smallest eigenvalue enforced by threshold_sigma.
inline constexpr double kSigmaFloor = 1e-8;

/// Hard-thresholds off-diagonal entries below lambda_eps (the diagonal is kept),
/// then lifts the spectrum by (floor - lambda_min) I if lambda_min < floor.
inline MatrixXd threshold_sigma(const MatrixXd& sigma_hat, double lambda_eps) {
    if (sigma_hat.rows() != sigma_hat.cols()) throw SizeError("covariance must be square");
    if (!(lambda_eps >= 0.0)) throw ArgumentError("covariance threshold must be >= 0");
    const double asym = (sigma_hat - sigma_hat.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(1.0, sigma_hat.cwiseAbs().maxCoeff())) throw ArgumentError("covariance is not symmetric");
    MatrixXd out = sigma_hat;
    for (Index i = 0; i < out.rows(); ++i)
        for (Index j = 0; j < out.cols(); ++j)
            if (i != j && std::abs(out(i, j)) < lambda_eps) out(i, j) = 0.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(out, Eigen::EigenvaluesOnly);
    const double min_ev = eig.eigenvalues().minCoeff();
    if (min_ev < kSigmaFloor) out.diagonal().array() += kSigmaFloor - min_ev;
    // Exact symmetry; the input may carry rounding-level asymmetry.
    return (0.5 * (out + out.transpose())).eval();
}

/// Thresholded coefficient matrices and covariance built from a fitted dataset.
inline ThresholdedModel make_thresholded_model(const LaggedDesign& design, const DesparsifiedFit& fit, double a_n,
                                               double lambda_eps) {
    ThresholdedModel m;
    m.a_n = a_n;
    m.lambda_eps = lambda_eps;
    m.a_thr = threshold_model(fit.a_init, fit.a_de, a_n);
    m.sigma_thr = threshold_sigma(sigma_eps_hat(design, m.a_thr), lambda_eps);
    m.stable = is_stable(m.a_thr);
    return m;
}

/// Pseudo-series from the thresholded model. Never produces a series from an
/// unstable model.
inline TimeSeries generate(const ThresholdedModel& model, Index n, Rng& rng, Index burn_in = -1) {
    if (!model.stable || !is_stable(model.a_thr)) throw UnstableModelError("thresholded bootstrap model is unstable");
    const int d = static_cast<int>(model.a_thr.size());
    return simulate(model.a_thr, innovation_factor(model.sigma_thr), n, burn_in < 0 ? default_burn_in(d) : burn_in,
                    rng);
}

inline TimeSeries generate(const ThresholdedModel& model, Index n, std::uint64_t seed, Index burn_in = -1) {
    Rng rng = make_rng(seed);
    return generate(model, n, rng, burn_in);
}

/// Type-7 (linear interpolation) empirical quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
    if (sorted.empty()) throw ArgumentError("quantile of empty sample");
    if (!(prob >= 0.0 && prob <= 1.0)) throw ArgumentError("quantile probability must lie in [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> sample, double prob) {
    std::sort(sample.begin(), sample.end());
    return quantile_sorted(sample, prob);
}

inline double normal_quantile(double prob) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

/// How bootstrap quantiles enter the interval.
enum class CiConvention {
    /// [a_de + q(alpha/2) se/sqrt(n), a_de + q(1-alpha/2) se/sqrt(n)]
    Direct,
    /// Percentile-t: [a_de - q(1-alpha/2) se/sqrt(n), a_de - q(alpha/2) se/sqrt(n)]
    Reflected,
};

struct ConfidenceInterval {
    CoefIndex target;
    double estimate = 0.0;
    double se = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
};

struct BootstrapRun {
    int B = 0;
    std::vector<CoefIndex> targets;
    /// Accepted replicates x targets: sqrt(n) (a*_de - a_thr) / se*.
    MatrixXd stats;
    std::uint64_t seed = 0;
    int rejected = 0;
    std::vector<std::string> warnings;
};

struct BootstrapOptions {
    int workers = 1;
    Index burn_in = -1;
    CiConvention convention = CiConvention::Direct;
};

inline std::vector<CoefIndex> all_targets(int d, Index p) {
    std::vector<CoefIndex> out;
    for (int s = 0; s < d; ++s)
        for (int j = 0; j < p; ++j)
            for (int r = 0; r < p; ++r) out.push_back({j, r, s});
    return out;
}

inline double at(const LagMatrices& m, const CoefIndex& c) {
    return m[static_cast<std::size_t>(c.lag)](c.eq, c.var);
}

/// Confidence interval from sorted studentized bootstrap draws.
inline ConfidenceInterval bootstrap_interval(const DesparsifiedFit& fit, const CoefIndex& target,
                                             const std::vector<double>& sorted_draws, double alpha,
                                             CiConvention convention) {
    ConfidenceInterval ci;
    ci.target = target;
    ci.level = 1.0 - alpha;
    ci.estimate = at(fit.a_de, target);
    ci.se = at(fit.se_hat, target);
    const double scale = ci.se / std::sqrt(static_cast<double>(fit.n));
    const double q_lo = quantile_sorted(sorted_draws, alpha / 2.0);
    const double q_hi = quantile_sorted(sorted_draws, 1.0 - alpha / 2.0);
    if (convention == CiConvention::Direct) {
        ci.lower = ci.estimate + q_lo * scale;
        ci.upper = ci.estimate + q_hi * scale;
    } else {
        ci.lower = ci.estimate - q_hi * scale;
        ci.upper = ci.estimate - q_lo * scale;
    }
    return ci;
}

/// Interval from the limiting normal law: a_de -/+ z(1-alpha/2) se/sqrt(n).
inline ConfidenceInterval asymptotic_interval(const DesparsifiedFit& fit, const CoefIndex& target, double alpha) {
    ConfidenceInterval ci;
    ci.target = target;
    ci.level = 1.0 - alpha;
    ci.estimate = at(fit.a_de, target);
    ci.se = at(fit.se_hat, target);
    const double half = normal_quantile(1.0 - alpha / 2.0) * ci.se / std::sqrt(static_cast<double>(fit.n));
    ci.lower = ci.estimate - half;
    ci.upper = ci.estimate + half;
    return ci;
}

/// Re-runs the estimation pipeline on one pseudo-series. Returns false when the
/// replicate is numerically degenerate.
inline bool bootstrap_replicate(const ThresholdedModel& model, const MatrixXd& factor, Index n,
                                const EstimatorConfig& cfg, Index burn_in, Rng& rng, DesparsifiedFit& out) {
    const int d = static_cast<int>(model.a_thr.size());
    const TimeSeries series = simulate(model.a_thr, factor, n, burn_in < 0 ? default_burn_in(d) : burn_in, rng);
    try {
        out = estimate(build_design(series, d), cfg);
    } catch (const DegenerateDenominatorError&) {
        return false;
    }
    return true;
}

struct BootstrapResult {
    BootstrapRun run;
    std::vector<ConfidenceInterval> intervals;
};

/// Model-based bootstrap of the studentized de-sparsified estimator.
///
/// Replicate b draws its innovations from stream_seed(seed, b), so results do
/// not depend on the number of workers. Replicates whose pipeline degenerates
/// are counted in `rejected`; more than 5% attaches a warning.
inline BootstrapResult run_bootstrap(const DesparsifiedFit& fit, const ThresholdedModel& model,
                                     const std::vector<CoefIndex>& targets, int B, double alpha, std::uint64_t seed,
                                     const EstimatorConfig& cfg, const BootstrapOptions& opts = {}) {
    if (B < 100) throw ArgumentError("bootstrap needs B >= 100");
    if (targets.empty()) throw ArgumentError("no bootstrap targets");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    for (const auto& t : targets)
        if (t.eq < 0 || t.eq >= fit.p || t.var < 0 || t.var >= fit.p || t.lag < 0 || t.lag >= fit.d)
            throw ArgumentError("bootstrap target out of range");
    if (!model.stable || !is_stable(model.a_thr))
        throw UnstableModelError("thresholded bootstrap model is unstable; every replicate rejected");

    const MatrixXd factor = innovation_factor(model.sigma_thr);
    const auto n_targets = static_cast<Index>(targets.size());
    MatrixXd draws(B, n_targets);
    std::vector<char> ok(static_cast<std::size_t>(B), 0);
    const double rn = std::sqrt(static_cast<double>(fit.n));

    parallel_for(static_cast<std::size_t>(B), opts.workers, [&](std::size_t b) {
        Rng rng = make_rng(stream_seed(seed, b));
        DesparsifiedFit star;
        if (!bootstrap_replicate(model, factor, fit.n, cfg, opts.burn_in, rng, star)) return;
        bool finite = true;
        for (Index t = 0; t < n_targets; ++t) {
            const auto& c = targets[static_cast<std::size_t>(t)];
            const double v = rn * (at(star.a_de, c) - at(model.a_thr, c)) / at(star.se_hat, c);
            finite = finite && std::isfinite(v);
            draws(static_cast<Index>(b), t) = v;
        }
        ok[b] = finite ? 1 : 0;
    });

    BootstrapResult result;
    BootstrapRun& run = result.run;
    run.B = B;
    run.targets = targets;
    run.seed = seed;
    std::vector<Index> kept;
    for (int b = 0; b < B; ++b)
        if (ok[static_cast<std::size_t>(b)]) kept.push_back(b);
    run.rejected = B - static_cast<int>(kept.size());
    if (kept.empty()) throw NumericError("every bootstrap replicate was rejected");
    if (run.rejected > 0.05 * B)
        run.warnings.push_back(std::to_string(run.rejected) + " of " + std::to_string(B) +
                               " bootstrap replicates rejected");
    run.stats = draws(kept, Eigen::all);

    result.intervals.reserve(targets.size());
    std::vector<double> column(kept.size());
    for (Index t = 0; t < n_targets; ++t) {
        for (std::size_t i = 0; i < kept.size(); ++i) column[i] = run.stats(static_cast<Index>(i), t);
        std::sort(column.begin(), column.end());
        result.intervals.push_back(
            bootstrap_interval(fit, targets[static_cast<std::size_t>(t)], column, alpha, opts.convention));
    }
    return result;
}

} // namespace sparsevar
