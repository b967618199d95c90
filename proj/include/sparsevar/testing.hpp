#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sparsevar/bootstrap.hpp"
#include "sparsevar/design.hpp"
#include "sparsevar/desparsify.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/parallel.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar {

/// Off-diagonal innovation covariance entry (i, j), zero-based with i < j.
struct SigmaIndex {
    int i = 0;
    int j = 0;
    friend constexpr bool operator==(const SigmaIndex&, const SigmaIndex&) = default;
    friend constexpr auto operator<=>(const SigmaIndex&, const SigmaIndex&) = default;
};

/// Order of coefficients inside a group: by lag, then equation, then variable.
/// Ties in the max statistic go to the first element in this order, with
/// coefficients before covariance entries.
inline bool coefficient_order(const CoefIndex& a, const CoefIndex& b) {
    return std::tie(a.lag, a.eq, a.var) < std::tie(b.lag, b.eq, b.var);
}

/// Null hypothesis: all listed coefficients and covariance entries are zero.
struct GroupSpec {
    std::vector<CoefIndex> g_a;
    std::vector<SigmaIndex> g_sigma;

    std::size_t size() const noexcept { return g_a.size() + g_sigma.size(); }

    /// Checks ranges and duplicates, then sorts into canonical order.
    void normalize(int d, Index p) {
        if (g_a.empty() && g_sigma.empty()) throw ArgumentError("hypothesis group is empty");
        for (const auto& c : g_a)
            if (c.eq < 0 || c.eq >= p || c.var < 0 || c.var >= p || c.lag < 0 || c.lag >= d)
                throw ArgumentError("coefficient (" + std::to_string(c.eq + 1) + "," + std::to_string(c.var + 1) + "," +
                                    std::to_string(c.lag + 1) + ") out of range");
        for (const auto& s : g_sigma)
            if (s.i < 0 || s.j >= p || s.i >= s.j)
                throw ArgumentError("covariance entry (" + std::to_string(s.i + 1) + "," + std::to_string(s.j + 1) +
                                    ") must satisfy 1 <= i < j <= p");
        std::sort(g_a.begin(), g_a.end(), coefficient_order);
        std::sort(g_sigma.begin(), g_sigma.end());
        if (std::adjacent_find(g_a.begin(), g_a.end()) != g_a.end()) throw ArgumentError("duplicate coefficient in group");
        if (std::adjacent_find(g_sigma.begin(), g_sigma.end()) != g_sigma.end())
            throw ArgumentError("duplicate covariance entry in group");
    }

    std::vector<FrozenMask> frozen_masks(int d, Index p) const {
        std::vector<FrozenMask> masks(static_cast<std::size_t>(p), FrozenMask(static_cast<std::size_t>(p * d), false));
        for (const auto& c : g_a) masks[static_cast<std::size_t>(c.eq)][static_cast<std::size_t>(c.column().flat(p))] = true;
        return masks;
    }
};

/// Null-restricted estimate used to generate bootstrap series.
struct RestrictedFit {
    LagMatrices a_init;
    DesparsifiedFit fit;
    ThresholdedModel model;
};

/// Lasso with group coefficients frozen at zero, de-biasing, coefficient
/// thresholding, and a covariance estimate with the group entries forced to
/// zero before hard thresholding and PSD repair.
inline RestrictedFit restricted_fit(const LaggedDesign& design, const EstimatorConfig& cfg, const GroupSpec& group,
                                    double a_n, double lambda_eps) {
    const GramCache gram = GramCache::from(design);
    RestrictedFit out;
    out.a_init = lasso_init(design, gram, cfg, group.frozen_masks(design.d, design.p));
    out.fit = desparsify_all(design, nodewise_all(design, gram, cfg.nodewise_config()), out.a_init);
    ThresholdedModel& m = out.model;
    m.a_n = a_n;
    m.lambda_eps = lambda_eps;
    m.a_thr = threshold_model(out.a_init, out.fit.a_de, a_n);
    for (const auto& c : group.g_a) m.a_thr[static_cast<std::size_t>(c.lag)](c.eq, c.var) = 0.0;
    MatrixXd sigma = sigma_eps_hat(design, m.a_thr);
    for (const auto& s : group.g_sigma) sigma(s.i, s.j) = sigma(s.j, s.i) = 0.0;
    m.sigma_thr = threshold_sigma(sigma, lambda_eps);
    m.stable = is_stable(m.a_thr);
    return out;
}

/// Gaussian plug-in variance of sqrt(n) Sigma-hat_ij: Sigma_ij^2 + Sigma_ii Sigma_jj.
inline MatrixXd tau2_hat(const MatrixXd& sigma_hat) {
    if (sigma_hat.rows() != sigma_hat.cols()) throw SizeError("covariance must be square");
    if ((sigma_hat - sigma_hat.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, sigma_hat.cwiseAbs().maxCoeff()))
        throw ArgumentError("covariance is not symmetric");
    if (!(sigma_hat.diagonal().array() > 0.0).all()) throw ArgumentError("covariance has a non-positive diagonal entry");
    const VectorXd diag = sigma_hat.diagonal();
    return sigma_hat.cwiseAbs2() + diag * diag.transpose();
}

struct MaxStatistic {
    double value = 0.0;
    std::vector<double> per_target;  // g_a entries first, then g_sigma
    std::size_t argmax = 0;
};

/// T = max( sqrt(n)|a_de| / se over g_a, sqrt(n)|Sigma-hat_ij| / tau over g_sigma ).
/// `group` must be normalized.
inline MaxStatistic t_stat(const DesparsifiedFit& fit, const LagMatrices& se, const MatrixXd& sigma_hat,
                           const MatrixXd& tau2, const GroupSpec& group) {
    if (group.size() == 0) throw ArgumentError("hypothesis group is empty");
    const double rn = std::sqrt(static_cast<double>(fit.n));
    MaxStatistic out;
    out.per_target.reserve(group.size());
    for (const auto& c : group.g_a) {
        const double s = at(se, c);
        if (!(s > 0.0)) throw NumericError("non-positive standard error in test group");
        out.per_target.push_back(rn * std::abs(at(fit.a_de, c)) / s);
    }
    for (const auto& e : group.g_sigma) {
        const double t2 = tau2(e.i, e.j);
        if (!(t2 > 0.0)) throw NumericError("non-positive tau^2 in test group");
        out.per_target.push_back(rn * std::abs(sigma_hat(e.i, e.j)) / std::sqrt(t2));
    }
    out.argmax = 0;
    for (std::size_t i = 1; i < out.per_target.size(); ++i)
        if (out.per_target[i] > out.per_target[out.argmax]) out.argmax = i;
    out.value = out.per_target[out.argmax];
    return out;
}

/// Statistic on a dataset from the unrestricted pipeline: de-biased
/// coefficients, and covariance from residuals of the a_n-thresholded model.
inline MaxStatistic observed_statistic(const LaggedDesign& design, const EstimatorConfig& cfg, double a_n,
                                       const GroupSpec& group) {
    const DesparsifiedFit fit = estimate(design, cfg);
    const MatrixXd sigma = sigma_eps_hat(design, threshold_model(fit.a_init, fit.a_de, a_n));
    return t_stat(fit, fit.se_hat, sigma, tau2_hat(sigma), group);
}

struct TestConfig {
    EstimatorConfig estimator;
    double a_n = 0.1;
    double lambda_eps = 0.1;
    int B = 499;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int workers = 1;
    Index burn_in = -1;
    /// Compute the observed statistic from the null-restricted initial fit.
    bool restricted_observed = false;
};

struct TestResult {
    double t_obs = 0.0;
    double crit = 0.0;
    double p_value = 1.0;
    bool reject = false;
    std::vector<double> per_target;
    std::size_t argmax = 0;
    int B = 0;
    int rejected = 0;
    std::vector<double> t_star;  // sorted accepted bootstrap statistics
    std::vector<std::string> warnings;
};

/// Bootstrap max-type test of a zero restriction on `group`.
///
/// The observed statistic comes from the unrestricted pipeline (unless
/// restricted_observed); pseudo-series come from the null-restricted model and
/// each is pushed through the unrestricted pipeline.
inline TestResult bootstrap_test(const LaggedDesign& design, GroupSpec group, const TestConfig& cfg) {
    if (cfg.B < 199) throw ArgumentError("bootstrap test needs B >= 199");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
    group.normalize(design.d, design.p);

    const RestrictedFit restricted = restricted_fit(design, cfg.estimator, group, cfg.a_n, cfg.lambda_eps);
    if (!restricted.model.stable) throw UnstableModelError("null-restricted bootstrap model is unstable");

    MaxStatistic observed;
    if (cfg.restricted_observed) {
        const DesparsifiedFit& f = restricted.fit;
        const MatrixXd sigma = sigma_eps_hat(design, threshold_model(f.a_init, f.a_de, cfg.a_n));
        observed = t_stat(f, f.se_hat, sigma, tau2_hat(sigma), group);
    } else {
        observed = observed_statistic(design, cfg.estimator, cfg.a_n, group);
    }

    const MatrixXd factor = innovation_factor(restricted.model.sigma_thr);
    const int d = design.d;
    std::vector<double> stars(static_cast<std::size_t>(cfg.B), 0.0);
    std::vector<char> ok(static_cast<std::size_t>(cfg.B), 0);
    parallel_for(static_cast<std::size_t>(cfg.B), cfg.workers, [&](std::size_t b) {
        Rng rng = make_rng(stream_seed(cfg.seed, b));
        const TimeSeries series = simulate(restricted.model.a_thr, factor, design.n,
                                           cfg.burn_in < 0 ? default_burn_in(d) : cfg.burn_in, rng);
        try {
            stars[b] = observed_statistic(build_design(series, d), cfg.estimator, cfg.a_n, group).value;
            ok[b] = std::isfinite(stars[b]) ? 1 : 0;
        } catch (const DegenerateDenominatorError&) {
        } catch (const NumericError&) {
        } catch (const ArgumentError&) {
        }
    });

    TestResult res;
    res.B = cfg.B;
    res.t_obs = observed.value;
    res.per_target = observed.per_target;
    res.argmax = observed.argmax;
    for (int b = 0; b < cfg.B; ++b)
        if (ok[static_cast<std::size_t>(b)]) res.t_star.push_back(stars[static_cast<std::size_t>(b)]);
    res.rejected = cfg.B - static_cast<int>(res.t_star.size());
    if (res.t_star.empty()) throw NumericError("every bootstrap replicate was rejected");
    if (res.rejected > 0.05 * cfg.B)
        res.warnings.push_back(std::to_string(res.rejected) + " of " + std::to_string(cfg.B) +
                               " bootstrap replicates rejected");
    std::sort(res.t_star.begin(), res.t_star.end());
    res.crit = quantile_sorted(res.t_star, 1.0 - cfg.alpha);
    const auto exceed = static_cast<double>(res.t_star.end() - std::lower_bound(res.t_star.begin(), res.t_star.end(), res.t_obs));
    res.p_value = (1.0 + exceed) / (static_cast<double>(res.t_star.size()) + 1.0);
    res.reject = res.t_obs > res.crit;
    return res;
}

} // namespace sparsevar
