#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparsevar/design.hpp"
#include "sparsevar/error.hpp"
#include "sparsevar/lasso.hpp"
#include "sparsevar/varmodel.hpp"

namespace sparsevar {

/// Nodewise residuals and their de-biasing denominators, one per design column.
struct NodewiseSet {
    MatrixXd coef;   // pd x pd; column k = beta-hat for column k, zero at row k
    MatrixXd z;      // (n-d) x pd; column k = Z-hat_k = X_k - X_{-k} beta-hat_k
    VectorXd denom;  // Z-hat_k^T X_k
    int unconverged = 0;
};

struct DesparsifiedFit {
    LagMatrices a_de;
    LagMatrices a_init;
    LagMatrices se_hat;
    MatrixXd z_hats;           // (n-d) x pd
    VectorXd denom;            // pd
    MatrixXd nodewise_coef;    // pd x pd
    VectorXd residual_norm2;   // ||X_j - X alpha_j^init||^2 per equation
    Index n = 0;
    int d = 0;
    Index p = 0;

    /// sqrt(n) (a_de - truth) / se_hat, entrywise.
    LagMatrices studentized(const LagMatrices& truth) const {
        LagMatrices out(a_de.size());
        const double rn = std::sqrt(static_cast<double>(n));
        for (std::size_t s = 0; s < a_de.size(); ++s)
            out[s] = (rn * (a_de[s] - truth[s]).array() / se_hat[s].array()).matrix();
        return out;
    }
};

/// Z-hat = L^s X_j - X_{L^s,-j} beta_hat, beta_hat of length pd-1.
inline VectorXd residual_z(const LaggedDesign& design, ColumnIndex idx, const VectorXd& beta_hat) {
    design.check(idx);
    const Index q = design.width();
    if (beta_hat.size() != q - 1) throw SizeError("nodewise coefficient must have length pd-1");
    const Index k = idx.flat(design.p);
    VectorXd z = design.x.col(k);
    z.noalias() -= design.x.leftCols(k) * beta_hat.head(k);
    z.noalias() -= design.x.rightCols(q - 1 - k) * beta_hat.tail(q - 1 - k);
    return z;
}

namespace detail {

inline void check_denominator(const LaggedDesign& design, Index k, double denom) {
    const double energy = design.x.col(k).squaredNorm();
    if (!(std::abs(denom) >= 1e-12 * energy) || energy == 0.0) {
        const auto idx = ColumnIndex::from_flat(k, design.p);
        throw DegenerateDenominatorError(idx.lag, idx.var,
                                         "degenerate de-biasing denominator for variable " +
                                             std::to_string(idx.var + 1) + " at lag " + std::to_string(idx.lag + 1));
    }
}

} // namespace detail

/// Nodewise lasso for every column, computed once and shared by all equations.
inline NodewiseSet nodewise_all(const LaggedDesign& design, const GramCache& gram, const LassoConfig& cfg) {
    const Index q = design.width();
    NodewiseSet out;
    out.coef = MatrixXd::Zero(q, q);
    for (Index k = 0; k < q; ++k) {
        LassoFit f = fit_nodewise_full(gram.xtx, k, cfg);
        if (!f.converged) ++out.unconverged;
        out.coef.col(k) = f.coef;
    }
    out.z.noalias() = design.x * (MatrixXd::Identity(q, q) - out.coef);
    out.denom = out.z.cwiseProduct(design.x).colwise().sum().transpose();
    for (Index k = 0; k < q; ++k) detail::check_denominator(design, k, out.denom(k));
    return out;
}

/// Plug-in standard errors:
///   se(j, r, s)^2 = ||X_j - X alpha_j^init||^2 * (Z^T Z) / (Z^T L^s X_r)^2.
/// The sqrt(n) of the studentized statistic is applied by callers.
inline LagMatrices se_hat(const LaggedDesign& design, const DesparsifiedFit& fit, const LagMatrices& a_init) {
    const Index q = design.width();
    if (fit.z_hats.cols() != q || fit.denom.size() != q) throw SizeError("fit is missing nodewise caches");
    for (Index k = 0; k < q; ++k) detail::check_denominator(design, k, fit.denom(k));
    const MatrixXd alpha = stack_coefficients(a_init);
    const VectorXd rss = (design.responses - design.x * alpha).colwise().squaredNorm().transpose();
    const VectorXd zz = fit.z_hats.colwise().squaredNorm().transpose();
    // Stacked pd x p: entry (k, j) for equation j and column k.
    MatrixXd se2 = zz.cwiseQuotient(fit.denom.cwiseAbs2()) * rss.transpose();
    return unstack_coefficients(se2.cwiseSqrt(), design.d);
}

/// De-sparsified estimator for every (j, r, s):
///   a_de = a_init + (Z_k^T X_k)^{-1} Z_k^T (X_j - X alpha_j^init).
inline DesparsifiedFit desparsify_all(const LaggedDesign& design, const NodewiseSet& nodewise, const LagMatrices& a_init) {
    if (static_cast<int>(a_init.size()) != design.d) throw SizeError("initial estimate must have d matrices");
    const MatrixXd alpha = stack_coefficients(a_init);
    if (alpha.cols() != design.p) throw SizeError("initial estimate has wrong dimension");
    const MatrixXd resid = design.responses - design.x * alpha;
    MatrixXd correction = nodewise.z.transpose() * resid;  // pd x p
    correction = nodewise.denom.cwiseInverse().asDiagonal() * correction;

    DesparsifiedFit fit;
    fit.n = design.n;
    fit.d = design.d;
    fit.p = design.p;
    fit.a_init = a_init;
    fit.a_de = unstack_coefficients(alpha + correction, design.d);
    fit.z_hats = nodewise.z;
    fit.denom = nodewise.denom;
    fit.nodewise_coef = nodewise.coef;
    fit.residual_norm2 = resid.colwise().squaredNorm().transpose();
    fit.se_hat = se_hat(design, fit, a_init);
    return fit;
}

inline DesparsifiedFit desparsify_all(const LaggedDesign& design, const LagMatrices& a_init, const LassoConfig& nodewise_cfg) {
    const GramCache gram = GramCache::from(design);
    return desparsify_all(design, nodewise_all(design, gram, nodewise_cfg), a_init);
}

/// Tuning of the full estimation pipeline (row lasso + nodewise lasso + de-biasing).
struct EstimatorConfig {
    double lambda = 0.1;                     // row regressions
    std::optional<double> lambda_nodewise;   // defaults to lambda
    int max_iter = 10000;
    double tol = 1e-8;
    bool standardize = false;

    LassoConfig row_config() const { return {lambda, max_iter, tol, std::nullopt, standardize, false}; }
    LassoConfig nodewise_config() const {
        return {lambda_nodewise.value_or(lambda), max_iter, tol, std::nullopt, standardize, false};
    }
};

/// Row-wise lasso initial estimate; `frozen[j]` (optional) pins coordinates of equation j at zero.
inline LagMatrices lasso_init(const LaggedDesign& design, const GramCache& gram, const EstimatorConfig& cfg,
                              const std::vector<FrozenMask>& frozen = {}) {
    const LassoConfig row_cfg = cfg.row_config();
    MatrixXd alpha(design.width(), design.p);
    for (Index j = 0; j < design.p; ++j) {
        const FrozenMask& mask = frozen.empty() ? FrozenMask{} : frozen[static_cast<std::size_t>(j)];
        alpha.col(j) = fit_row(gram, j, row_cfg, mask).coef;
    }
    return unstack_coefficients(alpha, design.d);
}

/// Lasso initial estimate followed by de-biasing of every coefficient.
inline DesparsifiedFit estimate(const LaggedDesign& design, const EstimatorConfig& cfg) {
    const GramCache gram = GramCache::from(design);
    const NodewiseSet nodewise = nodewise_all(design, gram, cfg.nodewise_config());
    return desparsify_all(design, nodewise, lasso_init(design, gram, cfg));
}

/// Population quantities behind the asymptotic standard errors.
struct AsymptoticSe {
    LagMatrices se;
    MatrixXd beta_dagger;  // pd x pd; column k has 1 at row k and -beta_k elsewhere
    VectorXd scale;        // Cov(L^s X_r, lagged vector) beta-dagger_k, per column k
    MatrixXd stacked_cov;  // Cov(X_{t-i1}, X_{t-i2}), i1, i2 = 1..d
    MatrixXd sigma_eps;
    std::vector<std::string> warnings;
};

inline AsymptoticSe asymptotic_se(const VarModel& model) {
    if (!is_stable(model)) throw UnstableModelError("asymptotic standard errors need a stable model");
    const AutocovSet ac = population_autocov(model, 0);
    const Index q = ac.stacked.rows();
    AsymptoticSe out;
    out.stacked_cov = ac.stacked;
    out.sigma_eps = model.sigma_eps();
    out.beta_dagger = MatrixXd::Zero(q, q);
    out.scale.resize(q);
    const MatrixXd& g = ac.stacked;
    for (Index k = 0; k < q; ++k) {
        std::vector<Index> rest;
        for (Index i = 0; i < q; ++i)
            if (i != k) rest.push_back(i);
        VectorXd dagger = VectorXd::Zero(q);
        dagger(k) = 1.0;
        if (!rest.empty()) {
            const MatrixXd g_rest = g(rest, rest);
            const VectorXd g_cross = g(rest, k);
            Eigen::LDLT<MatrixXd> ldlt(g_rest);
            VectorXd beta;
            const double cond_floor = 1e-12 * std::max(1.0, g_rest.diagonal().maxCoeff());
            if (ldlt.info() == Eigen::Success && ldlt.vectorD().cwiseAbs().minCoeff() > cond_floor) {
                beta = ldlt.solve(g_cross);
            } else {
                beta = g_rest.completeOrthogonalDecomposition().pseudoInverse() * g_cross;
                out.warnings.push_back("singular nodewise covariance for column " + std::to_string(k + 1) +
                                       "; pseudo-inverse used");
            }
            for (std::size_t i = 0; i < rest.size(); ++i) dagger(rest[i]) = -beta(static_cast<Index>(i));
        }
        out.beta_dagger.col(k) = dagger;
        out.scale(k) = g.row(k).dot(dagger);
    }
    MatrixXd se(q, model.p());
    for (Index k = 0; k < q; ++k) {
        const VectorXd& b = out.beta_dagger.col(k);
        const double quad = b.dot(g * b);
        for (Index j = 0; j < model.p(); ++j) se(k, j) = std::sqrt(model.sigma_eps()(j, j) * quad) / out.scale(k);
    }
    out.se = unstack_coefficients(se, model.d());
    return out;
}

/// Limiting Cov(sqrt(n) a_de[i1], sqrt(n) a_de[i2]).
inline double asymptotic_cov(const AsymptoticSe& a, const CoefIndex& i1, const CoefIndex& i2) {
    const Index p = a.sigma_eps.rows();
    const Index k1 = i1.column().flat(p);
    const Index k2 = i2.column().flat(p);
    const Index q = a.beta_dagger.rows();
    if (k1 < 0 || k1 >= q || k2 < 0 || k2 >= q || i1.eq < 0 || i1.eq >= p || i2.eq < 0 || i2.eq >= p)
        throw ArgumentError("coefficient index out of range");
    const double num = a.sigma_eps(i1.eq, i2.eq) * a.beta_dagger.col(k1).dot(a.stacked_cov * a.beta_dagger.col(k2));
    return num / (a.scale(k1) * a.scale(k2));
}

inline double asymptotic_cov(const VarModel& model, const CoefIndex& i1, const CoefIndex& i2) {
    return asymptotic_cov(asymptotic_se(model), i1, i2);
}

} // namespace sparsevar
