#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sparsevar/design.hpp"
#include "sparsevar/error.hpp"

namespace sparsevar {

/// Lasso settings. The objective is
///
///     (1/m) ||y - X xi||_2^2 + 2 * lambda * ||xi||_1
///
/// with m the number of rows. Note the factor 2 on the penalty: many packages
/// use (1/2m)||.||^2 + lambda ||.||_1, whose lambda is half of ours at the same
/// solution. Values such as lambda = 0.11 carry over from the literature as is.
struct LassoConfig {
    double lambda = 0.0;
    int max_iter = 10000;       // full coordinate sweeps
    double tol = 1e-8;          // max coefficient change over a full sweep
    std::optional<VectorXd> warm_start;
    bool standardize = false;   // solve on unit-variance columns, report on original scale
    bool record_trace = false;  // keep the objective after every sweep

    void validate() const {
        if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("lasso lambda must be finite and >= 0");
        if (!(tol > 0.0)) throw ArgumentError("lasso tolerance must be positive");
        if (max_iter < 1) throw ArgumentError("lasso max_iter must be positive");
    }
};

struct LassoFit {
    VectorXd coef;
    int iterations = 0;     // full passes over all free coordinates
    int active_sweeps = 0;  // passes restricted to the current support
    bool converged = false;
    double objective = 0.0;
    std::vector<double> trace;
};

/// Coordinates excluded from the sweeps and pinned at zero. Empty means none.
using FrozenMask = std::vector<bool>;

namespace detail {

inline double soft_threshold(double z, double t) noexcept {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

inline double lasso_objective(const MatrixXd& gram, const VectorXd& cross, double yy, double lambda,
                              const VectorXd& xi) {
    return yy - 2.0 * cross.dot(xi) + xi.dot(gram * xi) + 2.0 * lambda * xi.lpNorm<1>();
}

/// Largest KKT violation given the gradient g = c - G xi = (1/m) X^T (y - X xi).
inline double kkt_violation(const MatrixXd& gram, const VectorXd& grad, const VectorXd& xi, double lambda,
                            const FrozenMask& frozen) {
    double worst = 0.0;
    for (Index k = 0; k < xi.size(); ++k) {
        if (!frozen.empty() && frozen[static_cast<std::size_t>(k)]) continue;
        if (gram(k, k) <= 0.0) continue;
        const double v = xi(k) != 0.0 ? std::abs(grad(k) - lambda * (xi(k) > 0 ? 1.0 : -1.0))
                                      : std::max(0.0, std::abs(grad(k)) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

/// Cyclic coordinate descent on the covariance form. `grad` tracks c - G xi.
inline LassoFit coordinate_descent(const MatrixXd& gram, const VectorXd& cross, double yy, const LassoConfig& cfg,
                                   const FrozenMask& frozen) {
    const Index q = gram.rows();
    const double lambda = cfg.lambda;
    auto is_free = [&](Index k) { return frozen.empty() || !frozen[static_cast<std::size_t>(k)]; };

    LassoFit fit;
    fit.coef = VectorXd::Zero(q);
    if (cfg.warm_start) {
        if (cfg.warm_start->size() != q) throw SizeError("warm start has wrong length");
        fit.coef = *cfg.warm_start;
        for (Index k = 0; k < q; ++k)
            if (!is_free(k) || gram(k, k) <= 0.0) fit.coef(k) = 0.0;
    }
    VectorXd& xi = fit.coef;
    VectorXd grad = cross - gram * xi;

    auto update = [&](Index k) {
        const double gkk = gram(k, k);
        if (gkk <= 0.0) return 0.0;  // zero column: coefficient stays 0
        const double old = xi(k);
        const double fresh = soft_threshold(grad(k) + gkk * old, lambda) / gkk;
        const double delta = fresh - old;
        if (delta != 0.0) {
            xi(k) = fresh;
            grad.noalias() -= gram.col(k) * delta;
        }
        return std::abs(delta);
    };
    auto record = [&] {
        if (cfg.record_trace) fit.trace.push_back(lasso_objective(gram, cross, yy, lambda, xi));
    };

    std::vector<Index> active;
    active.reserve(static_cast<std::size_t>(q));
    while (fit.iterations < cfg.max_iter) {
        // Full pass over every free coordinate.
        double max_change = 0.0;
        for (Index k = 0; k < q; ++k)
            if (is_free(k)) max_change = std::max(max_change, update(k));
        ++fit.iterations;
        record();
        if (max_change < cfg.tol) {
            grad = cross - gram * xi;
            // max_change == 0: nothing can move, remaining violation is rounding.
            if (max_change == 0.0 || kkt_violation(gram, grad, xi, lambda, frozen) <= cfg.tol) {
                fit.converged = true;
                break;
            }
            continue;
        }
        // Sweep the active set until it settles, then re-check with a full pass.
        // Only full passes count toward max_iter; each active phase has its own cap.
        active.clear();
        for (Index k = 0; k < q; ++k)
            if (xi(k) != 0.0) active.push_back(k);
        for (int sweep = 0; sweep < cfg.max_iter; ++sweep) {
            double change = 0.0;
            for (Index k : active) change = std::max(change, update(k));
            ++fit.active_sweeps;
            record();
            if (change < cfg.tol) break;
        }
    }
    fit.objective = lasso_objective(gram, cross, yy, lambda, xi);
    return fit;
}

} // namespace detail

/// Lasso from second moments: gram = X^T X / m, cross = X^T y / m, yy = y^T y / m.
inline LassoFit fit_gram(const MatrixXd& gram, const VectorXd& cross, double yy, const LassoConfig& cfg,
                         const FrozenMask& frozen = {}) {
    cfg.validate();
    const Index q = gram.rows();
    if (q < 1 || gram.cols() != q || cross.size() != q) throw SizeError("gram/cross shapes disagree");
    if (!frozen.empty() && static_cast<Index>(frozen.size()) != q) throw SizeError("frozen mask has wrong length");
    if (!cfg.standardize) return detail::coordinate_descent(gram, cross, yy, cfg, frozen);

    VectorXd scale = gram.diagonal().cwiseMax(0.0).cwiseSqrt();
    for (Index k = 0; k < q; ++k)
        if (scale(k) == 0.0) scale(k) = 1.0;
    const VectorXd inv = scale.cwiseInverse();
    const MatrixXd g = inv.asDiagonal() * gram * inv.asDiagonal();
    const VectorXd c = inv.cwiseProduct(cross);
    LassoConfig scaled = cfg;
    if (cfg.warm_start) scaled.warm_start = cfg.warm_start->cwiseProduct(scale);
    LassoFit fit = detail::coordinate_descent(g, c, yy, scaled, frozen);
    fit.coef = fit.coef.cwiseProduct(inv);
    fit.objective = detail::lasso_objective(gram, cross, yy, cfg.lambda, fit.coef);
    return fit;
}

/// Lasso of y on the columns of X.
inline LassoFit fit(const MatrixXd& x, const VectorXd& y, const LassoConfig& cfg, const FrozenMask& frozen = {}) {
    if (x.rows() < 1 || x.cols() < 1) throw SizeError("lasso needs at least one row and one column");
    if (y.size() != x.rows()) throw SizeError("response length does not match design rows");
    if (!x.allFinite() || !y.allFinite()) throw ArgumentError("lasso input has non-finite entries");
    const double inv_m = 1.0 / static_cast<double>(x.rows());
    const MatrixXd gram = (x.transpose() * x) * inv_m;
    const VectorXd cross = (x.transpose() * y) * inv_m;
    return fit_gram(gram, cross, y.squaredNorm() * inv_m, cfg, frozen);
}

/// Row regression: response j on the full lagged design. Coefficients in lag-major layout.
inline LassoFit fit_row(const GramCache& gram, Index j, const LassoConfig& cfg, const FrozenMask& frozen = {}) {
    if (j < 0 || j >= gram.xty.cols()) throw ArgumentError("response index out of range");
    return fit_gram(gram.xtx, gram.xty.col(j), gram.yty(j), cfg, frozen);
}

inline LassoFit fit_row(const LaggedDesign& design, Index j, const LassoConfig& cfg) {
    return fit_row(GramCache::from(design), j, cfg);
}

/// Nodewise regression of column k on all other columns. The returned
/// coefficient vector has full width pd with an exact zero at k.
inline LassoFit fit_nodewise_full(const MatrixXd& xtx, Index k, const LassoConfig& cfg) {
    const Index q = xtx.rows();
    if (k < 0 || k >= q) throw ArgumentError("nodewise column out of range");
    if (q == 1) {
        // Nothing to regress on: the residual is the column itself.
        LassoFit empty;
        empty.coef = VectorXd::Zero(1);
        empty.converged = true;
        empty.objective = xtx(0, 0);
        return empty;
    }
    FrozenMask frozen(static_cast<std::size_t>(q), false);
    frozen[static_cast<std::size_t>(k)] = true;
    LassoConfig full_cfg = cfg;
    if (cfg.warm_start) {
        if (cfg.warm_start->size() != q - 1) throw SizeError("nodewise warm start must have length pd-1");
        VectorXd w = VectorXd::Zero(q);
        w.head(k) = cfg.warm_start->head(k);
        w.tail(q - 1 - k) = cfg.warm_start->tail(q - 1 - k);
        full_cfg.warm_start = std::move(w);
    }
    return fit_gram(xtx, xtx.col(k), xtx(k, k), full_cfg, frozen);
}

/// Nodewise regression for design column idx; coefficient length pd-1, in
/// the order of drop_column's retained columns.
inline LassoFit fit_nodewise(const LaggedDesign& design, ColumnIndex idx, const LassoConfig& cfg) {
    design.check(idx);
    const Index k = idx.flat(design.p);
    const Index q = design.width();
    const MatrixXd xtx = (design.x.transpose() * design.x) / static_cast<double>(design.rows());
    LassoFit full = fit_nodewise_full(xtx, k, cfg);
    VectorXd reduced(q - 1);
    reduced.head(k) = full.coef.head(k);
    reduced.tail(q - 1 - k) = full.coef.tail(q - 1 - k);
    full.coef = std::move(reduced);
    return full;
}

} // namespace sparsevar
