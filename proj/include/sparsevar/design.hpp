#pragma once

#include <string>
#include <utility>

#include <Eigen/Dense>

#include "sparsevar/error.hpp"
#include "sparsevar/varmodel.hpp"

namespace sparsevar {

/// Column of the lagged design: variable `var` shifted back by `lag` + 1 steps.
/// Both fields are zero-based; flat = lag * p + var (lag-major, variable-minor).
struct ColumnIndex {
    int lag = 0;
    int var = 0;

    constexpr Index flat(Index p) const noexcept { return static_cast<Index>(lag) * p + var; }
    static constexpr ColumnIndex from_flat(Index flat, Index p) noexcept {
        return {static_cast<int>(flat / p), static_cast<int>(flat % p)};
    }
    friend constexpr bool operator==(ColumnIndex, ColumnIndex) = default;
};

/// Coefficient A^(lag+1)_{eq, var}: effect of variable `var` at lag lag+1 on equation `eq`.
struct CoefIndex {
    int eq = 0;
    int var = 0;
    int lag = 0;

    constexpr ColumnIndex column() const noexcept { return {lag, var}; }
    friend constexpr bool operator==(const CoefIndex&, const CoefIndex&) = default;
    friend constexpr auto operator<=>(const CoefIndex&, const CoefIndex&) = default;
};

/// Position of full-design column `full` once column `removed` is dropped.
/// Undefined for full == removed.
constexpr Index removal_map(Index full, Index removed) noexcept {
    return full < removed ? full : full - 1;
}

/// Lagged regression view of a series.
///  x:         (n-d) x pd, column lag*p + var holds X_{t-lag-1, var} for t = d+1..n
///  responses: (n-d) x p, column j holds X_{t, j} for t = d+1..n
struct LaggedDesign {
    MatrixXd x;
    MatrixXd responses;
    Index n = 0;
    int d = 0;
    Index p = 0;

    Index rows() const noexcept { return x.rows(); }
    Index width() const noexcept { return x.cols(); }
    auto column(ColumnIndex idx) const { return x.col(idx.flat(p)); }
    auto response(Index j) const { return responses.col(j); }

    void check(ColumnIndex idx) const {
        if (idx.lag < 0 || idx.lag >= d || idx.var < 0 || idx.var >= p)
            throw ArgumentError("column index (lag " + std::to_string(idx.lag + 1) + ", var " +
                                std::to_string(idx.var + 1) + ") out of range");
    }
};

inline LaggedDesign build_design(const MatrixXd& data, int d) {
    const Index n = data.rows();
    const Index p = data.cols();
    if (d < 1) throw ArgumentError("lag order must be positive");
    if (n <= d + 2) throw SizeError("series of length " + std::to_string(n) + " too short for lag order " + std::to_string(d));
    const Index m = n - d;
    LaggedDesign out;
    out.n = n;
    out.d = d;
    out.p = p;
    out.x.resize(m, p * d);
    for (int s = 1; s <= d; ++s) out.x.middleCols((s - 1) * p, p) = data.middleRows(d - s, m);
    out.responses = data.bottomRows(m);
    return out;
}

inline LaggedDesign build_design(const TimeSeries& ts, int d) {
    return build_design(ts.data(), d);
}

/// Nodewise regression problem: all columns but one, and the removed column as target.
struct NodewiseProblem {
    MatrixXd others;
    VectorXd target;
};

inline NodewiseProblem drop_column(const LaggedDesign& design, ColumnIndex idx) {
    design.check(idx);
    const Index k = idx.flat(design.p);
    const Index q = design.width();
    NodewiseProblem out;
    out.others.resize(design.rows(), q - 1);
    out.others.leftCols(k) = design.x.leftCols(k);
    out.others.rightCols(q - 1 - k) = design.x.rightCols(q - 1 - k);
    out.target = design.x.col(k);
    return out;
}

/// Inverse of drop_column: re-inserts `column` at flat position k.
inline MatrixXd insert_column(const MatrixXd& others, const VectorXd& column, Index k) {
    if (column.size() != others.rows()) throw SizeError("column length does not match matrix rows");
    if (k < 0 || k > others.cols()) throw ArgumentError("insert position out of range");
    MatrixXd out(others.rows(), others.cols() + 1);
    out.leftCols(k) = others.leftCols(k);
    out.col(k) = column;
    out.rightCols(others.cols() - k) = others.rightCols(others.cols() - k);
    return out;
}

/// Second-moment summaries of a design, shared by every lasso solved on it.
struct GramCache {
    MatrixXd xtx;  // X^T X / m
    MatrixXd xty;  // X^T Y / m, column j for response j
    VectorXd yty;  // diag(Y^T Y) / m

    static GramCache from(const LaggedDesign& design) {
        const double inv_m = 1.0 / static_cast<double>(design.rows());
        GramCache g;
        g.xtx.noalias() = design.x.transpose() * design.x;
        g.xtx *= inv_m;
        g.xty.noalias() = design.x.transpose() * design.responses;
        g.xty *= inv_m;
        g.yty = design.responses.colwise().squaredNorm().transpose() * inv_m;
        return g;
    }
};

/// Stacks lag matrices into the pd x p layout whose column j is
/// alpha_j = (A_j^(1), ..., A_j^(d))^T.
inline MatrixXd stack_coefficients(const LagMatrices& coeffs) {
    if (coeffs.empty()) throw SizeError("empty coefficient list");
    const Index p = coeffs.front().rows();
    MatrixXd alpha(p * static_cast<Index>(coeffs.size()), p);
    for (std::size_t s = 0; s < coeffs.size(); ++s) {
        if (coeffs[s].rows() != p || coeffs[s].cols() != p) throw SizeError("coefficient matrices must be p x p");
        alpha.middleRows(static_cast<Index>(s) * p, p) = coeffs[s].transpose();
    }
    return alpha;
}

inline LagMatrices unstack_coefficients(const MatrixXd& alpha, int d) {
    const Index p = alpha.cols();
    if (alpha.rows() != p * d) throw SizeError("stacked coefficients must be pd x p");
    LagMatrices out(static_cast<std::size_t>(d));
    for (int s = 0; s < d; ++s) out[static_cast<std::size_t>(s)] = alpha.middleRows(s * p, p).transpose();
    return out;
}

inline LagMatrices zero_coefficients(int d, Index p) {
    return LagMatrices(static_cast<std::size_t>(d), MatrixXd::Zero(p, p));
}

} // namespace sparsevar
