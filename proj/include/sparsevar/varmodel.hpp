#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sparsevar/error.hpp"
#include "sparsevar/rng.hpp"

namespace sparsevar {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Lag-indexed list of p x p coefficient matrices; element s-1 holds A^(s).
using LagMatrices = std::vector<MatrixXd>;

namespace detail {

inline bool all_finite(const MatrixXd& m) {
    return m.allFinite();
}

inline void require_symmetric_psd(const MatrixXd& sigma, const char* name) {
    if (sigma.rows() != sigma.cols()) throw InvalidModelError(std::string(name) + " must be square");
    if (!sigma.allFinite()) throw InvalidModelError(std::string(name) + " has non-finite entries");
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidModelError(std::string(name) + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10)
        throw InvalidModelError(std::string(name) + " is not positive semidefinite");
}

} // namespace detail

/// Stationary Gaussian VAR(d): X_t = sum_s A^(s) X_{t-s} + eps_t, eps_t ~ N(0, Sigma).
class VarModel {
public:
    VarModel(LagMatrices coeffs, MatrixXd sigma_eps)
        : coeffs_(std::move(coeffs)), sigma_(std::move(sigma_eps)) {
        if (coeffs_.empty()) throw InvalidModelError("VAR model needs at least one lag");
        const Index p = sigma_.rows();
        if (p == 0) throw InvalidModelError("VAR model dimension must be positive");
        for (std::size_t s = 0; s < coeffs_.size(); ++s) {
            if (coeffs_[s].rows() != p || coeffs_[s].cols() != p)
                throw InvalidModelError("coefficient matrix A" + std::to_string(s + 1) + " must be " +
                                        std::to_string(p) + "x" + std::to_string(p));
            if (!detail::all_finite(coeffs_[s]))
                throw InvalidModelError("coefficient matrix A" + std::to_string(s + 1) + " has non-finite entries");
        }
        detail::require_symmetric_psd(sigma_, "innovation covariance");
    }

    int d() const noexcept { return static_cast<int>(coeffs_.size()); }
    int p() const noexcept { return static_cast<int>(sigma_.rows()); }
    const LagMatrices& coeffs() const noexcept { return coeffs_; }
    const MatrixXd& coeff(int lag) const { return coeffs_.at(static_cast<std::size_t>(lag)); }
    const MatrixXd& sigma_eps() const noexcept { return sigma_; }

private:
    LagMatrices coeffs_;
    MatrixXd sigma_;
};

/// dp x dp VAR(1) embedding: [A1 ... Ad] on top, shifted identity below.
struct CompanionMatrix {
    MatrixXd mat;

    static CompanionMatrix from(const LagMatrices& coeffs) {
        const auto d = static_cast<Index>(coeffs.size());
        const Index p = coeffs.front().rows();
        CompanionMatrix c{MatrixXd::Zero(d * p, d * p)};
        for (Index s = 0; s < d; ++s) c.mat.block(0, s * p, p, p) = coeffs[static_cast<std::size_t>(s)];
        if (d > 1) c.mat.block(p, 0, (d - 1) * p, (d - 1) * p).setIdentity();
        return c;
    }
    static CompanionMatrix from(const VarModel& model) { return from(model.coeffs()); }
};

/// n x p observations, row t is time t (oldest first).
class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(MatrixXd data) : data_(std::move(data)) {
        if (!data_.allFinite()) throw ArgumentError("time series contains non-finite values");
    }
    Index n() const noexcept { return data_.rows(); }
    Index p() const noexcept { return data_.cols(); }
    const MatrixXd& data() const noexcept { return data_; }

    /// Copy with column means removed (real-data mode).
    TimeSeries centered() const {
        MatrixXd c = data_.rowwise() - data_.colwise().mean();
        return TimeSeries(std::move(c));
    }

private:
    MatrixXd data_;
};

/// Gamma(h) = Cov(X_t, X_{t-h}) for h = 0..h_max, plus the dp x dp
/// covariance of the stacked vector (X_{t-1}, ..., X_{t-d}).
struct AutocovSet {
    std::vector<MatrixXd> gammas;
    MatrixXd stacked;

    const MatrixXd& at(int h) const { return gammas.at(static_cast<std::size_t>(h)); }
    /// Gamma(h) for any integer h, using Gamma(-h) = Gamma(h)^T.
    MatrixXd lag(int h) const { return h >= 0 ? at(h) : MatrixXd(at(-h).transpose()); }
};

inline double spectral_radius(const MatrixXd& m) {
    if (!m.allFinite()) throw InvalidModelError("matrix has non-finite entries");
    Eigen::EigenSolver<MatrixXd> es(m, false);
    if (es.info() != Eigen::Success) throw NumericError("eigenvalue computation failed");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool is_stable(const LagMatrices& coeffs, double margin = 1e-8) {
    for (const auto& a : coeffs)
        if (!a.allFinite()) throw InvalidModelError("coefficient matrix has non-finite entries");
    return spectral_radius(CompanionMatrix::from(coeffs).mat) < 1.0 - margin;
}

/// True iff det(I - sum_s A^(s) z^s) has no root in the closed unit disc,
/// checked as companion spectral radius < 1 - margin.
inline bool is_stable(const VarModel& model, double margin = 1e-8) {
    return is_stable(model.coeffs(), margin);
}

/// Factor F with F F^T = sigma. Cholesky when comfortably positive definite,
/// otherwise a symmetric eigen square root (singular PSD case).
inline MatrixXd innovation_factor(const MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sigma);
    const double min_ev = eig.eigenvalues().minCoeff();
    if (min_ev < -1e-10) throw InvalidModelError("innovation covariance is not positive semidefinite");
    if (min_ev > 1e-8) {
        Eigen::LLT<MatrixXd> llt(sigma);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    const VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

inline int default_burn_in(int d) { return 50 * d; }

/// Simulates with a caller-supplied generator and pre-computed innovation factor.
/// Start state is zero; the first burn_in rows are dropped.
inline TimeSeries simulate(const LagMatrices& coeffs, const MatrixXd& factor, Index n, Index burn_in, Rng& rng) {
    const auto d = static_cast<Index>(coeffs.size());
    const Index p = factor.rows();
    if (n <= d) throw SizeError("series length must exceed the lag order");
    if (burn_in < 0) throw ArgumentError("burn-in must be non-negative");
    const Index total = n + burn_in;
    // Column-major p x total so each time step is a contiguous column.
    MatrixXd path = MatrixXd::Zero(p, total);
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd z(p);
    for (Index t = 0; t < total; ++t) {
        for (Index i = 0; i < p; ++i) z(i) = normal(rng);
        auto x = path.col(t);
        x.noalias() = factor * z;
        for (Index s = 1; s <= d && s <= t; ++s) x.noalias() += coeffs[static_cast<std::size_t>(s - 1)] * path.col(t - s);
    }
    return TimeSeries(path.rightCols(n).transpose());
}

/// Simulates n observations after discarding burn_in rows. Deterministic in seed.
/// burn_in < 0 selects the default of 50 d.
inline TimeSeries simulate(const VarModel& model, Index n, std::uint64_t seed, Index burn_in = -1) {
    if (!is_stable(model)) throw UnstableModelError("cannot simulate an unstable VAR model");
    if (n <= model.d()) throw SizeError("series length must exceed the lag order");
    Rng rng = make_rng(seed);
    return simulate(model.coeffs(), innovation_factor(model.sigma_eps()), n,
                    burn_in < 0 ? default_burn_in(model.d()) : burn_in, rng);
}

/// Solves S = F S F^T + Q by doubling; stops when the added term is below
/// rel_tol relative to the accumulated sum.
inline MatrixXd solve_discrete_lyapunov(const MatrixXd& f, const MatrixXd& q, double rel_tol = 1e-12,
                                        int max_doublings = 200) {
    MatrixXd s = q;
    MatrixXd a = f;
    for (int k = 0; k < max_doublings; ++k) {
        MatrixXd term = a * s * a.transpose();
        s += term;
        const double scale = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
        if (term.cwiseAbs().maxCoeff() <= rel_tol * scale) return 0.5 * (s + s.transpose());
        a = a * a;
        if (!a.allFinite()) break;
    }
    throw NumericError("Lyapunov doubling did not converge");
}

/// Population autocovariances Gamma(0..h_max) of a stable VAR(d).
inline AutocovSet population_autocov(const VarModel& model, int h_max) {
    if (h_max < 0) throw ArgumentError("h_max must be non-negative");
    const CompanionMatrix comp = CompanionMatrix::from(model);
    if (spectral_radius(comp.mat) >= 1.0) throw UnstableModelError("no stationary solution: spectral radius >= 1");
    const Index p = model.p();
    const Index dp = comp.mat.rows();
    MatrixXd q = MatrixXd::Zero(dp, dp);
    q.topLeftCorner(p, p) = model.sigma_eps();
    AutocovSet out;
    out.stacked = solve_discrete_lyapunov(comp.mat, q);
    out.gammas.reserve(static_cast<std::size_t>(h_max) + 1);
    MatrixXd lagged = out.stacked;  // Cov(Y_t, Y_{t-h}) for the stacked state Y_t
    for (int h = 0; h <= h_max; ++h) {
        out.gammas.push_back(lagged.topLeftCorner(p, p));
        lagged = comp.mat * lagged;
    }
    return out;
}

} // namespace sparsevar
