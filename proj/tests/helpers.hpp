#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sparsevar/varmodel.hpp"

// Hand-rolled generators for the property tests.
namespace testutil {

using namespace sparsevar;

inline MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
    return m;
}

/// Random SPD matrix with eigenvalues bounded away from zero.
inline MatrixXd random_spd(Index p, std::mt19937_64& rng) {
    const MatrixXd g = random_matrix(p, p, rng, 0.5);
    return g * g.transpose() + 0.5 * MatrixXd::Identity(p, p);
}

/// Random stable VAR(d): draws coefficients, then rescales the companion
/// spectral radius to `radius`.
inline VarModel random_stable_model(int p, int d, std::mt19937_64& rng, double radius = 0.7, double density = 1.0) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    LagMatrices a;
    for (int s = 0; s < d; ++s) {
        MatrixXd m = random_matrix(p, p, rng, 0.4);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j)
                if (unif(rng) > density) m(i, j) = 0.0;
        a.push_back(m);
    }
    double rho = spectral_radius(CompanionMatrix::from(a).mat);
    if (rho < 1e-12) {
        a[0] += 0.3 * MatrixXd::Identity(p, p);
        rho = spectral_radius(CompanionMatrix::from(a).mat);
    }
    // Scaling A^(s) by c^s scales every companion eigenvalue by c.
    const double c = radius / rho;
    double f = 1.0;
    for (int s = 0; s < d; ++s) {
        f *= c;
        a[static_cast<std::size_t>(s)] *= f;
    }
    return VarModel(a, random_spd(p, rng));
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Sample autocovariance Cov(X_t, X_{t-h}) of a mean-zero series (no centering).
inline MatrixXd sample_autocov(const MatrixXd& x, Index h) {
    const Index n = x.rows();
    return x.bottomRows(n - h).transpose() * x.topRows(n - h) / static_cast<double>(n - h);
}

/// OLS of y on X via QR, independent of the lasso code path.
inline VectorXd ols(const MatrixXd& x, const VectorXd& y) {
    return x.colPivHouseholderQr().solve(y);
}

} // namespace testutil
