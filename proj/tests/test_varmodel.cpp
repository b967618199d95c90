#include <gtest/gtest.h>

#include <numeric>

#include "helpers.hpp"
#include "sparsevar/reference_models.hpp"
#include "sparsevar/varmodel.hpp"

using namespace sparsevar;
using testutil::random_stable_model;

TEST(VarModel, RejectsBadShapes) {
    EXPECT_THROW(VarModel({}, MatrixXd::Identity(2, 2)), InvalidModelError);
    EXPECT_THROW(VarModel({MatrixXd::Zero(2, 3)}, MatrixXd::Identity(2, 2)), InvalidModelError);
    EXPECT_THROW(VarModel({MatrixXd::Zero(3, 3)}, MatrixXd::Identity(2, 2)), InvalidModelError);
    EXPECT_THROW(VarModel({MatrixXd::Zero(0, 0)}, MatrixXd::Zero(0, 0)), InvalidModelError);
}

TEST(VarModel, RejectsNonFinite) {
    MatrixXd a = MatrixXd::Zero(2, 2);
    a(0, 1) = std::nan("");
    EXPECT_THROW(VarModel({a}, MatrixXd::Identity(2, 2)), InvalidModelError);
    MatrixXd s = MatrixXd::Identity(2, 2);
    s(1, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(VarModel({MatrixXd::Zero(2, 2)}, s), InvalidModelError);
}

TEST(VarModel, SigmaMustBeSymmetricPsd) {
    MatrixXd s = MatrixXd::Identity(2, 2);
    s(0, 1) = 0.5;
    EXPECT_THROW(VarModel({MatrixXd::Zero(2, 2)}, s), InvalidModelError);
    s(1, 0) = 0.5;
    EXPECT_NO_THROW(VarModel({MatrixXd::Zero(2, 2)}, s));
    s(0, 1) = s(1, 0) = 2.0;  // eigenvalues 3 and -1
    EXPECT_THROW(VarModel({MatrixXd::Zero(2, 2)}, s), InvalidModelError);
    EXPECT_NO_THROW(VarModel({MatrixXd::Zero(2, 2)}, MatrixXd::Zero(2, 2)));
}

TEST(Stability, SpecExamples) {
    EXPECT_TRUE(is_stable(reference::example1()));
    EXPECT_TRUE(is_stable(VarModel({MatrixXd::Zero(3, 3)}, MatrixXd::Identity(3, 3))));
    EXPECT_FALSE(is_stable(VarModel({MatrixXd::Identity(3, 3)}, MatrixXd::Identity(3, 3))));
    EXPECT_TRUE(is_stable(reference::example2()));
}

TEST(Stability, MarginRejectsNearUnitRoot) {
    MatrixXd a(1, 1);
    a << 1.0 - 1e-10;
    EXPECT_FALSE(is_stable(LagMatrices{a}));
    a << 0.999;
    EXPECT_TRUE(is_stable(LagMatrices{a}));
    EXPECT_FALSE(is_stable(LagMatrices{a}, 0.01));
}

TEST(Stability, SecondOrderCompanion) {
    // x_t = 0.5 x_{t-1} + 0.5 x_{t-2} has a unit root.
    MatrixXd h(1, 1);
    h << 0.5;
    EXPECT_FALSE(is_stable(LagMatrices{h, h}));
    MatrixXd g(1, 1);
    g << 0.4;
    EXPECT_TRUE(is_stable(LagMatrices{h, g}));
}

TEST(Stability, InvariantUnderPermutation) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_real_distribution<double> u(0.5, 1.3);
        VarModel m = random_stable_model(4, 2, rng, u(rng));
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
        perm.setIdentity();
        std::shuffle(perm.indices().data(), perm.indices().data() + 4, rng);
        LagMatrices permuted;
        for (const auto& a : m.coeffs()) permuted.push_back(perm * a * perm.transpose());
        EXPECT_EQ(is_stable(m.coeffs()), is_stable(permuted));
        EXPECT_NEAR(spectral_radius(CompanionMatrix::from(m).mat), spectral_radius(CompanionMatrix::from(permuted).mat),
                    1e-10);
    }
}

TEST(Simulate, DeterministicInSeed) {
    const VarModel m = reference::example1();
    const TimeSeries a = simulate(m, 500, 7, 200);
    const TimeSeries b = simulate(m, 500, 7, 200);
    EXPECT_EQ(a.data(), b.data());
    const TimeSeries c = simulate(m, 500, 8, 200);
    EXPECT_NE(a.data(), c.data());
    EXPECT_EQ(a.n(), 500);
    EXPECT_EQ(a.p(), 6);
}

TEST(Simulate, ZeroSigmaGivesZeroSeries) {
    MatrixXd a = reference::example1_coefficients();
    const TimeSeries ts = simulate(VarModel({a}, MatrixXd::Zero(6, 6)), 100, 3);
    EXPECT_EQ(ts.data().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Simulate, Errors) {
    EXPECT_THROW(simulate(VarModel({MatrixXd::Identity(2, 2)}, MatrixXd::Identity(2, 2)), 100, 1), UnstableModelError);
    EXPECT_THROW(simulate(reference::example1(), 1, 1), SizeError);
    Rng rng = make_rng(1);
    EXPECT_THROW(simulate(reference::example1().coeffs(), MatrixXd::Identity(6, 6), 100, -1, rng), ArgumentError);
}

TEST(Simulate, ScalarAr1LagOneAutocorrelation) {
    MatrixXd a(1, 1), s(1, 1);
    a << 0.8;
    s << 1.0;
    const TimeSeries ts = simulate(VarModel({a}, s), 200000, 42);
    const MatrixXd g0 = testutil::sample_autocov(ts.data(), 0);
    const MatrixXd g1 = testutil::sample_autocov(ts.data(), 1);
    EXPECT_NEAR(g1(0, 0) / g0(0, 0), 0.8, 0.02);
}

TEST(InnovationFactor, ReproducesSigma) {
    const MatrixXd s = reference::example1_sigma();
    const MatrixXd f = innovation_factor(s);
    EXPECT_LT((f * f.transpose() - s).cwiseAbs().maxCoeff(), 1e-12);
    // Singular PSD: falls back to an eigen square root.
    VectorXd v(3);
    v << 1, 2, 3;
    const MatrixXd rank1 = v * v.transpose();
    const MatrixXd g = innovation_factor(rank1);
    EXPECT_LT((g * g.transpose() - rank1).cwiseAbs().maxCoeff(), 1e-10);
    MatrixXd neg = MatrixXd::Identity(2, 2);
    neg(1, 1) = -1e-6;
    EXPECT_THROW(innovation_factor(neg), InvalidModelError);
}

TEST(PopulationAutocov, ScalarAr1) {
    MatrixXd a(1, 1), s(1, 1);
    a << 0.8;
    s << 1.0;
    const AutocovSet ac = population_autocov(VarModel({a}, s), 3);
    EXPECT_NEAR(ac.lag(0)(0, 0), 1.0 / (1.0 - 0.64), 1e-10);
    EXPECT_NEAR(ac.lag(1)(0, 0), 0.8 / (1.0 - 0.64), 1e-10);
    EXPECT_NEAR(ac.lag(3)(0, 0), 0.512 / (1.0 - 0.64), 1e-10);
}

TEST(PopulationAutocov, WhiteNoise) {
    const MatrixXd s = reference::example1_sigma();
    const AutocovSet ac = population_autocov(VarModel({MatrixXd::Zero(6, 6)}, s), 2);
    EXPECT_LT((ac.lag(0) - s).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(ac.lag(1).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(ac.lag(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(PopulationAutocov, Errors) {
    EXPECT_THROW(population_autocov(VarModel({MatrixXd::Identity(2, 2)}, MatrixXd::Identity(2, 2)), 1),
                 UnstableModelError);
    EXPECT_THROW(population_autocov(reference::example1(), -1), ArgumentError);
}

// Yule-Walker: Gamma(h) = sum_s A^(s) Gamma(h - s), with Gamma(-k) = Gamma(k)^T.
TEST(PopulationAutocov, YuleWalkerProperty) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 1 + static_cast<int>(rng() % 5);
        const int d = 1 + static_cast<int>(rng() % 3);
        const VarModel m = random_stable_model(p, d, rng, 0.85);
        const int h_max = d + 3;
        const AutocovSet ac = population_autocov(m, h_max);
        auto gamma = [&](int h) -> MatrixXd { return h >= 0 ? ac.lag(h) : MatrixXd(ac.lag(-h).transpose()); };
        for (int h = 1; h <= h_max; ++h) {
            MatrixXd rhs = MatrixXd::Zero(p, p);
            for (int s = 1; s <= d; ++s) rhs += m.coeff(s - 1) * gamma(h - s);
            EXPECT_LT((gamma(h) - rhs).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial << " h " << h;
        }
        // Lag 0 equation: Gamma(0) = sum_s A^(s) Gamma(-s) + Sigma.
        MatrixXd rhs0 = m.sigma_eps();
        for (int s = 1; s <= d; ++s) rhs0 += m.coeff(s - 1) * gamma(-s);
        EXPECT_LT((gamma(0) - rhs0).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(PopulationAutocov, StackedBlocksAreLaggedAutocovariances) {
    std::mt19937_64 rng(5);
    const VarModel m = random_stable_model(3, 3, rng);
    const AutocovSet ac = population_autocov(m, 2);
    // Block (i, j) of the stacked covariance is Cov(X_{t-i}, X_{t-j}) = Gamma(j - i).
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const MatrixXd block = ac.stacked.block(3 * i, 3 * j, 3, 3);
            const MatrixXd expect = j >= i ? ac.lag(j - i) : MatrixXd(ac.lag(i - j).transpose());
            EXPECT_LT((block - expect).cwiseAbs().maxCoeff(), 1e-10);
        }
}

TEST(PopulationAutocov, MatchesLongSimulationWithinMonteCarloBand) {
    std::mt19937_64 rng(9);
    const VarModel m = random_stable_model(3, 1, rng, 0.6);
    const Index n = 200000;
    const TimeSeries ts = simulate(m, n, 77);
    const AutocovSet ac = population_autocov(m, 1);
    for (int h = 0; h <= 1; ++h) {
        const MatrixXd emp = testutil::sample_autocov(ts.data(), h);
        // Crude 3-sigma band: var of a lag product is bounded by g_ii g_jj times
        // the sum of squared autocorrelations, here at most ~ 1/(1 - 0.6^2) * 2.
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 3; ++j) {
                const double band = 3.0 * std::sqrt(ac.lag(0)(i, i) * ac.lag(0)(j, j) * 2.0 * 2.0 / (1.0 - 0.36) / n);
                EXPECT_NEAR(emp(i, j), ac.lag(h)(i, j), band) << "h=" << h << " (" << i << "," << j << ")";
            }
    }
}

TEST(Lyapunov, SolvesEquation) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const VarModel m = random_stable_model(4, 1, rng, 0.95);
        const MatrixXd& f = m.coeff(0);
        const MatrixXd s = solve_discrete_lyapunov(f, m.sigma_eps());
        EXPECT_LT((s - f * s * f.transpose() - m.sigma_eps()).cwiseAbs().maxCoeff(), 1e-9 * s.cwiseAbs().maxCoeff());
    }
}

TEST(TimeSeries, RejectsNonFiniteAndCenters) {
    MatrixXd x(3, 2);
    x << 1, 2, 3, 4, 5, std::nan("");
    EXPECT_THROW(TimeSeries{x}, ArgumentError);
    x(2, 1) = 6;
    const TimeSeries c = TimeSeries(x).centered();
    EXPECT_NEAR(c.data().col(0).sum(), 0.0, 1e-14);
    EXPECT_NEAR(c.data().col(1).sum(), 0.0, 1e-14);
    EXPECT_DOUBLE_EQ(c.data()(0, 0), -2.0);
}

TEST(ReferenceModels, ExampleStructure) {
    const VarModel e2 = reference::example2();
    EXPECT_EQ(e2.p(), 20);
    // Block lower-triangular: the upper-right 14 x 6 block is zero and the
    // lower-right 6 x 6 block is the Example 1 matrix.
    EXPECT_EQ(e2.coeff(0).topRightCorner(14, 6).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(e2.coeff(0).bottomRightCorner(6, 6), reference::example1_coefficients());
    EXPECT_EQ(reference::example2_group().size(), 84u);
    for (const auto& c : reference::example2_group().g_a) EXPECT_EQ(e2.coeff(0)(c.eq, c.var), 0.0);
    const VarModel alt = reference::example2_multiple(0.5);
    int hits = 0;
    for (const auto& c : reference::example2_group().g_a) hits += alt.coeff(0)(c.eq, c.var) != 0.0;
    EXPECT_EQ(hits, 5);
    const VarModel null1 = reference::example1_testing(0.0, 0.0);
    for (const auto& c : reference::example1_group().g_a) EXPECT_EQ(null1.coeff(0)(c.eq, c.var), 0.0);
    EXPECT_EQ(null1.sigma_eps()(0, 5), 0.0);
}
