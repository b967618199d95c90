// Library walk-through: simulate Example 1, fit, bootstrap two intervals and
// test the null block A(6, 1..5) = 0, Sigma(1,6) = 0.

#include <cstdio>

#include "sparsevar/bootstrap.hpp"
#include "sparsevar/reference_models.hpp"
#include "sparsevar/testing.hpp"

using namespace sparsevar;

int main() {
    const VarModel model = reference::example1_testing(0.3, 0.0);
    const TimeSeries series = simulate(model, 200, 42);
    const LaggedDesign design = build_design(series, 1);

    EstimatorConfig est;
    est.lambda = 0.11;
    const DesparsifiedFit fit = estimate(design, est);

    const ThresholdedModel boot_model = make_thresholded_model(design, fit, 0.11, 0.11);
    const std::vector<CoefIndex> targets{{5, 0, 0}, {1, 3, 0}};
    const BootstrapResult boot = run_bootstrap(fit, boot_model, targets, 500, 0.05, 7, est, BootstrapOptions{});
    for (const auto& ci : boot.intervals)
        std::printf("A(%d,%d): %.3f  95%% CI [%.3f, %.3f]  truth %.3f\n", ci.target.eq + 1, ci.target.var + 1,
                    ci.estimate, ci.lower, ci.upper, model.coeff(0)(ci.target.eq, ci.target.var));

    TestConfig tc;
    tc.estimator = est;
    tc.a_n = 0.11;
    tc.lambda_eps = 0.11;
    tc.B = 499;
    const TestResult res = bootstrap_test(design, reference::example1_group(), tc);
    std::printf("T = %.3f, critical value %.3f, p = %.3f -> %s\n", res.t_obs, res.crit, res.p_value,
                res.reject ? "reject" : "do not reject");
}
