#pragma once

#include <string>
#include <vector>

#include "feedsim/common.hpp"
#include "feedsim/simulator.hpp"

namespace feedsim {

struct ThetaEstimate {
    double theta_hat = kMissing;
    double se = kMissing;
    double intercept = kMissing;  // absorbs the constant in the moment equation
    std::string method;           // ols | iv2sls | reliability
    long n_obs = 0;
    Warnings warnings;
};

struct IVDiagnostics {
    double first_stage_coef = kMissing;
    double first_stage_f = kMissing;
    double reliability_ratio = kMissing;  // corr(half1, half2)
    bool weak_instrument = false;
};

struct IvThetaEstimate {
    ThetaEstimate est;
    IVDiagnostics diag;
};

// Options shared by the estimators.  The default is the linear-in-proportions
// specification; the log variant restricts to strictly positive proportions.
struct EstimatorOptions {
    bool log_spec = false;
    long min_obs = 30;
};

// Regress the control-adjusted change in the toxic share proportion on
// baseline exposure; theta_hat = -slope.
ThetaEstimate estimate_theta_ols(const Panel& panel, const EstimatorOptions& opts = {});

// Same outcome, with the baseline exposure measured on the first half of view
// events and instrumented by the second half.
IvThetaEstimate estimate_theta_iv(const Panel& panel, const EstimatorOptions& opts = {});

// Errors-in-variables correction: the half1 slope divided by the half1/half2
// correlation.
ThetaEstimate estimate_theta_reliability(const Panel& panel, const EstimatorOptions& opts = {});

// Control-sample check that sharing is stable across periods: slope of
// period-1 s_t on period-0 s_t, corrected for sampling error by instrumenting
// with the baseline view proportion; reports the test of slope = 1.
struct SteadyStateCheck {
    double delta1_ols = kMissing;
    double se_ols = kMissing;
    double delta1 = kMissing;  // corrected
    double se = kMissing;
    double p_value_vs_one = kMissing;
    long n_obs = 0;
    Warnings warnings;
};

SteadyStateCheck steady_state_check(const Panel& panel, const EstimatorOptions& opts = {});

// Per-group IV estimates over baseline-exposure groups plus a Wald test of
// equal influence across groups.
struct GroupThetaResult {
    std::vector<IvThetaEstimate> by_group;
    double wald_stat = kMissing;
    double p_value = kMissing;
    Warnings warnings;
};

GroupThetaResult estimate_theta_by_group(const Panel& panel, int n_groups,
                                         const EstimatorOptions& opts = {});

// results CSV: method, theta_hat, se, intercept, first_stage_F, n_obs
void write_results_csv(const std::string& path, const std::vector<IvThetaEstimate>& rows);

}  // namespace feedsim
