#pragma once

#include <vector>

#include "feedsim/common.hpp"

namespace feedsim {

// Least squares with heteroskedasticity-robust (HC1) standard errors.
struct OlsFit {
    Vector coef;
    Vector se;
    Vector resid;
    double r_squared = 0.0;
    long n = 0;
    int k = 0;
};

// X must already contain any intercept column.
OlsFit ols(const Vector& y, const Matrix& X);

// y on [1, x]; coef(0) intercept, coef(1) slope.
OlsFit simple_ols(const Vector& y, const Vector& x);

// Two-stage least squares with one endogenous regressor and one instrument,
// intercepts in both stages.  In this just-identified case the slope equals
// cov(y, z) / cov(x, z).
struct TslsFit {
    double intercept = 0.0;
    double slope = 0.0;
    double se = 0.0;            // robust, sandwich with actual-regressor residuals
    double first_stage_coef = 0.0;
    double first_stage_f = 0.0; // robust t^2 of the first-stage slope
    long n = 0;
};

TslsFit tsls(const Vector& y, const Vector& x, const Vector& z);

// Joint significance test of all covariates in a regression of d on [1, X];
// classical F with collinear columns dropped.
struct FTest {
    double f_stat = 0.0;
    double p_value = 1.0;
    int df1 = 0;
    long df2 = 0;
    std::vector<int> dropped;  // indices of collinear columns removed
};

FTest joint_f_test(const Vector& d, const Matrix& X);

}  // namespace feedsim
