#pragma once

namespace feedsim {

double normal_cdf(double z);

// regularized incomplete beta I_x(a, b)
double incomplete_beta(double a, double b, double x);

// regularized lower incomplete gamma P(a, x)
double incomplete_gamma(double a, double x);

double student_t_cdf(double t, double df);
double f_cdf(double f, double df1, double df2);
double chi2_cdf(double x, double df);

// two-sided p-values
double z_test_pvalue(double z);
double t_test_pvalue(double t, double df);

// Kolmogorov-Smirnov asymptotic survival function Q(lambda)
double ks_survival(double lambda);

}  // namespace feedsim
