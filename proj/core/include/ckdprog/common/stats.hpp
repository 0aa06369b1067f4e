#pragma once

namespace ckdprog {

// Standard normal upper tail probability P(Z > z).
double normal_sf(double z);

// Two-sided normal p-value for a z statistic.
double normal_two_sided_p(double z);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Pearson correlation of two equally sized samples.
double pearson_correlation(const double* x, const double* y, int n);

}  // namespace ckdprog
