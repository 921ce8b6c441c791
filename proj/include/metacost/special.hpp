#pragma once

namespace metacost {

// Survival function of the Kolmogorov distribution,
// Q(x) = 2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 x^2), clamped to [0, 1].
double kolmogorov_sf(double x);

// Regularized incomplete beta function I_x(a, b).
double betainc(double a, double b, double x);

// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

} // namespace metacost
