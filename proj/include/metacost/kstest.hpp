#pragma once
#include <span>

namespace metacost {

struct KsResult {
    double statistic = 0.0; // sup |ECDF_a - ECDF_b|, in [0,1]
    double p_value = 1.0;   // asymptotic two-sample Kolmogorov p
};

// Two-sample Kolmogorov-Smirnov test. The p-value comes from the
// asymptotic Kolmogorov distribution at sqrt(n_e) * D with effective
// sample size n_e = n_a*n_b/(n_a+n_b); no small-sample correction.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

} // namespace metacost
