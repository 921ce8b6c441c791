#include "metacost/kstest.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "metacost/error.hpp"
#include "metacost/special.hpp"

namespace metacost {

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty())
        throw validation_error("ks_two_sample: empty sample");

    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    // Sweep the pooled order statistics; at ties advance both ECDFs before
    // measuring so the sup is taken between jump points.
    while (i < sa.size() && j < sb.size()) {
        const double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    d = std::max(d, std::abs(1.0 - (sa.size() > i ? i / na : j / nb)));

    const double ne = na * nb / (na + nb);
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_sf(std::sqrt(ne) * d);
    return r;
}

} // namespace metacost
