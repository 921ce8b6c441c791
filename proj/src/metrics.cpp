#include "metacost/metrics.hpp"

#include <cmath>
#include <map>

#include "metacost/error.hpp"
#include "metacost/special.hpp"

namespace metacost {

double rmse(const PairedCosts& pc) {
    if (pc.empty()) throw validation_error("rmse: no cost pairs");
    double acc = 0.0;
    for (const auto& p : pc) {
        const double e = p.calc - p.meas;
        acc += e * e;
    }
    return std::sqrt(acc / pc.size());
}

RmcorrResult rmcorr(const PairedCosts& pc) {
    struct Acc {
        double sx = 0, sy = 0;
        std::size_t n = 0;
    };
    std::map<std::string, Acc> by_subject;
    for (const auto& p : pc) {
        auto& a = by_subject[p.subject];
        a.sx += p.calc;
        a.sy += p.meas;
        ++a.n;
    }
    if (by_subject.size() < 2)
        throw validation_error("rmcorr needs at least 2 subjects");
    for (const auto& [id, a] : by_subject)
        if (a.n < 2)
            throw validation_error("rmcorr: subject " + id +
                                   " has fewer than 2 trials");

    double sxx = 0, syy = 0, sxy = 0;
    for (const auto& p : pc) {
        const auto& a = by_subject[p.subject];
        const double x = p.calc - a.sx / a.n;
        const double y = p.meas - a.sy / a.n;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw numerical_error("rmcorr: zero within-subject variance");

    RmcorrResult res;
    res.r = sxy / std::sqrt(sxx * syy);
    res.df = static_cast<double>(pc.size()) -
             static_cast<double>(by_subject.size()) - 1.0;
    if (res.df < 1.0)
        throw validation_error("rmcorr: nonpositive degrees of freedom");
    const double t = res.r * std::sqrt(res.df / (1.0 - res.r * res.r));
    res.p_value = student_t_two_sided_p(t, res.df);
    return res;
}

CmcResult cmc(const WaveformSet& ws) {
    const std::size_t G = ws.waveforms.size();
    if (G < 2) throw validation_error("cmc needs at least 2 waveforms");
    const std::size_t F = ws.waveforms.front().size();
    if (F < 2) throw validation_error("cmc needs at least 2 frames");
    for (const auto& w : ws.waveforms)
        if (w.size() != F) throw validation_error("cmc: ragged waveforms");

    double grand = 0.0;
    std::vector<double> frame_mean(F, 0.0);
    for (const auto& w : ws.waveforms)
        for (std::size_t f = 0; f < F; ++f) frame_mean[f] += w[f];
    for (std::size_t f = 0; f < F; ++f) {
        frame_mean[f] /= G;
        grand += frame_mean[f];
    }
    grand /= F;

    double ss_within = 0.0, ss_total = 0.0;
    for (const auto& w : ws.waveforms)
        for (std::size_t f = 0; f < F; ++f) {
            const double dw = w[f] - frame_mean[f];
            const double dt = w[f] - grand;
            ss_within += dw * dw;
            ss_total += dt * dt;
        }
    if (ss_total == 0.0)
        throw numerical_error("cmc: zero total variance");

    const double within = ss_within / (F * (G - 1.0));
    const double total = ss_total / (G * F - 1.0);
    const double radicand = 1.0 - within / total;
    CmcResult res;
    if (radicand < 0.0) {
        res.value = 0.0;
        res.clamped = true;
    } else {
        res.value = std::sqrt(radicand);
    }
    return res;
}

} // namespace metacost
