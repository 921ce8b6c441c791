#pragma once
#include <string>
#include <vector>

namespace metacost {

// One (calculated, measured) cost pair from a single trial.
struct CostPair {
    std::string subject;
    double calc = 0.0;
    double meas = 0.0;
};

using PairedCosts = std::vector<CostPair>;

double rmse(const PairedCosts& pc);

struct RmcorrResult {
    double r = 0.0;
    double p_value = 1.0;
    double df = 0.0;
};

// Repeated-measures correlation: both variables centered by subject means,
// Pearson r over the pooled centered pairs, t-test with df = N - k - 1.
// Requires >= 2 subjects with >= 2 trials each and nonzero within-subject
// variance in both variables.
RmcorrResult rmcorr(const PairedCosts& pc);

// G waveforms sampled on a common grid of F frames.
struct WaveformSet {
    std::vector<std::vector<double>> waveforms; // [G][F]
};

struct CmcResult {
    double value = 0.0;
    bool clamped = false; // radicand was negative, value forced to 0
};

// Coefficient of multiple correlation, between-waveform form:
// sqrt(1 - within-frame variance / total variance), df-adjusted.
CmcResult cmc(const WaveformSet& ws);

} // namespace metacost
