#pragma once
#include <string>
#include <utility>
#include <vector>

#include "metacost/metrics.hpp"
#include "metacost/qmc.hpp"

namespace metacost {

struct LooFold {
    std::string subject; // held out
    std::size_t sample_idx = 0;
    std::vector<double> params;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
};

struct LooReport {
    ModelId model = ModelId::marg68;
    std::vector<LooFold> folds;
    PairedCosts pooled; // held-out predictions, one entry per trial
    double pooled_rmse = 0.0;
    RmcorrResult pooled_rmc;
};

// Subject-wise leave-one-out quasi-optimization over one shared sample
// matrix: per fold the argmin-train-RMSE sample (ties to the lower index)
// is selected and evaluated on the held-out subject; held-out predictions
// are pooled across folds before the aggregate RMSE/RMC.
LooReport loo_quasi_opt(ModelId model, const Dataset& data,
                        const SampleMatrix& samples, unsigned jobs = 1,
                        bool clamp_nonneg = false);

std::string loo_report_json(const LooReport& rep);

struct ImprovementSummary {
    std::vector<double> percent; // per model, 100*(orig-quasi)/orig
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation
};

ImprovementSummary improvement_summary(const std::vector<double>& original,
                                       const std::vector<double>& quasi);

// One table row per model, original vs quasi-optimized scores.
struct ScoreRow {
    std::string model;
    double rmc_orig = 0.0, rmse_orig = 0.0;
    double rmc_quasi = 0.0, rmse_quasi = 0.0;
};

std::string score_table_text(const std::vector<ScoreRow>& rows);

// Mean CMC of per-(trial, channel) rate waveforms across models sharing
// one space; clamped values enter the mean as 0.
double model_waveform_cmc(
    const Dataset& data,
    const std::vector<std::pair<ModelId, ModelParamSet>>& models,
    const HillConfig& hc = HillConfig{});

} // namespace metacost
