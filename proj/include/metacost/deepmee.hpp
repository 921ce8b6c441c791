#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "metacost/mlp.hpp"
#include "metacost/models.hpp"
#include "metacost/types.hpp"

namespace metacost {

enum class FeatureSpace { muscle, joint };

// Bit order fixed by feature_names(): muscle space
// {lce, vce, a, f_max, r_ft, width, l_opt, e}, joint space {q, qdot,
// qddot, M}. Per-channel constants are broadcast across timesteps so the
// shared network can tell channels apart.
struct FeatureSet {
    FeatureSpace space = FeatureSpace::muscle;
    std::uint32_t mask = 0;
};

const std::vector<std::string>& feature_names(FeatureSpace space);
std::vector<FeatureSet> enumerate_feature_sets(FeatureSpace space);
std::string feature_set_name(const FeatureSet& fs);
std::size_t feature_count(const FeatureSet& fs);

// Raw rows, one per (channel, timestep), channel-major.
std::vector<std::vector<double>> feature_rows(const GaitTrial& trial,
                                              const FeatureSet& fs);

// Min-max scaler fitted on training rows only. transform never clips, so
// test data may leave [0,1].
struct Scaler {
    std::vector<double> lo, hi;

    void fit(const std::vector<std::vector<double>>& rows);
    void transform(std::vector<double>& row) const;
    std::vector<double> inverse(const std::vector<double>& row) const;
};

struct MlpSpec {
    std::vector<int> hidden = {32};
    Activation act = Activation::leaky_relu;
    double lr = 1e-3;
    double weight_decay = 1e-5;
    int batch = 8;
    int max_epochs = 500;
    int patience = 20; // early stopping on the held-back 30 % split
    std::uint64_t seed = 0;
};

struct TrainedMlp {
    MlpSpec spec;
    FeatureSet features;
    Scaler scaler;
    Mlp net;
    std::vector<double> train_history; // MSE per epoch
    std::vector<double> val_history;
    double best_val_mse = 0.0;
};

// Identical aggregation to the Eq.-1 trial cost (same code path).
double aggregate_cost(const RateCurve& rates, const GaitTrial& trial);

RateCurve predict_rate_curve(const TrainedMlp& tm, const GaitTrial& trial);
double predict_trial_cost(const TrainedMlp& tm, const GaitTrial& trial);

// Inexact supervision: per-channel per-timestep rates are summed and
// cycle-averaged into a cost, and only that cost is compared against the
// measured value (MSE). Trials are split 70/30 per trial with the spec's
// seed; the scaler is fitted on the 70 % portion only. Throws
// numerical_error when the loss turns non-finite.
TrainedMlp train_inexact(const MlpSpec& spec, const Dataset& fold,
                         const FeatureSet& fs);

std::string trained_mlp_json(const TrainedMlp& tm);

struct SweepBudget {
    int hyper_draws = 30;
    int max_epochs = 500;
    int patience = 20;
    int max_layers = 4;
    std::vector<int> width_choices = {16, 32, 64, 128, 256};
    std::vector<int> batch_choices = {4, 8, 16};
    double lr_lo = 1e-4, lr_hi = 1e-2;       // log-uniform
    double wd_lo = 1e-6, wd_hi = 1e-3;       // log-uniform
    std::uint64_t seed = 0;
};

MlpSpec draw_spec(const SweepBudget& budget, std::uint64_t key);

struct SweepRow {
    FeatureSet features;
    std::string name;
    MlpSpec chosen;
    double loo_rmse = 0.0;
};

// Exhaustive feature-set evaluation: hyperparameters tuned on the first
// LOO fold only (selection by early-stopping split MSE), then the chosen
// spec is trained per fold and held-out predictions are pooled into one
// RMSE per feature set. Rows return sorted ascending by RMSE.
std::vector<SweepRow> feature_sweep(FeatureSpace space, const Dataset& data,
                                    const SweepBudget& budget,
                                    unsigned jobs = 1);

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows);

// Pairwise cells for the heatmap figure: singleton sets on the diagonal,
// two-feature sets off it.
void write_pair_heatmap_csv(const std::string& path,
                            const std::vector<SweepRow>& rows,
                            FeatureSpace space);

} // namespace metacost
