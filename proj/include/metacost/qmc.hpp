#pragma once
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "metacost/kstest.hpp"
#include "metacost/models.hpp"
#include "metacost/types.hpp"

namespace metacost {

// Row-major sample matrix: one row per parameter set.
struct SampleMatrix {
    std::size_t n_params = 0;
    std::vector<std::vector<double>> rows;

    std::size_t n_samples() const { return rows.size(); }
};

// Affine map of unit-cube points into per-parameter (lo, hi) ranges.
SampleMatrix scale_to_ranges(const std::vector<std::vector<double>>& points,
                             const std::vector<ParamRange>& ranges);

// Saltelli cross-sampling: from a 2d-dimensional Sobol stream, blocks
// A, B and AB_1..AB_d (A with column i replaced from B), n*(d+2) rows.
SampleMatrix saltelli_matrix(std::size_t dim, std::size_t n,
                             std::uint64_t skip = 0);

// Predicted cost per (sample, trial). A sample whose evaluation throws or
// produces a non-finite cost anywhere gets +inf across its entire row.
std::vector<std::vector<double>> mc_cost_matrix(ModelId model,
                                                const Dataset& data,
                                                const SampleMatrix& samples,
                                                unsigned jobs = 1,
                                                bool clamp_nonneg = false);

// RMSE of predicted vs measured cost over the given trials, +inf rows
// passing through as +inf.
std::vector<double> rmse_per_sample(
    const std::vector<std::vector<double>>& cost_matrix, const Dataset& data);

std::vector<double> mc_evaluate(ModelId model, const Dataset& data,
                                const SampleMatrix& samples, unsigned jobs = 1,
                                bool clamp_nonneg = false);

// Indices of the K smallest rmse values, ties broken by lower index.
// Throws when fewer than K samples are finite.
std::vector<std::size_t> behavioural_split(const std::vector<double>& rmse,
                                           std::size_t K);

// Per-parameter KS between the behavioural subsample and the full sample
// (or the non-behavioural rest when vs_rest is set).
std::vector<KsResult> sensitivity_indices(
    const SampleMatrix& samples, const std::vector<std::size_t>& behavioural,
    bool vs_rest = false);

struct McRun {
    ModelId model = ModelId::marg68;
    std::size_t n_samples = 0;
    std::size_t behavioural_k = 0;
    std::uint64_t skip = 0;
    bool clamp_nonneg = false;
    bool vs_rest = false;
    std::vector<std::string> param_names;
    std::vector<ParamRange> ranges;
    SampleMatrix samples;
    std::vector<double> rmse;
    std::vector<std::size_t> behavioural_idx;
    std::vector<KsResult> indices;
    std::vector<std::vector<double>> best_params; // best-K rows, ascending rmse
};

McRun run_sensitivity(ModelId model, const Dataset& data, std::size_t n,
                      std::size_t K, std::uint64_t skip, unsigned jobs,
                      bool clamp_nonneg = false, bool vs_rest = false,
                      const std::vector<ParamRange>* ranges_override = nullptr);

// JSON summary: indices, best-K parameter sets, run metadata.
std::string mc_run_json(const McRun& run);

// CSV rows of (sample..., rmse) for heatmap plotting.
void write_mc_csv(const std::string& path, const SampleMatrix& samples,
                  const std::vector<double>& rmse,
                  const std::vector<std::string>& param_names);

} // namespace metacost
