#pragma once
#include <cstdint>
#include <vector>

#include "metacost/models.hpp"
#include "metacost/types.hpp"

namespace metacost {

// Synthetic gait trials with an analytically known metabolic cost, the
// oracle for sampling, quasi-optimization and learning tests. Profiles
// are sinusoids with consistent derivatives: fibre length leads velocity
// by construction (vce = -d(lce)/dt, shortening positive) and activation
// phase shifts with incline so conditions probe different shortening/
// lengthening mixes.
enum class CostSource {
    model,         // measured_cost = trial_cost(model, trial, model_params)
    constant_rate, // whole-body rate is constant_rate_w, cost = P/(m v)
    features,      // per-muscle rate = feature_scale * a * |vce|
};

struct SynthSpec {
    std::size_t n_subjects = 2;
    std::vector<double> speeds = {1.1, 1.6};
    std::vector<double> inclines = {-0.08, 0.0, 0.08};
    std::size_t n_muscles = 4;
    std::size_t n_joints = 2;
    int grid = 100;
    double duration_s = 1.1;

    CostSource source = CostSource::model;
    ModelId model = ModelId::marg68;
    std::vector<double> model_params = {0.25, 1.2};
    double constant_rate_w = 280.0;
    double feature_scale = 30.0; // W per unit a*|vce| per muscle

    double act_base = 0.3;
    double act_amp = 0.25;
    double len_amp = 0.12;
    double f_max_lo = 300.0, f_max_hi = 900.0;
    double l_opt_lo = 0.04, l_opt_hi = 0.09;
    double incline_phase_gain = 6.0; // rad of activation lead per unit grade

    std::uint64_t seed = 0;
};

GaitTrial synth_trial(const SynthSpec& spec, std::size_t subject_idx,
                      double speed, double incline);

// One trial per (subject, speed, incline) triple.
Dataset synth_dataset(const SynthSpec& spec);

} // namespace metacost
