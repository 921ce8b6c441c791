#pragma once
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "metacost/hill.hpp"
#include "metacost/types.hpp"

namespace metacost {

// Four metabolic energy expenditure models, each a pure function from
// muscle or joint states (plus empirical parameters) to an instantaneous
// metabolic rate in watts. Trial cost comes from the cycle integral of
// the summed channel rates, normalized by duration, body mass and speed,
// giving J/(kg m).
//
//   MARG68  efficiency split between fibre shortening and lengthening
//   MINE97  rational velocity-to-energy relationship phi(vbar)
//   LICH05  mechanical power plus maintenance/shortening-lengthening heat
//   KIMR15  joint-space model on moments and angular velocities
//
// Muscle-space models use the canonical shortening-positive velocity;
// KIMR15 discriminates regimes by the sign of the joint power M*qdot.

enum class ModelId { marg68, mine97, lich05, kimr15 };

const char* model_name(ModelId id);
ModelId model_from_name(const std::string& name);
std::size_t model_arity(ModelId id);
bool model_uses_muscles(ModelId id);

struct ParamRange {
    double lo = 0.0;
    double hi = 0.0;
};

// A tagged vector of empirical parameters for one model, with the
// per-parameter sampling ranges used by the Monte-Carlo machinery.
struct ModelParamSet {
    ModelId model = ModelId::marg68;
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<ParamRange> ranges;
};

// The published parameter values for each model, with default sampling
// ranges: (-5, 5) for the MARG68 efficiencies and +/- 10|p0| elsewhere.
ModelParamSet original_params(ModelId id);

// --- per-sample rate functions -------------------------------------------

// Efficiency model: rate = w/eta_s while shortening, -w/eta_l while
// lengthening, 0 at the isometric point. w = F_ce * vce (watts,
// positive during shortening).
double marg68_rate(const MuscleState& s, const MuscleParams& mp,
                   const HillConfig& hc, double eta_s, double eta_l);

// Rational velocity-energy relationship over vbar = vce_norm / vmax_norm.
// Throws numerical_error when the denominator is within 1e-12 of zero.
double mine97_phi(double vbar, std::span<const double> p);

// rate = a * vmax * Fmax * phi(vbar), with vmax = vmax_norm * l_ce_opt.
double mine97_rate(const MuscleState& s, const MuscleParams& mp,
                   std::span<const double> p);

// Supra-threshold activation duration: tstim[k] is the length in seconds
// of the contiguous run of samples with a > t_act ending at k, zero when
// the activation is at or below the threshold.
std::vector<double> lich05_tstim(std::span<const double> act, double t_act,
                                 double dt);

// Power plus heat. Parameter layout: [G, t_act, p1..p8]. The heat terms
// as published are per-second rates; heat_in_watts additionally scales
// them by l_ce_opt so the sum with the mechanical power is in watts.
double lich05_rate(const MuscleState& s, const MuscleParams& mp,
                   const HillConfig& hc, std::span<const double> params,
                   bool heat_in_watts = true);

// Per-joint maxima over one trial, the normalization constants of KIMR15.
struct TrialMaxima {
    std::vector<double> qdot_abs_max; // max |qdot| per joint
    std::vector<double> power_max;    // max signed M*qdot per joint
};
TrialMaxima trial_maxima(const GaitTrial& trial);

// Parameter layout: [h_M, h_SL_short, h_SL_long, qdot_cc].
double kimr15_rate(const JointState& js, double qdot_abs_max, double power_max,
                   std::span<const double> p);

// --- whole-trial evaluation ----------------------------------------------

// Instantaneous rate per channel (muscles for the muscle-space models,
// joints for KIMR15) at every grid point.
struct RateCurve {
    std::vector<std::string> channels;
    std::vector<std::vector<double>> watts; // [channel][sample]
};

RateCurve rate_curve(ModelId id, const GaitTrial& trial,
                     const ModelParamSet& params,
                     const HillConfig& hc = HillConfig{});

// Cycle integral of summed channel rates over [0, T], divided by T*m*v.
// The grid holds one full cycle at t_k = k*T/N, so the closed trapezoid
// reduces to dt * sum(rate). clamp_nonneg zeroes negative channel rates
// before summation.
double cost_from_rates(const RateCurve& rates, const GaitTrial& trial,
                       bool clamp_nonneg = false);

double trial_cost(ModelId id, const GaitTrial& trial,
                  const ModelParamSet& params, bool clamp_nonneg = false,
                  const HillConfig& hc = HillConfig{});

} // namespace metacost
