#pragma once
#include <string>
#include <vector>

namespace metacost {

struct Subject {
    std::string id;
    double mass_kg = 0.0;
    double height_m = 0.0;
};

struct TrialCondition {
    double speed_mps = 0.0;
    double incline = 0.0; // dimensionless grade, e.g. -0.08, 0, +0.08
};

// Fibre velocity is stored shortening-positive in every series.
// tstim is derived during model evaluation, never read from disk.
struct MuscleState {
    double act = 0.0;      // a in [0,1]
    double stim = 0.0;     // e in [0,1]
    double lce_norm = 1.0; // fibre length / optimal length, > 0
    double vce_norm = 0.0; // optimal lengths per second, shortening positive
    double tstim_s = 0.0;
};

struct MuscleParams {
    double f_max_n = 0.0;
    double l_ce_opt_m = 0.0;
    double width = 0.56;
    double r_ft = 0.5;        // fast-twitch fraction in [0,1]
    double v_max_norm = 10.0; // optimal lengths per second
};

struct JointState {
    double q = 0.0;     // rad
    double qdot = 0.0;  // rad/s
    double qddot = 0.0; // rad/s^2
    double moment = 0.0; // N m
};

struct MuscleChannel {
    std::string name;
    MuscleParams params;
    std::vector<MuscleState> series;
};

struct JointChannel {
    std::string name;
    std::vector<JointState> series;
};

// One recorded walking condition. Series live on a uniform grid of
// `grid` samples covering one gait cycle: t_k = k * duration / grid.
struct GaitTrial {
    std::string id;
    Subject subject;
    TrialCondition condition;
    double duration_s = 0.0;
    int grid = 100;
    std::vector<MuscleChannel> muscles;
    std::vector<JointChannel> joints;
    double measured_cost = 0.0; // J/(kg m), trial average from calorimetry
};

struct Dataset {
    std::vector<GaitTrial> trials;

    std::vector<std::string> subject_ids() const;
    std::size_t n_subjects() const { return subject_ids().size(); }
};

} // namespace metacost
