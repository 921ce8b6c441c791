#include "metacost/models.hpp"

#include <cmath>
#include <cstdlib>

#include "metacost/error.hpp"

namespace metacost {

const char* model_name(ModelId id) {
    switch (id) {
        case ModelId::marg68: return "MARG68";
        case ModelId::mine97: return "MINE97";
        case ModelId::lich05: return "LICH05";
        case ModelId::kimr15: return "KIMR15";
    }
    return "?";
}

ModelId model_from_name(const std::string& name) {
    if (name == "MARG68" || name == "marg68") return ModelId::marg68;
    if (name == "MINE97" || name == "mine97") return ModelId::mine97;
    if (name == "LICH05" || name == "lich05") return ModelId::lich05;
    if (name == "KIMR15" || name == "kimr15") return ModelId::kimr15;
    throw validation_error("unknown model: " + name);
}

std::size_t model_arity(ModelId id) {
    switch (id) {
        case ModelId::marg68: return 2;
        case ModelId::mine97: return 7;
        case ModelId::lich05: return 10;
        case ModelId::kimr15: return 4;
    }
    return 0;
}

bool model_uses_muscles(ModelId id) { return id != ModelId::kimr15; }

namespace {

// Default sampling range spans sign reversal: +/- 10|p0|, (-1,1) if p0=0.
ParamRange default_range(double p0) {
    if (p0 == 0.0) return {-1.0, 1.0};
    const double m = 10.0 * std::abs(p0);
    return {-m, m};
}

} // namespace

ModelParamSet original_params(ModelId id) {
    ModelParamSet ps;
    ps.model = id;
    switch (id) {
        case ModelId::marg68:
            ps.names = {"eta_s", "eta_l"};
            ps.values = {0.25, 1.2};
            ps.ranges = {{-5.0, 5.0}, {-5.0, 5.0}};
            return ps;
        case ModelId::mine97:
            ps.names = {"p_mi_1", "p_mi_2", "p_mi_3", "p_mi_4",
                        "p_mi_5", "p_mi_6", "p_mi_7"};
            ps.values = {0.054, 0.506, 2.46, 1.0, -1.13, 12.8, -1.64};
            break;
        case ModelId::lich05:
            ps.names = {"G",     "t_act", "p_l_1", "p_l_2", "p_l_3",
                        "p_l_4", "p_l_5", "p_l_6", "p_l_7", "p_l_8"};
            ps.values = {4.0, 0.1, 0.3, 0.3, 7.0, 0.8, 0.72, 0.175, 0.022, 0.5};
            break;
        case ModelId::kimr15:
            ps.names = {"h_M", "h_SL_s", "h_SL_l", "qdot_cc"};
            ps.values = {0.054, 0.283, 1.423, 0.004};
            break;
    }
    ps.ranges.reserve(ps.values.size());
    for (double v : ps.values) ps.ranges.push_back(default_range(v));
    return ps;
}

namespace {

// Contractile-element power in watts, positive while shortening.
double ce_power(const MuscleState& s, const MuscleParams& mp,
                const HillConfig& hc) {
    const double f = mp.f_max_n * s.act * f_fl(s.lce_norm, mp.width) *
                     f_fv(s.vce_norm, hc.curvature_g, mp.v_max_norm,
                          hc.ecc_plateau);
    return f * s.vce_norm * mp.l_ce_opt_m;
}

} // namespace

double marg68_rate(const MuscleState& s, const MuscleParams& mp,
                   const HillConfig& hc, double eta_s, double eta_l) {
    if (s.vce_norm == 0.0) return 0.0;
    const double w = ce_power(s, mp, hc);
    return s.vce_norm > 0.0 ? w / eta_s : -w / eta_l;
}

double mine97_phi(double vbar, std::span<const double> p) {
    const double num = p[0] + vbar * (p[1] + vbar * p[2]);
    const double den = p[3] + vbar * (p[4] + vbar * (p[5] + vbar * p[6]));
    if (std::abs(den) < 1e-12)
        throw numerical_error("phi denominator vanishes at vbar");
    return num / den;
}

double mine97_rate(const MuscleState& s, const MuscleParams& mp,
                   std::span<const double> p) {
    const double phi = mine97_phi(s.vce_norm / mp.v_max_norm, p);
    return s.act * mp.v_max_norm * mp.l_ce_opt_m * mp.f_max_n * phi;
}

std::vector<double> lich05_tstim(std::span<const double> act, double t_act,
                                 double dt) {
    std::vector<double> out(act.size(), 0.0);
    double run = 0.0;
    for (std::size_t k = 0; k < act.size(); ++k) {
        run = act[k] > t_act ? run + dt : 0.0;
        out[k] = run;
    }
    return out;
}

double lich05_rate(const MuscleState& s, const MuscleParams& mp,
                   const HillConfig& hc, std::span<const double> params,
                   bool heat_in_watts) {
    const double G = params[0];
    const double p1 = params[2], p2 = params[3], p3 = params[4];
    const double p4 = params[5], p5 = params[6], p6 = params[7];
    const double p7 = params[8], p8 = params[9];

    // G doubles as the force-velocity curvature inside this model.
    HillConfig lc = hc;
    lc.curvature_g = G;

    const double gamma = p4 * std::exp(-p5 * s.tstim_s) +
                         p6 * std::exp(-p7 * s.tstim_s);
    double h_m = gamma * mp.v_max_norm / (G * G);
    double h_sl;
    if (s.vce_norm > 0.0) {
        h_sl = s.vce_norm / G;
    } else {
        const double ffv =
            f_fv(s.vce_norm, lc.curvature_g, mp.v_max_norm, lc.ecc_plateau);
        h_m *= p2 + (1.0 - p2) * std::exp(-p3 * s.vce_norm * (ffv - 1.0));
        h_sl = -p8 * ffv * s.vce_norm;
    }
    double h = s.act * mp.f_max_n *
               (p1 * h_m + f_fl(s.lce_norm, mp.width) *
                               ((1.0 - p1) * h_m + h_sl));
    if (heat_in_watts) h *= mp.l_ce_opt_m;
    return ce_power(s, mp, lc) + h;
}

TrialMaxima trial_maxima(const GaitTrial& trial) {
    TrialMaxima mx;
    mx.qdot_abs_max.reserve(trial.joints.size());
    mx.power_max.reserve(trial.joints.size());
    for (const auto& jc : trial.joints) {
        if (jc.series.empty())
            throw validation_error("joint " + jc.name + " has empty series");
        double qa = 0.0, pm = jc.series.front().moment * jc.series.front().qdot;
        for (const auto& js : jc.series) {
            qa = std::max(qa, std::abs(js.qdot));
            pm = std::max(pm, js.moment * js.qdot);
        }
        mx.qdot_abs_max.push_back(qa);
        mx.power_max.push_back(pm);
    }
    return mx;
}

double kimr15_rate(const JointState& js, double qdot_abs_max, double power_max,
                   std::span<const double> p) {
    const double power = js.moment * js.qdot;
    const double h_sl = power >= 0.0 ? p[1] : p[2];
    return p[0] * qdot_abs_max * std::abs(js.moment) + h_sl * std::abs(power) +
           p[3] * power_max + power;
}

RateCurve rate_curve(ModelId id, const GaitTrial& trial,
                     const ModelParamSet& params, const HillConfig& hc) {
    if (params.model != id || params.values.size() != model_arity(id))
        throw validation_error("parameter set does not match model");
    const std::span<const double> p{params.values};
    RateCurve rc;

    if (id == ModelId::kimr15) {
        const TrialMaxima mx = trial_maxima(trial);
        rc.channels.reserve(trial.joints.size());
        rc.watts.reserve(trial.joints.size());
        for (std::size_t j = 0; j < trial.joints.size(); ++j) {
            const auto& jc = trial.joints[j];
            rc.channels.push_back(jc.name);
            std::vector<double> w(jc.series.size());
            for (std::size_t k = 0; k < jc.series.size(); ++k)
                w[k] = kimr15_rate(jc.series[k], mx.qdot_abs_max[j],
                                   mx.power_max[j], p);
            rc.watts.push_back(std::move(w));
        }
        return rc;
    }

    const double dt = trial.duration_s / trial.grid;
    rc.channels.reserve(trial.muscles.size());
    rc.watts.reserve(trial.muscles.size());
    for (const auto& mc : trial.muscles) {
        rc.channels.push_back(mc.name);
        std::vector<double> w(mc.series.size());
        if (id == ModelId::lich05) {
            std::vector<double> act(mc.series.size());
            for (std::size_t k = 0; k < act.size(); ++k)
                act[k] = mc.series[k].act;
            const std::vector<double> tstim = lich05_tstim(act, p[1], dt);
            for (std::size_t k = 0; k < w.size(); ++k) {
                MuscleState s = mc.series[k];
                s.tstim_s = tstim[k];
                w[k] = lich05_rate(s, mc.params, hc, p);
            }
        } else if (id == ModelId::mine97) {
            for (std::size_t k = 0; k < w.size(); ++k)
                w[k] = mine97_rate(mc.series[k], mc.params, p);
        } else {
            for (std::size_t k = 0; k < w.size(); ++k)
                w[k] = marg68_rate(mc.series[k], mc.params, hc, p[0], p[1]);
        }
        rc.watts.push_back(std::move(w));
    }
    return rc;
}

double cost_from_rates(const RateCurve& rates, const GaitTrial& trial,
                       bool clamp_nonneg) {
    if (trial.duration_s <= 0.0 || trial.subject.mass_kg <= 0.0 ||
        trial.condition.speed_mps <= 0.0)
        throw validation_error("trial " + trial.id +
                               ": duration, mass and speed must be positive");
    if (rates.watts.empty()) return 0.0;
    const std::size_t n = rates.watts.front().size();
    double total = 0.0;
    for (const auto& w : rates.watts) {
        if (w.size() != n)
            throw validation_error("ragged rate curve for trial " + trial.id);
        for (double x : w) total += clamp_nonneg && x < 0.0 ? 0.0 : x;
    }
    // One cycle on a periodic grid: closed trapezoid collapses to dt * sum.
    const double dt = trial.duration_s / trial.grid;
    return dt * total /
           (trial.duration_s * trial.subject.mass_kg *
            trial.condition.speed_mps);
}

double trial_cost(ModelId id, const GaitTrial& trial,
                  const ModelParamSet& params, bool clamp_nonneg,
                  const HillConfig& hc) {
    return cost_from_rates(rate_curve(id, trial, params, hc), trial,
                           clamp_nonneg);
}

} // namespace metacost
