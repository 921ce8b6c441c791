#include "metacost/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "metacost/error.hpp"

namespace metacost {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Stateless keyed hashing keeps every drawn quantity a pure function of
// (seed, subject, channel, tag), so trials never depend on generation order.
std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

double u01(std::uint64_t h) { return (h >> 11) * 0x1.0p-53; }

double uniform(std::uint64_t h, double lo, double hi) {
    return lo + u01(h) * (hi - lo);
}

double clip01(double x) { return std::clamp(x, 0.01, 1.0); }

} // namespace

GaitTrial synth_trial(const SynthSpec& spec, std::size_t subject_idx,
                      double speed, double incline) {
    if (spec.duration_s <= 0.0)
        throw validation_error("synth duration must be > 0");
    if (spec.grid < 2) throw validation_error("synth grid must be >= 2");
    if (speed <= 0.0) throw validation_error("synth speed must be > 0");

    const std::uint64_t sub = mix(mix(spec.seed, 1), subject_idx);

    GaitTrial t;
    char buf[64];
    std::snprintf(buf, sizeof buf, "S%02zu_v%.2f_i%+.2f", subject_idx, speed,
                  incline);
    t.id = buf;
    std::snprintf(buf, sizeof buf, "S%02zu", subject_idx);
    t.subject.id = buf;
    t.subject.mass_kg = uniform(mix(sub, 2), 55.0, 90.0);
    t.subject.height_m = uniform(mix(sub, 3), 1.55, 1.90);
    t.condition.speed_mps = speed;
    t.condition.incline = incline;
    t.duration_s = spec.duration_s / std::sqrt(speed);
    t.grid = spec.grid;

    const double omega = 2.0 * kPi / t.duration_s;
    const double psi = spec.incline_phase_gain * incline;

    for (std::size_t j = 0; j < spec.n_muscles; ++j) {
        const std::uint64_t mh = mix(sub, 100 + j);
        // Muscle properties live in the dataset-wide muscle table, so they
        // are keyed on (seed, muscle) only; subjects differ through mass,
        // phases and amplitudes.
        const std::uint64_t gm = mix(mix(spec.seed, 9), 100 + j);
        MuscleChannel ch;
        std::snprintf(buf, sizeof buf, "mus%02zu", j);
        ch.name = buf;
        ch.params.f_max_n = uniform(mix(gm, 1), spec.f_max_lo, spec.f_max_hi);
        ch.params.l_ce_opt_m =
            uniform(mix(gm, 2), spec.l_opt_lo, spec.l_opt_hi);
        const double phi = uniform(mix(mh, 3), 0.0, 2.0 * kPi);
        const double psi0 = uniform(mix(mh, 4), 0.0, 2.0 * kPi);
        const double amp_l = spec.len_amp * uniform(mix(mh, 5), 0.6, 1.0);
        const double amp_a = spec.act_amp * (0.8 + 0.2 * speed);

        ch.series.resize(spec.grid);
        for (int k = 0; k < spec.grid; ++k) {
            const double th = 2.0 * kPi * k / spec.grid;
            MuscleState& s = ch.series[k];
            s.lce_norm = 1.0 + amp_l * std::sin(th + phi);
            s.vce_norm = -amp_l * omega * std::cos(th + phi);
            s.act = clip01(spec.act_base + amp_a * std::sin(th + phi + psi0 + psi));
            s.stim = clip01(spec.act_base +
                            amp_a * std::sin(th + phi + psi0 + psi + 0.3));
        }
        t.muscles.push_back(std::move(ch));
    }

    for (std::size_t j = 0; j < spec.n_joints; ++j) {
        const std::uint64_t jh = mix(sub, 200 + j);
        JointChannel ch;
        std::snprintf(buf, sizeof buf, "jnt%02zu", j);
        ch.name = buf;
        const double q_amp = uniform(mix(jh, 1), 0.2, 0.6);
        const double m_amp = uniform(mix(jh, 2), 30.0, 120.0) * speed *
                             (1.0 + incline);
        const double chi = uniform(mix(jh, 3), 0.0, 2.0 * kPi);
        const double delta = uniform(mix(jh, 4), 0.0, 2.0 * kPi);
        ch.series.resize(spec.grid);
        for (int k = 0; k < spec.grid; ++k) {
            const double th = 2.0 * kPi * k / spec.grid;
            JointState& s = ch.series[k];
            s.q = q_amp * std::sin(th + chi);
            s.qdot = q_amp * omega * std::cos(th + chi);
            s.qddot = -q_amp * omega * omega * std::sin(th + chi);
            s.moment = m_amp * std::sin(th + chi + delta);
        }
        t.joints.push_back(std::move(ch));
    }

    switch (spec.source) {
        case CostSource::model: {
            ModelParamSet ps = original_params(spec.model);
            if (spec.model_params.size() != ps.values.size())
                throw validation_error("synth model_params arity mismatch");
            ps.values = spec.model_params;
            t.measured_cost = trial_cost(spec.model, t, ps);
            break;
        }
        case CostSource::constant_rate:
            t.measured_cost = spec.constant_rate_w /
                              (t.subject.mass_kg * t.condition.speed_mps);
            break;
        case CostSource::features: {
            RateCurve rc;
            for (const auto& mc : t.muscles) {
                rc.channels.push_back(mc.name);
                std::vector<double> w(mc.series.size());
                for (std::size_t k = 0; k < w.size(); ++k)
                    w[k] = spec.feature_scale * mc.series[k].act *
                           std::abs(mc.series[k].vce_norm);
                rc.watts.push_back(std::move(w));
            }
            t.measured_cost = cost_from_rates(rc, t);
            break;
        }
    }
    return t;
}

Dataset synth_dataset(const SynthSpec& spec) {
    Dataset ds;
    for (std::size_t s = 0; s < spec.n_subjects; ++s)
        for (double v : spec.speeds)
            for (double g : spec.inclines)
                ds.trials.push_back(synth_trial(spec, s, v, g));
    return ds;
}

} // namespace metacost
