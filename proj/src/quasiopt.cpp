#include "metacost/quasiopt.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "metacost/error.hpp"

namespace metacost {

LooReport loo_quasi_opt(ModelId model, const Dataset& data,
                        const SampleMatrix& samples, unsigned jobs,
                        bool clamp_nonneg) {
    const auto subjects = data.subject_ids();
    if (subjects.size() < 2)
        throw validation_error("LOO needs at least 2 subjects");

    // One evaluation of every sample on every trial; folds only re-slice it.
    const auto costs = mc_cost_matrix(model, data, samples, jobs,
                                      clamp_nonneg);
    const double inf = std::numeric_limits<double>::infinity();

    LooReport rep;
    rep.model = model;
    rep.pooled.resize(data.trials.size());

    for (const auto& subject : subjects) {
        std::vector<std::size_t> train, test;
        for (std::size_t t = 0; t < data.trials.size(); ++t)
            (data.trials[t].subject.id == subject ? test : train).push_back(t);

        std::size_t best = samples.n_samples();
        double best_rmse = inf;
        for (std::size_t s = 0; s < samples.n_samples(); ++s) {
            double acc = 0.0;
            bool ok = true;
            for (std::size_t t : train) {
                const double e = costs[s][t] - data.trials[t].measured_cost;
                if (!std::isfinite(e)) {
                    ok = false;
                    break;
                }
                acc += e * e;
            }
            if (!ok) continue;
            const double r = std::sqrt(acc / train.size());
            if (r < best_rmse) {
                best_rmse = r;
                best = s;
            }
        }
        if (best == samples.n_samples())
            throw validation_error("no finite-RMSE sample for fold " +
                                   subject);

        LooFold fold;
        fold.subject = subject;
        fold.sample_idx = best;
        fold.params = samples.rows[best];
        fold.train_rmse = best_rmse;
        double acc = 0.0;
        for (std::size_t t : test) {
            const double e = costs[best][t] - data.trials[t].measured_cost;
            acc += e * e;
            rep.pooled[t] = {subject, costs[best][t],
                             data.trials[t].measured_cost};
        }
        fold.test_rmse = std::sqrt(acc / test.size());
        rep.folds.push_back(std::move(fold));
    }

    rep.pooled_rmse = rmse(rep.pooled);
    rep.pooled_rmc = rmcorr(rep.pooled);
    return rep;
}

std::string loo_report_json(const LooReport& rep) {
    nlohmann::json j;
    j["model"] = model_name(rep.model);
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : rep.folds)
        folds.push_back({{"subject", f.subject},
                         {"sample_idx", f.sample_idx},
                         {"params", f.params},
                         {"train_rmse", f.train_rmse},
                         {"test_rmse", f.test_rmse}});
    j["folds"] = folds;
    j["pooled_rmse"] = rep.pooled_rmse;
    j["pooled_rmc"] = {{"r", rep.pooled_rmc.r},
                       {"p", rep.pooled_rmc.p_value},
                       {"df", rep.pooled_rmc.df}};
    return j.dump(2);
}

ImprovementSummary improvement_summary(const std::vector<double>& original,
                                       const std::vector<double>& quasi) {
    if (original.size() != quasi.size())
        throw validation_error("improvement_summary: length mismatch");
    ImprovementSummary s;
    s.percent.reserve(original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        if (original[i] == 0.0)
            throw numerical_error("improvement_summary: zero original score");
        s.percent.push_back(100.0 * (original[i] - quasi[i]) / original[i]);
    }
    for (double p : s.percent) s.mean += p;
    s.mean /= s.percent.size();
    if (s.percent.size() > 1) {
        double acc = 0.0;
        for (double p : s.percent) acc += (p - s.mean) * (p - s.mean);
        s.sd = std::sqrt(acc / (s.percent.size() - 1));
    }
    return s;
}

std::string score_table_text(const std::vector<ScoreRow>& rows) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s %14s %14s %14s %14s\n", "Model",
                  "RMC orig", "RMSE orig", "RMC quasi", "RMSE quasi");
    out += buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-8s %14.2f %14.2f %14.2f %14.2f\n",
                      r.model.c_str(), r.rmc_orig, r.rmse_orig, r.rmc_quasi,
                      r.rmse_quasi);
        out += buf;
    }
    return out;
}

double model_waveform_cmc(
    const Dataset& data,
    const std::vector<std::pair<ModelId, ModelParamSet>>& models,
    const HillConfig& hc) {
    if (models.size() < 2)
        throw validation_error("waveform CMC needs at least 2 models");
    const bool muscle_space = model_uses_muscles(models.front().first);
    for (const auto& [id, ps] : models)
        if (model_uses_muscles(id) != muscle_space)
            throw validation_error(
                "waveform CMC requires models sharing one space");

    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& trial : data.trials) {
        std::vector<RateCurve> curves;
        curves.reserve(models.size());
        for (const auto& [id, ps] : models)
            curves.push_back(rate_curve(id, trial, ps, hc));
        const std::size_t n_ch = curves.front().channels.size();
        for (std::size_t c = 0; c < n_ch; ++c) {
            WaveformSet ws;
            for (const auto& rc : curves) ws.waveforms.push_back(rc.watts[c]);
            acc += cmc(ws).value;
            ++count;
        }
    }
    if (count == 0) throw validation_error("waveform CMC: no channels");
    return acc / count;
}

} // namespace metacost
