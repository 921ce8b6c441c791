#include "metacost/qmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "metacost/error.hpp"
#include "metacost/parallel.hpp"
#include "metacost/sobol.hpp"

namespace metacost {

SampleMatrix scale_to_ranges(const std::vector<std::vector<double>>& points,
                             const std::vector<ParamRange>& ranges) {
    for (const auto& r : ranges)
        if (!(r.lo < r.hi))
            throw validation_error("sampling range must satisfy lo < hi");
    SampleMatrix m;
    m.n_params = ranges.size();
    m.rows.reserve(points.size());
    for (const auto& p : points) {
        if (p.size() != ranges.size())
            throw validation_error("point dimension does not match ranges");
        std::vector<double> row(p.size());
        for (std::size_t c = 0; c < p.size(); ++c)
            row[c] = ranges[c].lo + p[c] * (ranges[c].hi - ranges[c].lo);
        m.rows.push_back(std::move(row));
    }
    return m;
}

SampleMatrix saltelli_matrix(std::size_t dim, std::size_t n,
                             std::uint64_t skip) {
    const auto pts = sobol_points(2 * dim, n, skip);
    SampleMatrix m;
    m.n_params = dim;
    m.rows.reserve(n * (dim + 2));
    for (const auto& p : pts) // A
        m.rows.emplace_back(p.begin(), p.begin() + dim);
    for (const auto& p : pts) // B
        m.rows.emplace_back(p.begin() + dim, p.end());
    for (std::size_t i = 0; i < dim; ++i) // AB_i
        for (const auto& p : pts) {
            std::vector<double> row(p.begin(), p.begin() + dim);
            row[i] = p[dim + i];
            m.rows.push_back(std::move(row));
        }
    return m;
}

std::vector<std::vector<double>> mc_cost_matrix(ModelId model,
                                                const Dataset& data,
                                                const SampleMatrix& samples,
                                                unsigned jobs,
                                                bool clamp_nonneg) {
    if (samples.n_params != model_arity(model))
        throw validation_error("sample width does not match model arity");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> costs(
        samples.n_samples(), std::vector<double>(data.trials.size(), inf));

    parallel_for(samples.n_samples(), jobs, [&](std::size_t s) {
        ModelParamSet ps;
        ps.model = model;
        ps.values = samples.rows[s];
        bool ok = true;
        std::vector<double> row(data.trials.size(), inf);
        for (std::size_t t = 0; t < data.trials.size() && ok; ++t) {
            double c;
            try {
                c = trial_cost(model, data.trials[t], ps, clamp_nonneg);
            } catch (const numerical_error&) {
                ok = false;
                break;
            }
            if (!std::isfinite(c)) {
                ok = false;
                break;
            }
            row[t] = c;
        }
        if (ok) costs[s] = std::move(row);
    });
    return costs;
}

std::vector<double> rmse_per_sample(
    const std::vector<std::vector<double>>& cost_matrix, const Dataset& data) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> out(cost_matrix.size(), inf);
    for (std::size_t s = 0; s < cost_matrix.size(); ++s) {
        double acc = 0.0;
        bool ok = true;
        for (std::size_t t = 0; t < data.trials.size(); ++t) {
            const double e = cost_matrix[s][t] - data.trials[t].measured_cost;
            if (!std::isfinite(e)) {
                ok = false;
                break;
            }
            acc += e * e;
        }
        if (ok && !data.trials.empty())
            out[s] = std::sqrt(acc / data.trials.size());
    }
    return out;
}

std::vector<double> mc_evaluate(ModelId model, const Dataset& data,
                                const SampleMatrix& samples, unsigned jobs,
                                bool clamp_nonneg) {
    return rmse_per_sample(mc_cost_matrix(model, data, samples, jobs,
                                          clamp_nonneg),
                           data);
}

std::vector<std::size_t> behavioural_split(const std::vector<double>& rmse,
                                           std::size_t K) {
    std::size_t finite = 0;
    for (double r : rmse)
        if (std::isfinite(r)) ++finite;
    if (K > finite)
        throw validation_error("behavioural split needs " + std::to_string(K) +
                               " finite samples, have " +
                               std::to_string(finite));
    std::vector<std::size_t> idx(rmse.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + K, idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (rmse[a] != rmse[b]) return rmse[a] < rmse[b];
                          return a < b;
                      });
    idx.resize(K);
    return idx;
}

std::vector<KsResult> sensitivity_indices(
    const SampleMatrix& samples, const std::vector<std::size_t>& behavioural,
    bool vs_rest) {
    if (behavioural.empty())
        throw validation_error("empty behavioural set");
    std::vector<char> in_beh(samples.n_samples(), 0);
    for (std::size_t i : behavioural) {
        if (i >= samples.n_samples())
            throw validation_error("behavioural index out of range");
        in_beh[i] = 1;
    }
    std::vector<KsResult> out;
    out.reserve(samples.n_params);
    std::vector<double> beh, ref;
    for (std::size_t c = 0; c < samples.n_params; ++c) {
        beh.clear();
        ref.clear();
        for (std::size_t s = 0; s < samples.n_samples(); ++s) {
            const double v = samples.rows[s][c];
            if (in_beh[s])
                beh.push_back(v);
            else if (vs_rest)
                ref.push_back(v);
            if (!vs_rest) ref.push_back(v);
        }
        out.push_back(ks_two_sample(beh, ref));
    }
    return out;
}

McRun run_sensitivity(ModelId model, const Dataset& data, std::size_t n,
                      std::size_t K, std::uint64_t skip, unsigned jobs,
                      bool clamp_nonneg, bool vs_rest,
                      const std::vector<ParamRange>* ranges_override) {
    const ModelParamSet base = original_params(model);
    McRun run;
    run.model = model;
    run.n_samples = n;
    run.behavioural_k = K;
    run.skip = skip;
    run.clamp_nonneg = clamp_nonneg;
    run.vs_rest = vs_rest;
    run.param_names = base.names;
    run.ranges = ranges_override ? *ranges_override : base.ranges;
    if (run.ranges.size() != base.values.size())
        throw validation_error("range override width does not match arity");

    run.samples =
        scale_to_ranges(sobol_points(base.values.size(), n, skip), run.ranges);
    run.rmse = mc_evaluate(model, data, run.samples, jobs, clamp_nonneg);
    run.behavioural_idx = behavioural_split(run.rmse, K);
    run.indices = sensitivity_indices(run.samples, run.behavioural_idx,
                                      vs_rest);
    run.best_params.reserve(K);
    for (std::size_t i : run.behavioural_idx)
        run.best_params.push_back(run.samples.rows[i]);
    return run;
}

std::string mc_run_json(const McRun& run) {
    nlohmann::json j;
    j["model"] = model_name(run.model);
    j["n_samples"] = run.n_samples;
    j["behavioural_k"] = run.behavioural_k;
    j["skip"] = run.skip;
    j["clamp_nonneg"] = run.clamp_nonneg;
    j["vs_rest"] = run.vs_rest;
    nlohmann::json ranges = nlohmann::json::array();
    for (std::size_t c = 0; c < run.ranges.size(); ++c)
        ranges.push_back({{"name", run.param_names[c]},
                          {"lo", run.ranges[c].lo},
                          {"hi", run.ranges[c].hi}});
    j["ranges"] = ranges;
    nlohmann::json indices = nlohmann::json::array();
    for (std::size_t c = 0; c < run.indices.size(); ++c)
        indices.push_back({{"name", run.param_names[c]},
                           {"ks", run.indices[c].statistic},
                           {"p", run.indices[c].p_value}});
    j["indices"] = indices;
    j["behavioural_idx"] = run.behavioural_idx;
    nlohmann::json best = nlohmann::json::array();
    for (std::size_t k = 0; k < run.best_params.size(); ++k)
        best.push_back({{"rank", k},
                        {"rmse", run.rmse[run.behavioural_idx[k]]},
                        {"params", run.best_params[k]}});
    j["best"] = best;
    return j.dump(2);
}

void write_mc_csv(const std::string& path, const SampleMatrix& samples,
                  const std::vector<double>& rmse,
                  const std::vector<std::string>& param_names) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot write " + path);
    for (std::size_t c = 0; c < param_names.size(); ++c)
        f << param_names[c] << ',';
    f << "rmse\n";
    char buf[32];
    for (std::size_t s = 0; s < samples.n_samples(); ++s) {
        for (double v : samples.rows[s]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            f << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", rmse[s]);
        f << buf << '\n';
    }
    if (!f.good()) throw io_error("write failed: " + path);
}

} // namespace metacost
