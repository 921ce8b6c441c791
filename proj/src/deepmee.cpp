#include "metacost/deepmee.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "metacost/error.hpp"
#include "metacost/parallel.hpp"

namespace metacost {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
    h ^= h >> 31;
    return h;
}

std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double u01(std::uint64_t& s) { return (splitmix(s) >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle_indices(std::vector<T>& idx, std::uint64_t& s) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[splitmix(s) % i]);
}

const std::vector<std::string> kMuscleFeatures = {
    "lce", "vce", "a", "f_max", "r_ft", "width", "l_opt", "e"};
const std::vector<std::string> kJointFeatures = {"q", "qdot", "qddot", "M"};

} // namespace

const std::vector<std::string>& feature_names(FeatureSpace space) {
    return space == FeatureSpace::muscle ? kMuscleFeatures : kJointFeatures;
}

std::vector<FeatureSet> enumerate_feature_sets(FeatureSpace space) {
    const std::uint32_t n = feature_names(space).size();
    std::vector<FeatureSet> out;
    out.reserve((1u << n) - 1);
    for (std::uint32_t m = 1; m < (1u << n); ++m)
        out.push_back({space, m});
    return out;
}

std::string feature_set_name(const FeatureSet& fs) {
    const auto& names = feature_names(fs.space);
    std::string s;
    for (std::size_t b = 0; b < names.size(); ++b)
        if (fs.mask & (1u << b)) {
            if (!s.empty()) s += '+';
            s += names[b];
        }
    return s;
}

std::size_t feature_count(const FeatureSet& fs) {
    std::size_t n = 0;
    for (std::uint32_t m = fs.mask; m; m >>= 1) n += m & 1u;
    return n;
}

std::vector<std::vector<double>> feature_rows(const GaitTrial& trial,
                                              const FeatureSet& fs) {
    const std::size_t nbits = feature_names(fs.space).size();
    if (fs.mask == 0 || fs.mask >= (1u << nbits))
        throw validation_error("invalid feature mask");
    std::vector<std::size_t> bits;
    for (std::size_t b = 0; b < nbits; ++b)
        if (fs.mask & (1u << b)) bits.push_back(b);

    std::vector<std::vector<double>> rows;
    if (fs.space == FeatureSpace::muscle) {
        rows.reserve(trial.muscles.size() * trial.grid);
        for (const auto& mc : trial.muscles)
            for (const auto& s : mc.series) {
                const double all[8] = {s.lce_norm,       s.vce_norm,
                                       s.act,            mc.params.f_max_n,
                                       mc.params.r_ft,   mc.params.width,
                                       mc.params.l_ce_opt_m, s.stim};
                std::vector<double> row(bits.size());
                for (std::size_t i = 0; i < bits.size(); ++i)
                    row[i] = all[bits[i]];
                rows.push_back(std::move(row));
            }
    } else {
        rows.reserve(trial.joints.size() * trial.grid);
        for (const auto& jc : trial.joints)
            for (const auto& s : jc.series) {
                const double all[4] = {s.q, s.qdot, s.qddot, s.moment};
                std::vector<double> row(bits.size());
                for (std::size_t i = 0; i < bits.size(); ++i)
                    row[i] = all[bits[i]];
                rows.push_back(std::move(row));
            }
    }
    return rows;
}

void Scaler::fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw validation_error("scaler fit on empty data");
    const std::size_t n = rows.front().size();
    lo.assign(n, std::numeric_limits<double>::infinity());
    hi.assign(n, -std::numeric_limits<double>::infinity());
    for (const auto& r : rows) {
        if (r.size() != n) throw validation_error("scaler: ragged rows");
        for (std::size_t c = 0; c < n; ++c) {
            lo[c] = std::min(lo[c], r[c]);
            hi[c] = std::max(hi[c], r[c]);
        }
    }
}

void Scaler::transform(std::vector<double>& row) const {
    if (row.size() != lo.size())
        throw validation_error("scaler: row size mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) {
        const double span = hi[c] - lo[c];
        row[c] = span > 0.0 ? (row[c] - lo[c]) / span : 0.0;
    }
}

std::vector<double> Scaler::inverse(const std::vector<double>& row) const {
    if (row.size() != lo.size())
        throw validation_error("scaler: row size mismatch");
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c)
        out[c] = lo[c] + row[c] * (hi[c] - lo[c]);
    return out;
}

double aggregate_cost(const RateCurve& rates, const GaitTrial& trial) {
    return cost_from_rates(rates, trial);
}

RateCurve predict_rate_curve(const TrainedMlp& tm, const GaitTrial& trial) {
    auto rows = feature_rows(trial, tm.features);
    RateCurve rc;
    const std::size_t n_ch = tm.features.space == FeatureSpace::muscle
                                 ? trial.muscles.size()
                                 : trial.joints.size();
    const std::size_t grid = trial.grid;
    if (rows.size() != n_ch * grid)
        throw validation_error("feature rows do not tile the trial grid");
    std::size_t r = 0;
    for (std::size_t c = 0; c < n_ch; ++c) {
        rc.channels.push_back(tm.features.space == FeatureSpace::muscle
                                  ? trial.muscles[c].name
                                  : trial.joints[c].name);
        std::vector<double> w(grid);
        for (std::size_t k = 0; k < grid; ++k, ++r) {
            tm.scaler.transform(rows[r]);
            w[k] = tm.net.forward(rows[r]);
        }
        rc.watts.push_back(std::move(w));
    }
    return rc;
}

double predict_trial_cost(const TrainedMlp& tm, const GaitTrial& trial) {
    return aggregate_cost(predict_rate_curve(tm, trial), trial);
}

namespace {

// Scaled feature rows of one trial plus the constants that turn a summed
// rate into a cost: cost = sum(outputs) * k_cost.
struct TrialBatch {
    std::vector<std::vector<double>> rows;
    double k_cost = 0.0;
    double measured = 0.0;
};

TrialBatch make_batch(const GaitTrial& t, const FeatureSet& fs,
                      const Scaler& sc) {
    TrialBatch b;
    b.rows = feature_rows(t, fs);
    for (auto& r : b.rows) sc.transform(r);
    b.k_cost = 1.0 / (t.grid * t.subject.mass_kg * t.condition.speed_mps);
    b.measured = t.measured_cost;
    return b;
}

double batch_cost(const Mlp& net, const TrialBatch& b) {
    double s = 0.0;
    for (const auto& r : b.rows) s += net.forward(r);
    return s * b.k_cost;
}

} // namespace

TrainedMlp train_inexact(const MlpSpec& spec, const Dataset& fold,
                         const FeatureSet& fs) {
    if (fold.trials.empty())
        throw validation_error("train_inexact: empty fold");
    if (spec.batch < 1) throw validation_error("batch size must be >= 1");

    // Per-trial 70/30 split, seeded; at least one trial on each side when
    // the fold allows it.
    std::vector<std::size_t> order(fold.trials.size());
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t rng = mix(spec.seed, 0x5eed);
    shuffle_indices(order, rng);
    std::size_t n_train = (order.size() * 7 + 9) / 10;
    if (n_train == order.size() && order.size() >= 2) --n_train;
    if (n_train == 0) n_train = 1;
    const std::vector<std::size_t> train_idx(order.begin(),
                                             order.begin() + n_train);
    std::vector<std::size_t> val_idx(order.begin() + n_train, order.end());
    if (val_idx.empty()) val_idx = train_idx;

    TrainedMlp tm{spec,
                  fs,
                  Scaler{},
                  Mlp(feature_count(fs), spec.hidden, spec.act, spec.seed),
                  {},
                  {},
                  0.0};

    std::vector<std::vector<double>> fit_rows;
    for (std::size_t t : train_idx) {
        auto rows = feature_rows(fold.trials[t], fs);
        fit_rows.insert(fit_rows.end(), rows.begin(), rows.end());
    }
    tm.scaler.fit(fit_rows);

    std::vector<TrialBatch> train, val;
    for (std::size_t t : train_idx)
        train.push_back(make_batch(fold.trials[t], fs, tm.scaler));
    for (std::size_t t : val_idx)
        val.push_back(make_batch(fold.trials[t], fs, tm.scaler));

    auto mse = [&](const std::vector<TrialBatch>& set) {
        double acc = 0.0;
        for (const auto& b : set) {
            const double e = batch_cost(tm.net, b) - b.measured;
            acc += e * e;
        }
        return acc / set.size();
    };

    std::vector<double> params = tm.net.flat_params();
    std::vector<double> grad(params.size());
    Adam adam(params.size(), spec.lr, spec.weight_decay);

    std::vector<double> best = params;
    tm.best_val_mse = mse(val);
    int stale = 0;

    std::vector<std::size_t> epoch_order(train.size());
    std::iota(epoch_order.begin(), epoch_order.end(), 0);

    for (int epoch = 0; epoch < spec.max_epochs; ++epoch) {
        shuffle_indices(epoch_order, rng);
        for (std::size_t at = 0; at < epoch_order.size();
             at += spec.batch) {
            const std::size_t bn =
                std::min<std::size_t>(spec.batch, epoch_order.size() - at);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = 0; i < bn; ++i) {
                const TrialBatch& b = train[epoch_order[at + i]];
                const double cost = batch_cost(tm.net, b);
                const double gout =
                    2.0 * (cost - b.measured) * b.k_cost / bn;
                for (const auto& r : b.rows)
                    tm.net.accumulate_grad(r, gout, grad);
            }
            adam.step(params, grad);
            tm.net.set_flat_params(params);
        }

        const double train_mse = mse(train);
        const double val_mse = mse(val);
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse))
            throw numerical_error(
                "training diverged at epoch " + std::to_string(epoch) +
                " (features " + feature_set_name(fs) + ", lr " +
                std::to_string(spec.lr) + ")");
        tm.train_history.push_back(train_mse);
        tm.val_history.push_back(val_mse);

        if (val_mse < tm.best_val_mse) {
            tm.best_val_mse = val_mse;
            best = params;
            stale = 0;
        } else if (++stale > spec.patience) {
            break;
        }
    }
    tm.net.set_flat_params(best);
    return tm;
}

std::string trained_mlp_json(const TrainedMlp& tm) {
    nlohmann::json j;
    j["features"] = {{"space", tm.features.space == FeatureSpace::muscle
                                   ? "muscle"
                                   : "joint"},
                     {"mask", tm.features.mask},
                     {"names", feature_set_name(tm.features)}};
    j["spec"] = {{"hidden", tm.spec.hidden},
                 {"activation", tm.spec.act == Activation::relu
                                    ? "relu"
                                    : "leaky_relu"},
                 {"lr", tm.spec.lr},
                 {"weight_decay", tm.spec.weight_decay},
                 {"batch", tm.spec.batch},
                 {"max_epochs", tm.spec.max_epochs},
                 {"patience", tm.spec.patience},
                 {"seed", tm.spec.seed}};
    j["scaler"] = {{"lo", tm.scaler.lo}, {"hi", tm.scaler.hi}};
    j["params"] = tm.net.flat_params();
    j["train_history"] = tm.train_history;
    j["val_history"] = tm.val_history;
    j["best_val_mse"] = tm.best_val_mse;
    return j.dump(2);
}

MlpSpec draw_spec(const SweepBudget& budget, std::uint64_t key) {
    std::uint64_t s = mix(budget.seed, key);
    MlpSpec sp;
    const int n_layers = 1 + static_cast<int>(u01(s) * budget.max_layers);
    sp.hidden.clear();
    for (int l = 0; l < std::min(n_layers, budget.max_layers); ++l)
        sp.hidden.push_back(budget.width_choices[static_cast<std::size_t>(
            u01(s) * budget.width_choices.size())]);
    sp.act = u01(s) < 0.5 ? Activation::relu : Activation::leaky_relu;
    sp.lr = std::exp(std::log(budget.lr_lo) +
                     u01(s) * (std::log(budget.lr_hi) -
                               std::log(budget.lr_lo)));
    sp.weight_decay = std::exp(std::log(budget.wd_lo) +
                               u01(s) * (std::log(budget.wd_hi) -
                                         std::log(budget.wd_lo)));
    sp.batch = budget.batch_choices[static_cast<std::size_t>(
        u01(s) * budget.batch_choices.size())];
    sp.max_epochs = budget.max_epochs;
    sp.patience = budget.patience;
    sp.seed = mix(s, 0xfeed);
    return sp;
}

std::vector<SweepRow> feature_sweep(FeatureSpace space, const Dataset& data,
                                    const SweepBudget& budget,
                                    unsigned jobs) {
    const auto subjects = data.subject_ids();
    if (subjects.size() < 2)
        throw validation_error("feature sweep needs at least 2 subjects");
    const auto sets = enumerate_feature_sets(space);
    std::vector<SweepRow> rows(sets.size());

    parallel_for(sets.size(), jobs, [&](std::size_t fi) {
        const FeatureSet fs = sets[fi];

        auto split = [&](const std::string& held_out) {
            Dataset train;
            std::vector<std::size_t> test;
            for (std::size_t t = 0; t < data.trials.size(); ++t) {
                if (data.trials[t].subject.id == held_out)
                    test.push_back(t);
                else
                    train.trials.push_back(data.trials[t]);
            }
            return std::make_pair(std::move(train), std::move(test));
        };

        // Hyperparameter search on the first fold only.
        const Dataset train0 = split(subjects.front()).first;
        MlpSpec chosen;
        double chosen_score = std::numeric_limits<double>::infinity();
        for (int d = 0; d < budget.hyper_draws; ++d) {
            MlpSpec cand = draw_spec(budget, mix(fs.mask, d));
            double score;
            try {
                score = train_inexact(cand, train0, fs).best_val_mse;
            } catch (const numerical_error&) {
                continue; // diverged draw, keep searching
            }
            if (score < chosen_score) {
                chosen_score = score;
                chosen = cand;
            }
        }
        if (!std::isfinite(chosen_score))
            throw numerical_error("all hyperparameter draws diverged for " +
                                  feature_set_name(fs));

        std::vector<double> pred(data.trials.size(), 0.0);
        for (std::size_t f = 0; f < subjects.size(); ++f) {
            auto [train, test] = split(subjects[f]);
            MlpSpec sp = chosen;
            sp.seed = mix(chosen.seed, 1000 + f);
            const TrainedMlp tm = train_inexact(sp, train, fs);
            for (std::size_t t : test)
                pred[t] = predict_trial_cost(tm, data.trials[t]);
        }
        double acc = 0.0;
        for (std::size_t t = 0; t < data.trials.size(); ++t) {
            const double e = pred[t] - data.trials[t].measured_cost;
            acc += e * e;
        }
        rows[fi] = {fs, feature_set_name(fs), chosen,
                    std::sqrt(acc / data.trials.size())};
    });

    std::sort(rows.begin(), rows.end(),
              [](const SweepRow& a, const SweepRow& b) {
                  if (a.loo_rmse != b.loo_rmse)
                      return a.loo_rmse < b.loo_rmse;
                  return a.features.mask < b.features.mask;
              });
    return rows;
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepRow>& rows) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot write " + path);
    f << "space,mask,features,rmse\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.loo_rmse);
        f << (r.features.space == FeatureSpace::muscle ? "muscle" : "joint")
          << ',' << r.features.mask << ',' << r.name << ',' << buf << '\n';
    }
    if (!f.good()) throw io_error("write failed: " + path);
}

void write_pair_heatmap_csv(const std::string& path,
                            const std::vector<SweepRow>& rows,
                            FeatureSpace space) {
    const auto& names = feature_names(space);
    std::ofstream f(path);
    if (!f) throw io_error("cannot write " + path);
    f << "feature_row,feature_col,rmse\n";
    char buf[32];
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i; j < names.size(); ++j) {
            const std::uint32_t mask = (1u << i) | (1u << j);
            for (const auto& r : rows)
                if (r.features.space == space && r.features.mask == mask) {
                    std::snprintf(buf, sizeof buf, "%.6g", r.loo_rmse);
                    f << names[i] << ',' << names[j] << ',' << buf << '\n';
                    break;
                }
        }
    if (!f.good()) throw io_error("write failed: " + path);
}

} // namespace metacost
