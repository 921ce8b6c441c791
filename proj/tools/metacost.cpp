#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metacost/dataset.hpp"
#include "metacost/deepmee.hpp"
#include "metacost/error.hpp"
#include "metacost/metrics.hpp"
#include "metacost/models.hpp"
#include "metacost/qmc.hpp"
#include "metacost/quasiopt.hpp"
#include "metacost/sobol.hpp"
#include "metacost/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace metacost;

namespace {

struct Opts {
    std::string dataset;
    std::string out;
    std::vector<std::string> models{"MARG68", "MINE97", "LICH05", "KIMR15"};
    std::string space = "both";
    std::size_t samples = 100000;
    std::size_t behavioural = 100;
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    bool clamp_nonneg = false;
    bool vs_rest = false;
    bool curves = false;
    int draws = 30;
    int epochs = 500;
    int patience = 20;
    int max_layers = 4;
    std::vector<int> widths{16, 32, 64, 128, 256};

    // synth generator
    std::size_t subjects = 2;
    std::size_t muscles = 4;
    std::size_t joints = 2;
    int grid = 100;
    double duration = 1.1;
    std::string source = "model";
    std::string synth_model = "MARG68";
    std::vector<double> synth_params;
    double constant_rate = 280.0;
    double feature_scale = 30.0;
    std::vector<double> speeds{1.1, 1.6};
    std::vector<double> inclines{-0.08, 0.0, 0.08};
    double act_base = 0.3, act_amp = 0.25, len_amp = 0.12;
    double incline_phase_gain = 6.0;
};

json config_echo(const std::string& cmd, const Opts& o) {
    json j;
    j["command"] = cmd;
    j["dataset"] = o.dataset;
    j["out"] = o.out;
    j["models"] = o.models;
    j["space"] = o.space;
    j["samples"] = o.samples;
    j["behavioural"] = o.behavioural;
    j["seed"] = o.seed;
    j["jobs"] = o.jobs;
    j["clamp_nonneg"] = o.clamp_nonneg;
    j["vs_rest"] = o.vs_rest;
    j["draws"] = o.draws;
    j["epochs"] = o.epochs;
    j["patience"] = o.patience;
    return j;
}

void ensure_outdir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw io_error("cannot create output dir " + out);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw io_error("cannot write " + path);
    f << text;
    if (!f.good()) throw io_error("write failed: " + path);
}

// Every artifact set carries the effective configuration next to it.
void write_config(const std::string& out, const json& echo) {
    write_text(out + "/config.json", echo.dump(2) + "\n");
}

int cmd_validate(const Opts& o) {
    const Dataset ds = load_dataset(o.dataset);
    std::printf("OK: %zu trials, %zu subjects, grid %d\n", ds.trials.size(),
                ds.n_subjects(), ds.trials.front().grid);
    return 0;
}

int cmd_evaluate(const Opts& o) {
    const Dataset ds = load_dataset(o.dataset);
    ensure_outdir(o.out);
    const json echo = config_echo("evaluate", o);

    json out;
    out["config"] = echo;
    json per_model = json::array();

    std::string costs_csv = "trial,subject,measured";
    for (const auto& name : o.models) costs_csv += "," + name;
    costs_csv += "\n";
    std::vector<std::string> rows(ds.trials.size());
    for (std::size_t t = 0; t < ds.trials.size(); ++t) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", ds.trials[t].measured_cost);
        rows[t] = ds.trials[t].id + "," + ds.trials[t].subject.id + "," + buf;
    }

    for (const auto& name : o.models) {
        const ModelId id = model_from_name(name);
        const ModelParamSet ps = original_params(id);
        PairedCosts pc;
        for (std::size_t t = 0; t < ds.trials.size(); ++t) {
            const double c = trial_cost(id, ds.trials[t], ps, o.clamp_nonneg);
            pc.push_back({ds.trials[t].subject.id, c,
                          ds.trials[t].measured_cost});
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6g", c);
            rows[t] += std::string(",") + buf;
        }
        json jm;
        jm["model"] = name;
        jm["rmse"] = rmse(pc);
        try {
            const RmcorrResult rc = rmcorr(pc);
            jm["rmc"] = {{"r", rc.r}, {"p", rc.p_value}, {"df", rc.df}};
        } catch (const std::runtime_error& e) {
            jm["rmc"] = nullptr;
            jm["rmc_note"] = e.what();
        }
        per_model.push_back(jm);

        if (o.curves) {
            std::string csv = "trial,channel,sample,cycle_pct,watt_per_kg\n";
            char buf[160];
            for (const auto& trial : ds.trials) {
                const RateCurve rc = rate_curve(id, trial, ps);
                for (std::size_t c = 0; c < rc.channels.size(); ++c)
                    for (std::size_t k = 0; k < rc.watts[c].size(); ++k) {
                        std::snprintf(buf, sizeof buf, "%s,%s,%zu,%g,%.8g\n",
                                      trial.id.c_str(),
                                      rc.channels[c].c_str(), k,
                                      100.0 * k / trial.grid,
                                      rc.watts[c][k] / trial.subject.mass_kg);
                        csv += buf;
                    }
            }
            write_text(o.out + "/curves_" + name + ".csv", csv);
        }
    }
    out["models"] = per_model;

    for (const auto& r : rows) costs_csv += r + "\n";
    write_text(o.out + "/costs.csv", costs_csv);
    write_text(o.out + "/evaluate.json", out.dump(2) + "\n");
    write_config(o.out, echo);
    std::printf("%s\n", out["models"].dump(2).c_str());
    return 0;
}

int cmd_sense(const Opts& o) {
    const Dataset ds = load_dataset(o.dataset);
    ensure_outdir(o.out);
    const json echo = config_echo("sense", o);

    for (const auto& name : o.models) {
        const ModelId id = model_from_name(name);
        const McRun run =
            run_sensitivity(id, ds, o.samples, o.behavioural, o.seed, o.jobs,
                            o.clamp_nonneg, o.vs_rest);
        json j = json::parse(mc_run_json(run));
        j["config"] = echo;
        write_text(o.out + "/sense_" + name + ".json", j.dump(2) + "\n");
        write_mc_csv(o.out + "/samples_" + name + ".csv", run.samples,
                     run.rmse, run.param_names);
        std::printf("%s indices:", name.c_str());
        for (std::size_t c = 0; c < run.indices.size(); ++c)
            std::printf(" %s=%.3f(p=%.3g)", run.param_names[c].c_str(),
                        run.indices[c].statistic, run.indices[c].p_value);
        std::printf("\n");
    }
    write_config(o.out, echo);
    return 0;
}

int cmd_quasiopt(const Opts& o) {
    const Dataset ds = load_dataset(o.dataset);
    ensure_outdir(o.out);
    const json echo = config_echo("quasiopt", o);

    std::vector<ScoreRow> table;
    std::vector<double> rmse_orig, rmse_quasi;
    json out;
    out["config"] = echo;
    json per_model = json::array();

    for (const auto& name : o.models) {
        const ModelId id = model_from_name(name);
        const ModelParamSet ps = original_params(id);

        PairedCosts pc;
        for (const auto& trial : ds.trials)
            pc.push_back({trial.subject.id,
                          trial_cost(id, trial, ps, o.clamp_nonneg),
                          trial.measured_cost});
        ScoreRow row;
        row.model = name;
        row.rmse_orig = rmse(pc);

        const SampleMatrix samples = scale_to_ranges(
            sobol_points(ps.values.size(), o.samples, o.seed), ps.ranges);
        const LooReport rep =
            loo_quasi_opt(id, ds, samples, o.jobs, o.clamp_nonneg);
        row.rmse_quasi = rep.pooled_rmse;
        try {
            row.rmc_orig = rmcorr(pc).r;
            row.rmc_quasi = rep.pooled_rmc.r;
        } catch (const std::runtime_error&) {
            // single-subject datasets have no repeated-measures correlation
        }
        table.push_back(row);
        rmse_orig.push_back(row.rmse_orig);
        rmse_quasi.push_back(row.rmse_quasi);

        json j = json::parse(loo_report_json(rep));
        j["original_rmse"] = row.rmse_orig;
        per_model.push_back(j);
        write_text(o.out + "/loo_" + name + ".json", j.dump(2) + "\n");
    }
    out["models"] = per_model;

    out["improvement"] = nullptr;
    std::string imp_line = "improvement undefined (zero original RMSE)\n";
    try {
        const ImprovementSummary imp =
            improvement_summary(rmse_orig, rmse_quasi);
        out["improvement"] = {{"percent", imp.percent},
                              {"mean", imp.mean},
                              {"sd", imp.sd}};
        char buf[96];
        std::snprintf(buf, sizeof buf,
                      "mean RMSE improvement %.1f %% (sd %.1f)\n", imp.mean,
                      imp.sd);
        imp_line = buf;
    } catch (const numerical_error&) {
        // a model that reproduces the data exactly has no relative gain
    }
    const std::string table_txt = score_table_text(table);
    write_text(o.out + "/table.txt", table_txt);
    write_text(o.out + "/quasiopt.json", out.dump(2) + "\n");
    write_config(o.out, echo);
    std::printf("%s", table_txt.c_str());
    std::printf("%s", imp_line.c_str());
    return 0;
}

int cmd_sweep(const Opts& o) {
    const Dataset ds = load_dataset(o.dataset);
    ensure_outdir(o.out);
    const json echo = config_echo("sweep", o);

    SweepBudget budget;
    budget.hyper_draws = o.draws;
    budget.max_epochs = o.epochs;
    budget.patience = o.patience;
    budget.max_layers = o.max_layers;
    budget.width_choices = o.widths;
    budget.seed = o.seed;

    std::vector<FeatureSpace> spaces;
    if (o.space == "muscle" || o.space == "both")
        spaces.push_back(FeatureSpace::muscle);
    if (o.space == "joint" || o.space == "both")
        spaces.push_back(FeatureSpace::joint);
    if (spaces.empty())
        throw validation_error("space must be muscle, joint or both");

    for (FeatureSpace sp : spaces) {
        const char* tag = sp == FeatureSpace::muscle ? "muscle" : "joint";
        const auto rows = feature_sweep(sp, ds, budget, o.jobs);
        write_sweep_csv(o.out + "/sweep_" + tag + ".csv", rows);
        write_pair_heatmap_csv(o.out + "/heatmap_" + tag + ".csv", rows, sp);

        json j;
        j["config"] = echo;
        json top = json::array();
        for (std::size_t i = 0; i < rows.size() && i < 10; ++i)
            top.push_back({{"features", rows[i].name},
                           {"mask", rows[i].features.mask},
                           {"rmse", rows[i].loo_rmse}});
        j["top"] = top;
        write_text(o.out + std::string("/sweep_") + tag + ".json",
                   j.dump(2) + "\n");
        std::printf("%s best: %s (rmse %.4f)\n", tag, rows.front().name.c_str(),
                    rows.front().loo_rmse);
    }
    write_config(o.out, echo);
    return 0;
}

int cmd_synth(const Opts& o) {
    SynthSpec spec;
    spec.n_subjects = o.subjects;
    spec.speeds = o.speeds;
    spec.inclines = o.inclines;
    spec.n_muscles = o.muscles;
    spec.n_joints = o.joints;
    spec.grid = o.grid;
    spec.duration_s = o.duration;
    spec.seed = o.seed;
    spec.act_base = o.act_base;
    spec.act_amp = o.act_amp;
    spec.len_amp = o.len_amp;
    spec.incline_phase_gain = o.incline_phase_gain;
    spec.constant_rate_w = o.constant_rate;
    spec.feature_scale = o.feature_scale;
    if (o.source == "model") {
        spec.source = CostSource::model;
        spec.model = model_from_name(o.synth_model);
        spec.model_params = o.synth_params.empty()
                                ? original_params(spec.model).values
                                : o.synth_params;
    } else if (o.source == "constant") {
        spec.source = CostSource::constant_rate;
    } else if (o.source == "features") {
        spec.source = CostSource::features;
    } else {
        throw validation_error("source must be model, constant or features");
    }

    const Dataset ds = synth_dataset(spec);
    write_dataset(ds, o.out);
    json echo = config_echo("synth", o);
    echo["synth"] = {{"subjects", o.subjects},
                     {"muscles", o.muscles},
                     {"joints", o.joints},
                     {"grid", o.grid},
                     {"duration", o.duration},
                     {"source", o.source},
                     {"model", o.synth_model},
                     {"params", spec.model_params},
                     {"speeds", o.speeds},
                     {"inclines", o.inclines}};
    write_text(o.out + "/config.json", echo.dump(2) + "\n");
    std::printf("wrote %zu trials to %s\n", ds.trials.size(), o.out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Opts o;
    const char* env_out = std::getenv("METACOST_OUT");
    o.out = env_out ? env_out : ".";

    CLI::App app{"metabolic cost models for gait: evaluation, sensitivity "
                 "analysis, quasi-optimization and feature sweeps"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file");
    app.option_defaults()->configurable();

    auto add_common = [&](CLI::App* sub, bool needs_dataset) {
        if (needs_dataset)
            sub->add_option("--dataset", o.dataset, "dataset directory")
                ->required();
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--jobs", o.jobs, "worker threads")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "sequence skip / rng seed");
    };

    CLI::App* validate = app.add_subcommand("validate", "check a dataset");
    add_common(validate, true);

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "original-parameter cost table");
    add_common(evaluate, true);
    evaluate->add_option("--model", o.models, "models to run")
        ->delimiter(',');
    evaluate->add_flag("--clamp-nonneg", o.clamp_nonneg,
                       "zero negative channel rates");
    evaluate->add_flag("--curves", o.curves, "emit rate-curve CSVs");

    CLI::App* sense = app.add_subcommand("sense", "Monte-Carlo sensitivity");
    add_common(sense, true);
    sense->add_option("--model", o.models, "models to run")->delimiter(',');
    sense->add_option("--samples", o.samples, "Sobol sample count")
        ->check(CLI::PositiveNumber);
    sense->add_option("--behavioural", o.behavioural, "behavioural set size")
        ->check(CLI::PositiveNumber);
    sense->add_flag("--clamp-nonneg", o.clamp_nonneg,
                    "zero negative channel rates");
    sense->add_flag("--vs-rest", o.vs_rest,
                    "KS against the non-behavioural rest");

    CLI::App* quasiopt =
        app.add_subcommand("quasiopt", "LOO quasi-optimization");
    add_common(quasiopt, true);
    quasiopt->add_option("--model", o.models, "models to run")
        ->delimiter(',');
    quasiopt->add_option("--samples", o.samples, "Sobol sample count")
        ->check(CLI::PositiveNumber);
    quasiopt->add_flag("--clamp-nonneg", o.clamp_nonneg,
                       "zero negative channel rates");

    CLI::App* sweep = app.add_subcommand("sweep", "feature-set sweep");
    add_common(sweep, true);
    sweep->add_option("--space", o.space, "muscle, joint or both");
    sweep->add_option("--draws", o.draws, "hyperparameter draws")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--epochs", o.epochs, "max training epochs")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--patience", o.patience, "early-stop patience");
    sweep->add_option("--max-layers", o.max_layers, "max hidden layers")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--widths", o.widths, "hidden width choices")
        ->delimiter(',');

    CLI::App* synth = app.add_subcommand("synth", "generate synthetic data");
    add_common(synth, false);
    synth->add_option("--subjects", o.subjects, "subject count")
        ->check(CLI::PositiveNumber);
    synth->add_option("--muscles", o.muscles, "muscle channels");
    synth->add_option("--joints", o.joints, "joint channels");
    synth->add_option("--grid", o.grid, "samples per gait cycle");
    synth->add_option("--duration", o.duration, "base cycle duration s");
    synth->add_option("--source", o.source,
                      "cost source: model, constant or features");
    synth->add_option("--model", o.synth_model, "generating model");
    synth->add_option("--params", o.synth_params, "generating parameters")
        ->delimiter(',');
    synth->add_option("--constant-rate", o.constant_rate,
                      "whole-body rate W for source=constant");
    synth->add_option("--feature-scale", o.feature_scale,
                      "rate scale for source=features");
    synth->add_option("--speeds", o.speeds, "walking speeds m/s")
        ->delimiter(',');
    synth->add_option("--inclines", o.inclines, "grades")->delimiter(',');
    synth->add_option("--act-base", o.act_base, "activation baseline");
    synth->add_option("--act-amp", o.act_amp, "activation amplitude");
    synth->add_option("--len-amp", o.len_amp, "fibre length amplitude");
    synth->add_option("--incline-phase-gain", o.incline_phase_gain,
                      "activation phase shift per unit grade");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return 1;
    }

    try {
        if (app.got_subcommand(validate)) return cmd_validate(o);
        if (app.got_subcommand(evaluate)) return cmd_evaluate(o);
        if (app.got_subcommand(sense)) return cmd_sense(o);
        if (app.got_subcommand(quasiopt)) return cmd_quasiopt(o);
        if (app.got_subcommand(sweep)) return cmd_sweep(o);
        if (app.got_subcommand(synth)) return cmd_synth(o);
    } catch (const validation_error& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return 1;
    } catch (const io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    }
    return 0;
}
