#include "metacost/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metacost/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace metacost {

std::vector<std::string> Dataset::subject_ids() const {
    std::vector<std::string> ids;
    for (const auto& t : trials)
        if (std::find(ids.begin(), ids.end(), t.subject.id) == ids.end())
            ids.push_back(t.subject.id);
    return ids;
}

std::vector<double> resample_periodic(const std::vector<double>& src,
                                      std::size_t n) {
    if (src.size() == n) return src;
    if (src.empty()) throw validation_error("cannot resample empty series");
    std::vector<double> out(n);
    const double step = static_cast<double>(src.size()) / n;
    for (std::size_t k = 0; k < n; ++k) {
        const double u = k * step;
        const std::size_t i = static_cast<std::size_t>(u) % src.size();
        const double frac = u - std::floor(u);
        const std::size_t j = (i + 1) % src.size();
        out[k] = src[i] + frac * (src[j] - src[i]);
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_num(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw validation_error("not a number at " + where + ": '" + s + "'");
    return v;
}

void check(bool ok, const std::string& msg) {
    if (!ok) throw validation_error(msg);
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;
};

CsvTable read_csv(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw io_error("cannot open " + path.string());
    CsvTable t;
    std::string line;
    if (!std::getline(f, line))
        throw validation_error("empty CSV: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    t.columns.resize(t.header.size());
    std::size_t row = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream rs(line);
        std::size_t col = 0;
        while (std::getline(rs, cell, ',')) {
            if (col >= t.header.size())
                throw validation_error("row " + std::to_string(row) +
                                       " has too many cells in " +
                                       path.string());
            t.columns[col].push_back(parse_num(
                cell, path.filename().string() + " row " +
                          std::to_string(row) + " col " + t.header[col]));
            ++col;
        }
        if (col != t.header.size())
            throw validation_error("row " + std::to_string(row) +
                                   " has too few cells in " + path.string());
        ++row;
    }
    return t;
}

std::vector<std::string> expected_header(
    const std::vector<std::string>& muscles,
    const std::vector<std::string>& joints) {
    std::vector<std::string> h{"t"};
    for (const auto& m : muscles) {
        h.push_back(m + ".a");
        h.push_back(m + ".e");
        h.push_back(m + ".lce");
        h.push_back(m + ".vce");
    }
    for (const auto& j : joints) {
        h.push_back(j + ".q");
        h.push_back(j + ".qdot");
        h.push_back(j + ".qddot");
        h.push_back(j + ".M");
    }
    return h;
}

void validate_trial(const GaitTrial& t) {
    const std::string at = "trial " + t.id + ": ";
    check(t.duration_s > 0.0, at + "duration must be > 0");
    check(t.grid >= 2, at + "grid must be >= 2");
    check(t.subject.mass_kg > 0.0, at + "subject mass must be > 0");
    check(t.subject.height_m > 0.0, at + "subject height must be > 0");
    check(t.condition.speed_mps > 0.0, at + "speed must be > 0");
    check(std::isfinite(t.measured_cost), at + "measured_cost must be finite");
    for (const auto& mc : t.muscles) {
        check(mc.params.f_max_n > 0.0, at + mc.name + ".f_max must be > 0");
        check(mc.params.l_ce_opt_m > 0.0,
              at + mc.name + ".l_ce_opt must be > 0");
        check(mc.params.width > 0.0, at + mc.name + ".width must be > 0");
        check(mc.params.v_max_norm > 0.0,
              at + mc.name + ".v_max_norm must be > 0");
        check(mc.params.r_ft >= 0.0 && mc.params.r_ft <= 1.0,
              at + mc.name + ".r_ft must be in [0,1]");
        check(mc.series.size() == static_cast<std::size_t>(t.grid),
              at + mc.name + " series length != grid");
        for (std::size_t k = 0; k < mc.series.size(); ++k) {
            const auto& s = mc.series[k];
            const std::string rk =
                at + mc.name + " row " + std::to_string(k) + ": ";
            check(s.act >= 0.0 && s.act <= 1.0, rk + "a must be in [0,1]");
            check(s.stim >= 0.0 && s.stim <= 1.0, rk + "e must be in [0,1]");
            check(s.lce_norm > 0.0, rk + "lce must be > 0");
            check(std::isfinite(s.vce_norm), rk + "vce must be finite");
        }
    }
    for (const auto& jc : t.joints) {
        check(jc.series.size() == static_cast<std::size_t>(t.grid),
              at + jc.name + " series length != grid");
        for (std::size_t k = 0; k < jc.series.size(); ++k) {
            const auto& s = jc.series[k];
            check(std::isfinite(s.q) && std::isfinite(s.qdot) &&
                      std::isfinite(s.qddot) && std::isfinite(s.moment),
                  at + jc.name + " row " + std::to_string(k) +
                      ": joint state must be finite");
        }
    }
}

} // namespace

Dataset load_dataset(const std::string& dir) {
    const fs::path root(dir);
    const fs::path manifest_path = root / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) throw io_error("cannot open " + manifest_path.string());
    json m;
    try {
        mf >> m;
    } catch (const json::exception& e) {
        throw validation_error("manifest parse: " + std::string(e.what()));
    }

    try {
        const int grid = m.at("grid").get<int>();
        check(grid >= 2, "manifest grid must be >= 2");

        std::vector<std::string> muscle_names;
        std::vector<MuscleParams> muscle_params;
        for (const auto& jm : m.at("muscles")) {
            muscle_names.push_back(jm.at("name").get<std::string>());
            MuscleParams p;
            p.f_max_n = jm.at("f_max").get<double>();
            p.l_ce_opt_m = jm.at("l_ce_opt").get<double>();
            p.width = jm.value("width", 0.56);
            p.r_ft = jm.value("r_ft", 0.5);
            p.v_max_norm = jm.value("v_max_norm", 10.0);
            muscle_params.push_back(p);
        }
        std::vector<std::string> joint_names;
        for (const auto& jj : m.at("joints"))
            joint_names.push_back(jj.get<std::string>());

        std::map<std::string, Subject> subjects;
        for (const auto& js : m.at("subjects")) {
            Subject s;
            s.id = js.at("id").get<std::string>();
            s.mass_kg = js.at("mass").get<double>();
            s.height_m = js.at("height").get<double>();
            check(!subjects.count(s.id), "duplicate subject id " + s.id);
            subjects[s.id] = s;
        }

        Dataset ds;
        const auto header = expected_header(muscle_names, joint_names);
        std::set<std::string> trial_ids;
        for (const auto& jt : m.at("trials")) {
            GaitTrial t;
            t.id = jt.at("id").get<std::string>();
            check(trial_ids.insert(t.id).second, "duplicate trial id " + t.id);
            const auto sid = jt.at("subject").get<std::string>();
            check(subjects.count(sid) > 0,
                  "trial " + t.id + ": unknown subject " + sid);
            t.subject = subjects[sid];
            t.condition.speed_mps = jt.at("speed").get<double>();
            t.condition.incline = jt.at("incline").get<double>();
            t.duration_s = jt.at("duration").get<double>();
            t.measured_cost = jt.at("measured_cost").get<double>();
            t.grid = grid;

            const fs::path csv_path = root / jt.at("file").get<std::string>();
            CsvTable csv = read_csv(csv_path);
            check(csv.header == header,
                  "trial " + t.id + ": CSV header does not match manifest");
            const std::size_t rows = csv.columns.front().size();
            check(rows >= 2, "trial " + t.id + ": needs at least 2 rows");
            for (std::size_t c = 1; c < csv.columns.size(); ++c)
                if (csv.columns[c].size() != rows)
                    throw validation_error("trial " + t.id +
                                           ": ragged CSV columns");
            const auto& tc = csv.columns[0];
            for (std::size_t k = 1; k < tc.size(); ++k)
                check(tc[k] > tc[k - 1],
                      "trial " + t.id + ": t must be strictly increasing");

            if (rows != static_cast<std::size_t>(grid))
                for (std::size_t c = 1; c < csv.columns.size(); ++c)
                    csv.columns[c] = resample_periodic(csv.columns[c], grid);

            std::size_t col = 1;
            for (std::size_t mi = 0; mi < muscle_names.size(); ++mi) {
                MuscleChannel ch;
                ch.name = muscle_names[mi];
                ch.params = muscle_params[mi];
                ch.series.resize(grid);
                for (int k = 0; k < grid; ++k) {
                    ch.series[k].act = csv.columns[col][k];
                    ch.series[k].stim = csv.columns[col + 1][k];
                    ch.series[k].lce_norm = csv.columns[col + 2][k];
                    ch.series[k].vce_norm = csv.columns[col + 3][k];
                }
                col += 4;
                t.muscles.push_back(std::move(ch));
            }
            for (const auto& jn : joint_names) {
                JointChannel ch;
                ch.name = jn;
                ch.series.resize(grid);
                for (int k = 0; k < grid; ++k) {
                    ch.series[k].q = csv.columns[col][k];
                    ch.series[k].qdot = csv.columns[col + 1][k];
                    ch.series[k].qddot = csv.columns[col + 2][k];
                    ch.series[k].moment = csv.columns[col + 3][k];
                }
                col += 4;
                t.joints.push_back(std::move(ch));
            }
            validate_trial(t);
            ds.trials.push_back(std::move(t));
        }
        check(!ds.trials.empty(), "dataset has no trials");
        return ds;
    } catch (const json::exception& e) {
        throw validation_error("manifest field error: " +
                               std::string(e.what()));
    }
}

void write_dataset(const Dataset& ds, const std::string& dir) {
    if (ds.trials.empty()) throw validation_error("dataset has no trials");
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw io_error("cannot create " + root.string());

    const GaitTrial& first = ds.trials.front();
    // The manifest holds one muscle table for the whole dataset; trials
    // that disagree would be silently rewritten on reload, so reject them.
    for (const auto& t : ds.trials) {
        if (t.muscles.size() != first.muscles.size())
            throw validation_error("trial " + t.id +
                                   ": muscle set differs across trials");
        for (std::size_t j = 0; j < t.muscles.size(); ++j) {
            const MuscleParams& a = t.muscles[j].params;
            const MuscleParams& b = first.muscles[j].params;
            if (t.muscles[j].name != first.muscles[j].name ||
                a.f_max_n != b.f_max_n || a.l_ce_opt_m != b.l_ce_opt_m ||
                a.width != b.width || a.r_ft != b.r_ft ||
                a.v_max_norm != b.v_max_norm)
                throw validation_error("trial " + t.id +
                                       ": muscle parameters differ across "
                                       "trials");
        }
    }
    json m;
    m["grid"] = first.grid;
    json muscles = json::array();
    for (const auto& mc : first.muscles)
        muscles.push_back({{"name", mc.name},
                           {"f_max", mc.params.f_max_n},
                           {"l_ce_opt", mc.params.l_ce_opt_m},
                           {"width", mc.params.width},
                           {"r_ft", mc.params.r_ft},
                           {"v_max_norm", mc.params.v_max_norm}});
    m["muscles"] = muscles;
    json joints = json::array();
    for (const auto& jc : first.joints) joints.push_back(jc.name);
    m["joints"] = joints;

    json subjects = json::array();
    std::set<std::string> seen;
    for (const auto& t : ds.trials)
        if (seen.insert(t.subject.id).second)
            subjects.push_back({{"id", t.subject.id},
                                {"mass", t.subject.mass_kg},
                                {"height", t.subject.height_m}});
    m["subjects"] = subjects;

    json trials = json::array();
    for (const auto& t : ds.trials) {
        const std::string file = t.id + ".csv";
        trials.push_back({{"id", t.id},
                          {"subject", t.subject.id},
                          {"speed", t.condition.speed_mps},
                          {"incline", t.condition.incline},
                          {"duration", t.duration_s},
                          {"measured_cost", t.measured_cost},
                          {"file", file}});

        std::ofstream f(root / file);
        if (!f) throw io_error("cannot write " + (root / file).string());
        std::vector<std::string> mnames, jnames;
        for (const auto& mc : t.muscles) mnames.push_back(mc.name);
        for (const auto& jc : t.joints) jnames.push_back(jc.name);
        const auto header = expected_header(mnames, jnames);
        for (std::size_t c = 0; c < header.size(); ++c)
            f << header[c] << (c + 1 < header.size() ? ',' : '\n');
        const double dt = t.duration_s / t.grid;
        for (int k = 0; k < t.grid; ++k) {
            f << fmt(k * dt);
            for (const auto& mc : t.muscles) {
                const auto& s = mc.series[k];
                f << ',' << fmt(s.act) << ',' << fmt(s.stim) << ','
                  << fmt(s.lce_norm) << ',' << fmt(s.vce_norm);
            }
            for (const auto& jc : t.joints) {
                const auto& s = jc.series[k];
                f << ',' << fmt(s.q) << ',' << fmt(s.qdot) << ','
                  << fmt(s.qddot) << ',' << fmt(s.moment);
            }
            f << '\n';
        }
        if (!f.good()) throw io_error("write failed: " + (root / file).string());
    }
    m["trials"] = trials;

    std::ofstream mf(root / "manifest.json");
    if (!mf) throw io_error("cannot write manifest.json");
    mf << m.dump(2) << '\n';
    if (!mf.good()) throw io_error("write failed: manifest.json");
}

} // namespace metacost
