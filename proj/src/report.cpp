#include "fsacd/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "fsacd/errors.hpp"
#include "json.hpp"

namespace fsacd {

namespace {

std::string metric_cell(const RunSummary& s) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f ± %.4f", s.mean, s.stddev);
    return buf;
}

nlohmann::json summary_json(const RunSummary& s) {
    return {{"mean", s.mean}, {"stddev", s.stddev}, {"values", s.values}};
}

}  // namespace

void write_run_record(const RunRecord& rec, const std::string& path) {
    nlohmann::json j = {{"setting", rec.setting},
                        {"seed", rec.seed},
                        {"macro_f1", rec.macro_f1},
                        {"auc", rec.auc}};
    std::ofstream out(path);
    if (!out) throw ParseError("run record: cannot write " + path);
    out << j.dump(1, '\t') << "\n";
    if (!out.good()) throw ParseError("run record: write to " + path + " failed");
}

RunRecord read_run_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("run record: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("run record: " + path + " is not valid JSON: " + e.what());
    }
    RunRecord rec;
    try {
        rec.setting = j.at("setting").get<std::string>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        rec.macro_f1 = j.at("macro_f1").get<double>();
        rec.auc = j.at("auc").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("run record: " + path + ": " + e.what());
    }
    return rec;
}

std::vector<RunRecord> load_runs(const std::string& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ParseError("runs: " + dir + " is not a directory");
    }
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            paths.push_back(entry.path().string());
        }
    }
    std::sort(paths.begin(), paths.end());
    std::vector<RunRecord> runs;
    runs.reserve(paths.size());
    for (const auto& p : paths) runs.push_back(read_run_record(p));
    std::sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) {
        return a.setting != b.setting ? a.setting < b.setting : a.seed < b.seed;
    });
    return runs;
}

std::vector<SettingSummary> summarize_runs(const std::vector<RunRecord>& runs) {
    std::map<std::string, std::vector<RunRecord>> by_setting;
    for (const auto& r : runs) by_setting[r.setting].push_back(r);
    std::vector<SettingSummary> out;
    for (auto& [setting, records] : by_setting) {
        std::sort(records.begin(), records.end(),
                  [](const RunRecord& a, const RunRecord& b) { return a.seed < b.seed; });
        SettingSummary s;
        s.setting = setting;
        std::vector<double> f1s, aucs;
        for (const auto& r : records) {
            s.seeds.push_back(r.seed);
            f1s.push_back(r.macro_f1);
            aucs.push_back(r.auc);
        }
        s.macro_f1 = aggregate_runs(f1s);
        s.auc = aggregate_runs(aucs);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SignificanceLine> significance(const std::vector<RunRecord>& runs) {
    const std::vector<SettingSummary> summaries = summarize_runs(runs);
    std::vector<SignificanceLine> out;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        for (std::size_t k = i + 1; k < summaries.size(); ++k) {
            const SettingSummary& a = summaries[i];
            const SettingSummary& b = summaries[k];
            if (a.seeds.size() < 2 || a.seeds != b.seeds) continue;
            SignificanceLine line;
            line.a = a.setting;
            line.b = b.setting;
            line.f1_test = paired_t_test(a.macro_f1.values, b.macro_f1.values);
            line.auc_test = paired_t_test(a.auc.values, b.auc.values);
            out.push_back(std::move(line));
        }
    }
    return out;
}

std::string format_report_text(const std::vector<SettingSummary>& summaries,
                               const std::vector<SignificanceLine>& sig) {
    std::size_t name_w = 7;  // "setting"
    for (const auto& s : summaries) name_w = std::max(name_w, s.setting.size());

    std::string out;
    auto pad = [&](const std::string& s, std::size_t w) {
        std::string p = s;
        p.resize(std::max(w, s.size()), ' ');
        return p;
    };
    out += pad("setting", name_w) + "  runs  " + pad("macro_f1", 17) + "  auc\n";
    for (const auto& s : summaries) {
        out += pad(s.setting, name_w) + "  " + pad(std::to_string(s.seeds.size()), 4) + "  " +
               pad(metric_cell(s.macro_f1), 17) + "  " + metric_cell(s.auc) + "\n";
    }
    if (!sig.empty()) {
        out += "\npaired t-tests (two-sided, matched seeds):\n";
        for (const auto& line : sig) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "%s vs %s: macro_f1 t=%.3f p=%.4f, auc t=%.3f p=%.4f\n",
                          line.a.c_str(), line.b.c_str(), line.f1_test.t, line.f1_test.p,
                          line.auc_test.t, line.auc_test.p);
            out += buf;
        }
    }
    return out;
}

std::string format_report_json(const std::vector<SettingSummary>& summaries,
                               const std::vector<SignificanceLine>& sig) {
    nlohmann::json j;
    j["settings"] = nlohmann::json::array();
    for (const auto& s : summaries) {
        j["settings"].push_back({{"setting", s.setting},
                                 {"seeds", s.seeds},
                                 {"macro_f1", summary_json(s.macro_f1)},
                                 {"auc", summary_json(s.auc)}});
    }
    j["significance"] = nlohmann::json::array();
    for (const auto& line : sig) {
        j["significance"].push_back(
            {{"a", line.a},
             {"b", line.b},
             {"macro_f1", {{"t", line.f1_test.t}, {"p", line.f1_test.p}, {"df", line.f1_test.df}}},
             {"auc", {{"t", line.auc_test.t}, {"p", line.auc_test.p}, {"df", line.auc_test.df}}}});
    }
    return j.dump(1, '\t') + "\n";
}

}  // namespace fsacd
