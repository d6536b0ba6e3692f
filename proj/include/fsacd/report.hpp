#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fsacd/metrics.hpp"

namespace fsacd {

/// One completed run: a setting name (e.g. "base", "ldf"), its seed, and the
/// test-set episode means. Stored one JSON object per file.
struct RunRecord {
    std::string setting;
    std::uint64_t seed = 0;
    double macro_f1 = 0.0;
    double auc = 0.0;
};

void write_run_record(const RunRecord& rec, const std::string& path);
RunRecord read_run_record(const std::string& path);

/// Every *.json file in dir, sorted by (setting, seed).
std::vector<RunRecord> load_runs(const std::string& dir);

struct SettingSummary {
    std::string setting;
    std::vector<std::uint64_t> seeds;
    RunSummary macro_f1;
    RunSummary auc;
};

/// Group records by setting (alphabetical), aggregating in seed order.
std::vector<SettingSummary> summarize_runs(const std::vector<RunRecord>& runs);

/// Paired t-tests between settings evaluated on identical seed sets.
struct SignificanceLine {
    std::string a;
    std::string b;
    TTestResult f1_test;
    TTestResult auc_test;
};

std::vector<SignificanceLine> significance(const std::vector<RunRecord>& runs);

std::string format_report_text(const std::vector<SettingSummary>& summaries,
                               const std::vector<SignificanceLine>& sig);
std::string format_report_json(const std::vector<SettingSummary>& summaries,
                               const std::vector<SignificanceLine>& sig);

}  // namespace fsacd
