#pragma once

#include <optional>
#include <vector>

namespace fsacd {

// One evaluated episode: per-query class scores and the gold label bits.
struct EpisodeScores {
    std::vector<std::vector<double>> scores;
    std::vector<std::vector<int>> gold;
    int n_way = 0;
};

// Mean over classes of the per-class F1 at the episode's decision threshold.
// A class with no predicted and no gold positives counts as F1 = 1: absence
// was predicted correctly. configured_threshold is consulted only for widths
// without a built-in threshold.
double macro_f1(const EpisodeScores& ep, double configured_threshold = -1.0);

// Ranking quality over the pooled (score, gold bit) pairs of the episode,
// computed from midranks so ties count half. Returns nothing when the pool
// is all-positive or all-negative; callers decide how to report the skip.
std::optional<double> auc(const EpisodeScores& ep);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    int df = 0;
};

// Two-sided paired t-test on a - b. Zero-variance differences degenerate to
// t = 0, p = 1 when the mean difference is zero and t = +/-inf, p = 0
// otherwise.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

struct RunSummary {
    std::vector<double> values;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

RunSummary aggregate_runs(const std::vector<double>& values);

}  // namespace fsacd
