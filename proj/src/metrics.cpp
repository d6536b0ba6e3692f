#include "fsacd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fsacd/errors.hpp"
#include "fsacd/model.hpp"

namespace fsacd {

namespace {

void validate(const EpisodeScores& ep) {
    if (ep.n_way <= 0) throw DimensionError("metrics: n_way must be positive");
    if (ep.scores.size() != ep.gold.size()) {
        throw DimensionError("metrics: " + std::to_string(ep.scores.size()) +
                             " score rows vs " + std::to_string(ep.gold.size()) +
                             " gold rows");
    }
    for (std::size_t m = 0; m < ep.scores.size(); ++m) {
        if (static_cast<int>(ep.scores[m].size()) != ep.n_way ||
            static_cast<int>(ep.gold[m].size()) != ep.n_way) {
            throw DimensionError("metrics: row " + std::to_string(m) +
                                 " does not have n_way entries");
        }
    }
}

// Continued fraction for the regularized incomplete beta, Lentz's method.
double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 3e-15) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        a * std::log(x) + b * std::log1p(-x) -
        (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(ln_front) * beta_cf(a, b, x) / a;
    }
    return 1.0 - std::exp(ln_front) * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double macro_f1(const EpisodeScores& ep, double configured_threshold) {
    validate(ep);
    double total = 0.0;
    for (int n = 0; n < ep.n_way; ++n) {
        long tp = 0, fp = 0, fn = 0;
        for (std::size_t m = 0; m < ep.scores.size(); ++m) {
            const std::vector<int> pred = predict(ep.scores[m], ep.n_way, configured_threshold);
            if (pred[n] == 1 && ep.gold[m][n] == 1) ++tp;
            else if (pred[n] == 1) ++fp;
            else if (ep.gold[m][n] == 1) ++fn;
        }
        total += (tp + fp + fn == 0) ? 1.0
                                     : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    }
    return total / ep.n_way;
}

std::optional<double> auc(const EpisodeScores& ep) {
    validate(ep);
    std::vector<std::pair<double, int>> pool;
    pool.reserve(ep.scores.size() * ep.n_way);
    for (std::size_t m = 0; m < ep.scores.size(); ++m) {
        for (int n = 0; n < ep.n_way; ++n) pool.emplace_back(ep.scores[m][n], ep.gold[m][n]);
    }
    long npos = 0;
    for (const auto& [s, g] : pool) npos += g;
    const long nneg = static_cast<long>(pool.size()) - npos;
    if (npos == 0 || nneg == 0) return std::nullopt;

    std::sort(pool.begin(), pool.end());
    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < pool.size();) {
        std::size_t j = i;
        while (j < pool.size() && pool[j].first == pool[i].first) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (pool[k].second == 1) pos_rank_sum += midrank;
        }
        i = j;
    }
    const double u = pos_rank_sum - static_cast<double>(npos) * (npos + 1) / 2.0;
    return u / (static_cast<double>(npos) * static_cast<double>(nneg));
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionError("t-test: " + std::to_string(a.size()) + " values vs " +
                             std::to_string(b.size()));
    }
    const int n = static_cast<int>(a.size());
    if (n < 2) throw ConfigError("t-test: need at least 2 paired values, got " + std::to_string(n));

    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= n;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1));

    TTestResult r;
    r.df = n - 1;
    if (sd == 0.0) {
        if (mean == 0.0) return r;  // identical lists: t = 0, p = 1
        r.t = mean > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    const double nu = static_cast<double>(r.df);
    r.p = reg_inc_beta(nu / 2.0, 0.5, nu / (nu + r.t * r.t));
    return r;
}

RunSummary aggregate_runs(const std::vector<double>& values) {
    if (values.empty()) throw ConfigError("aggregate_runs: no values");
    RunSummary s;
    s.values = values;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

}  // namespace fsacd
