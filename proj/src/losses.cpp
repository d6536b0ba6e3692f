#include "fsacd/losses.hpp"

#include <algorithm>
#include <string>

#include "fsacd/errors.hpp"
#include "fsacd/ops.hpp"

namespace fsacd {

namespace {

Tensor unit_length(const Tensor& r) {
    return scale(r, reciprocal(clamp_min(sqrt(sum(mul(r, r))), 1e-12)));
}

Tensor contrastive_core(const std::vector<Tensor>& reps, const std::vector<int>& labels,
                        const std::vector<std::vector<double>>& weights, double tau,
                        bool strict_negatives) {
    if (tau <= 0.0) {
        throw ConfigError("contrastive: tau must be positive, got " + std::to_string(tau));
    }
    const int n = static_cast<int>(reps.size());
    if (n == 0) throw ConfigError("contrastive: empty batch");
    if (static_cast<int>(labels.size()) != n) {
        throw DimensionError("contrastive: " + std::to_string(n) + " representations vs " +
                             std::to_string(labels.size()) + " labels");
    }
    for (int lab : labels) {
        if (lab < 0 || lab >= static_cast<int>(weights.size())) {
            throw DimensionError("contrastive: label " + std::to_string(lab) +
                                 " outside the " + std::to_string(weights.size()) +
                                 "-class weight matrix");
        }
    }

    std::vector<Tensor> z;
    z.reserve(n);
    for (const auto& r : reps) z.push_back(unit_length(r));

    // Similarities scaled by 1/tau and their exponentials, computed once per
    // unordered pair and shared by both anchors through the graph.
    std::vector<std::vector<Tensor>> sim(n, std::vector<Tensor>(n));
    std::vector<std::vector<Tensor>> boosted(n, std::vector<Tensor>(n));
    for (int a = 0; a < n; ++a) {
        for (int m = a + 1; m < n; ++m) {
            sim[a][m] = scale(dot(z[a], z[m]), 1.0 / tau);
            sim[m][a] = sim[a][m];
            boosted[a][m] = exp(sim[a][m]);
            boosted[m][a] = boosted[a][m];
        }
    }

    Tensor total = Tensor::scalar(0.0);
    bool any = false;
    for (int a = 0; a < n; ++a) {
        std::vector<int> positives;
        for (int p = 0; p < n; ++p) {
            if (p != a && labels[p] == labels[a]) positives.push_back(p);
        }
        if (positives.empty()) continue;
        any = true;

        Tensor cross = Tensor::scalar(0.0);
        Tensor within = Tensor::scalar(0.0);
        for (int m = 0; m < n; ++m) {
            if (m == a) continue;
            Tensor term = scale(boosted[a][m], weights[labels[a]][labels[m]]);
            if (labels[m] == labels[a]) within = add(within, term);
            else cross = add(cross, term);
        }

        Tensor anchor = Tensor::scalar(0.0);
        Tensor shared_log_denom = log(clamp_min(add(within, cross), 1e-30));
        for (int p : positives) {
            Tensor log_denom = strict_negatives
                ? log(clamp_min(add(scale(boosted[a][p], weights[labels[a]][labels[p]]), cross), 1e-30))
                : shared_log_denom;
            anchor = add(anchor, sub(sim[a][p], log_denom));
        }
        total = add(total, scale(anchor, -1.0 / static_cast<double>(positives.size())));
    }
    if (!any) return Tensor::scalar(0.0);
    return total;
}

}  // namespace

Tensor mse_loss(const Tensor& scores, const Tensor& gold) {
    Tensor diff = sub(scores, gold);
    return sum(mul(diff, diff));
}

std::vector<std::vector<double>> label_weight_matrix(const std::vector<LabelEmbedding>& labels) {
    const int n = static_cast<int>(labels.size());
    std::vector<std::vector<double>> w(n, std::vector<double>(n));
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            const double c = cosine_sim(labels[m].vector.data(), labels[k].vector.data());
            w[m][k] = std::clamp(c, 0.0, 1.0);
        }
    }
    return w;
}

Tensor supervised_contrastive_loss(const std::vector<Tensor>& reps,
                                   const std::vector<int>& labels, double tau) {
    int top = 0;
    for (int lab : labels) top = std::max(top, lab);
    std::vector<std::vector<double>> unit(top + 1, std::vector<double>(top + 1, 1.0));
    return contrastive_core(reps, labels, unit, tau, false);
}

Tensor label_weighted_contrastive_loss(const ContrastiveBatch& batch) {
    return contrastive_core(batch.reps, batch.labels, batch.weights, batch.tau,
                            batch.strict_negatives);
}

Tensor total_loss(const Tensor& mse, const Tensor& contrastive, double lambda) {
    if (lambda < 0.0) {
        throw ConfigError("total_loss: lambda must be non-negative, got " +
                          std::to_string(lambda));
    }
    return add(mse, scale(contrastive, lambda));
}

}  // namespace fsacd
