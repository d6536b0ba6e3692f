#pragma once

#include <vector>

#include "fsacd/embeddings.hpp"
#include "fsacd/tensor.hpp"

namespace fsacd {

// Flattened support batch for the contrastive objectives: one representation
// per support instance (class-major), the class index of each, and a
// class-by-class affinity matrix indexed by those class ids.
struct ContrastiveBatch {
    std::vector<Tensor> reps;
    std::vector<int> labels;
    std::vector<std::vector<double>> weights;
    double tau = 0.1;
    // When set, each positive pair gets its own denominator containing only
    // that pair plus the weighted other-class terms; same-class bystanders
    // are excluded.
    bool strict_negatives = false;
};

// Sum of squared differences between predicted scores and gold label bits.
Tensor mse_loss(const Tensor& scores, const Tensor& gold);

// Pairwise affinity between class-name embeddings: cosine clamped into
// [0, 1]. A zero label vector yields 0 against everything, itself included.
std::vector<std::vector<double>> label_weight_matrix(const std::vector<LabelEmbedding>& labels);

// Pulls same-class representations together; every denominator term counts
// with weight 1. Anchors with no same-class partner contribute nothing, so
// one-shot batches cost exactly zero.
Tensor supervised_contrastive_loss(const std::vector<Tensor>& reps,
                                   const std::vector<int>& labels, double tau);

// Same structure, but each denominator term is scaled by the affinity
// between the anchor's class and the term's class, so near-synonymous
// classes are pushed apart more gently than unrelated ones.
Tensor label_weighted_contrastive_loss(const ContrastiveBatch& batch);

// mse + lambda * contrastive.
Tensor total_loss(const Tensor& mse, const Tensor& contrastive, double lambda);

}  // namespace fsacd
