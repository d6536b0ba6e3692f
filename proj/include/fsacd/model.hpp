#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fsacd/embeddings.hpp"
#include "fsacd/episodes.hpp"
#include "fsacd/tensor.hpp"

namespace fsacd {

/// Trainable state: CNN encoder, support attention, the label gate, and the
/// UNK embedding row. Everything is initialized from N(0, 0.1^2) using the
/// run seed, in the fixed order of named().
struct ModelParams {
    int dim = 50;
    int hidden = 50;
    int window = 3;
    int max_len = 64;
    Tensor conv_w;  // [window x dim x hidden]
    Tensor conv_b;  // [hidden]
    Tensor attn_w;  // [hidden x hidden]
    Tensor attn_v;  // [hidden]
    Tensor gate_w;  // [1 x 2], mixing (label similarity, attention score)
    Tensor gate_b;  // [1]
    Tensor unk;     // [dim], encoder input for out-of-vocabulary tokens

    static ModelParams init(int dim, int hidden, int window, int max_len, Rng& rng);
    std::vector<std::pair<std::string, Tensor>> named() const;
    std::vector<Tensor> trainable() const;
    /// Detached value copy (fresh storage, no tape history).
    ModelParams clone_values() const;
};

struct EncodedInstance {
    Tensor H;                         // [l x hidden]
    Tensor E;                         // [l x dim]
    std::vector<bool> mask;           // true = real token, false = padding
    std::vector<int> token_ids;       // vocab row, -1 OOV, -2 padding
    std::vector<std::string> tokens;  // real tokens after truncation
};

/// Tokenize (truncated to max_len), embed, and convolve. OOV tokens read the
/// trainable UNK row; pad_to > length appends masked zero-embedding rows.
EncodedInstance encode(const std::string& text, const EmbeddingTable& table,
                       const ModelParams& params, int pad_to = 0);

/// Pre-normalization attention scores tanh(H W_a) v_a.
Tensor attention_scores(const Tensor& H, const ModelParams& params);

/// softmax of the attention scores over unmasked positions.
Tensor base_attention(const Tensor& H, const std::vector<bool>& mask,
                      const ModelParams& params);

/// Per-position cosine between the label embedding and the word embedding.
/// Constant w.r.t. the tape; masked and OOV positions are exactly 0.
Tensor label_similarity(const EncodedInstance& inst, const LabelEmbedding& label);

/// Gate mixes similarity with the raw attention scores (not the normalized
/// distribution), so a (0, 1) gate with zero bias reproduces base_attention
/// exactly: theta_i = W_g (alpha_i, score_i)^T + b_g, renormalized by softmax.
Tensor gated_attention(const Tensor& alpha, const Tensor& scores,
                       const std::vector<bool>& mask, const ModelParams& params);

/// Attention-weighted sum of H's rows.
Tensor instance_representation(const Tensor& H, const Tensor& attn);

/// Average pooling over K instance representations; bitwise permutation
/// invariant.
Tensor aggregate_prototype(const std::vector<Tensor>& reps);

/// Prototype-specific query representation: scaled-dot attention over the
/// query's positions with the prototype as probe.
Tensor query_representation(const EncodedInstance& query, const Tensor& prototype);

/// Same, but the scaled scores pass through the label gate before
/// normalization, mirroring the support side for the candidate class.
Tensor query_representation(const EncodedInstance& query, const Tensor& prototype,
                            const ModelParams& params, const LabelEmbedding& label);

/// softmax over classes of the negative Euclidean distances.
Tensor score_query(const std::vector<Tensor>& prototypes,
                   const std::vector<Tensor>& query_reps);

/// 0.3 for 5-way and 0.2 for 10-way; other widths need a configured value.
double threshold_for(int n_way, double configured = -1.0);
std::vector<int> predict(const std::vector<double>& scores, int n_way,
                         double configured = -1.0);

struct EpisodePrototypes {
    std::vector<Tensor> prototypes;                             // N x [hidden]
    std::vector<std::vector<Tensor>> reps;                      // N x K x [hidden]
    std::vector<std::vector<std::vector<double>>> attention;    // N x K x l
    std::vector<std::vector<std::vector<std::string>>> tokens;  // N x K token lists
};

/// Encodes the support set and builds one prototype per class. With use_las
/// the support attention runs through the label gate; labels must align with
/// ep.classes.
EpisodePrototypes build_prototypes(const Episode& ep, const EmbeddingTable& table,
                                   const ModelParams& params,
                                   const std::vector<LabelEmbedding>& labels,
                                   bool use_las);

/// Per-query probability rows stacked to [M x N]. When query_gate_labels is
/// given (aligned with ep.classes), each query's attention toward prototype n
/// is gated by that class's label similarity.
Tensor score_episode(const Episode& ep, const EmbeddingTable& table,
                     const ModelParams& params, const EpisodePrototypes& protos,
                     const std::vector<LabelEmbedding>* query_gate_labels = nullptr);

}  // namespace fsacd
