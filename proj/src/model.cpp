#include "fsacd/model.hpp"

#include <cmath>

#include "fsacd/errors.hpp"
#include "fsacd/ops.hpp"

namespace fsacd {

ModelParams ModelParams::init(int dim, int hidden, int window, int max_len, Rng& rng) {
    if (dim <= 0 || hidden <= 0 || window <= 0 || max_len <= 0) {
        throw ConfigError("model: dim, hidden, window, max_len must be positive");
    }
    if (window % 2 == 0) throw ConfigError("model: window must be odd");
    ModelParams p;
    p.dim = dim;
    p.hidden = hidden;
    p.window = window;
    p.max_len = max_len;
    const double sd = 0.1;
    p.conv_w = Tensor::randn({window, dim, hidden}, sd, rng);
    p.conv_b = Tensor::randn({hidden}, sd, rng);
    p.attn_w = Tensor::randn({hidden, hidden}, sd, rng);
    p.attn_v = Tensor::randn({hidden}, sd, rng);
    p.gate_w = Tensor::randn({1, 2}, sd, rng);
    p.gate_b = Tensor::randn({1}, sd, rng);
    p.unk = Tensor::randn({dim}, sd, rng);
    return p;
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
    return {{"conv_w", conv_w}, {"conv_b", conv_b}, {"attn_w", attn_w},
            {"attn_v", attn_v}, {"gate_w", gate_w}, {"gate_b", gate_b},
            {"unk", unk}};
}

std::vector<Tensor> ModelParams::trainable() const {
    std::vector<Tensor> out;
    for (auto& [name, t] : named()) out.push_back(t);
    return out;
}

ModelParams ModelParams::clone_values() const {
    ModelParams p = *this;
    p.conv_w = conv_w.detached_copy();
    p.conv_b = conv_b.detached_copy();
    p.attn_w = attn_w.detached_copy();
    p.attn_v = attn_v.detached_copy();
    p.gate_w = gate_w.detached_copy();
    p.gate_b = gate_b.detached_copy();
    p.unk = unk.detached_copy();
    return p;
}

EncodedInstance encode(const std::string& text, const EmbeddingTable& table,
                       const ModelParams& params, int pad_to) {
    if (table.size() > 0 && table.dim != params.dim) {
        throw DimensionError("encode: embedding dim " + std::to_string(table.dim) +
                             " vs model dim " + std::to_string(params.dim));
    }
    auto toks = tokenize(text);
    if (static_cast<int>(toks.size()) > params.max_len) toks.resize(params.max_len);
    if (toks.empty()) {
        throw ParseError("encode: instance empty after tokenization: '" + text + "'");
    }
    const int real = static_cast<int>(toks.size());
    const int l = std::max(real, pad_to);

    EncodedInstance inst;
    inst.tokens = toks;
    inst.mask.assign(l, false);
    inst.token_ids.assign(l, -2);
    bool any_oov = false;
    for (int i = 0; i < real; ++i) {
        inst.mask[i] = true;
        const auto id = table.lookup(toks[i]);
        inst.token_ids[i] = id ? *id : -1;
        any_oov = any_oov || !id;
    }

    Tensor base = table.size() > 0 ? embedding_rows(table.matrix, inst.token_ids)
                                   : Tensor::zeros({l, params.dim});
    if (any_oov) {
        std::vector<double> indicator(l, 0.0);
        for (int i = 0; i < l; ++i)
            if (inst.token_ids[i] == -1) indicator[i] = 1.0;
        Tensor ind = Tensor::from_data(std::move(indicator), {l, 1});
        base = add(base, matmul(ind, reshape(params.unk, {1, params.dim})));
    }
    inst.E = base;
    inst.H = relu(conv1d_same(inst.E, params.conv_w, params.conv_b));
    return inst;
}

Tensor attention_scores(const Tensor& H, const ModelParams& params) {
    const int l = H.shape()[0];
    return reshape(matmul(tanh(matmul(H, params.attn_w)),
                          reshape(params.attn_v, {params.hidden, 1})),
                   {l});
}

Tensor base_attention(const Tensor& H, const std::vector<bool>& mask,
                      const ModelParams& params) {
    return softmax(attention_scores(H, params), &mask);
}

Tensor label_similarity(const EncodedInstance& inst, const LabelEmbedding& label) {
    const int l = static_cast<int>(inst.mask.size());
    const int dim = inst.E.shape()[1];
    if (label.vector.numel() != dim) {
        throw DimensionError("label_similarity: label dim " +
                             std::to_string(label.vector.numel()) + " vs embedding dim " +
                             std::to_string(dim));
    }
    const auto& ed = inst.E.data();
    const auto& ld = label.vector.data();
    std::vector<double> alpha(l, 0.0);
    for (int i = 0; i < l; ++i) {
        if (!inst.mask[i] || inst.token_ids[i] < 0) continue;  // pad or OOV: 0
        std::vector<double> row(ed.begin() + static_cast<std::size_t>(i) * dim,
                                ed.begin() + static_cast<std::size_t>(i + 1) * dim);
        alpha[i] = cosine_sim(row, ld);
    }
    return Tensor::from_data(std::move(alpha), {l});
}

Tensor gated_attention(const Tensor& alpha, const Tensor& scores,
                       const std::vector<bool>& mask, const ModelParams& params) {
    if (alpha.shape() != scores.shape()) {
        throw DimensionError("gated_attention: " + Tensor::shape_str(alpha.shape()) +
                             " vs " + Tensor::shape_str(scores.shape()));
    }
    const int l = alpha.shape()[0];
    Tensor stacked = concat({reshape(alpha, {l, 1}), reshape(scores, {l, 1})}, 1);
    Tensor theta = shift(reshape(matmul(stacked, reshape(params.gate_w, {2, 1})), {l}),
                         params.gate_b);
    return softmax(theta, &mask);
}

Tensor instance_representation(const Tensor& H, const Tensor& attn) {
    const int l = H.shape()[0];
    if (attn.shape() != std::vector<int>{l}) {
        throw DimensionError("instance_representation: attention " +
                             Tensor::shape_str(attn.shape()) + " vs H " +
                             Tensor::shape_str(H.shape()));
    }
    return reshape(matmul(reshape(attn, {1, l}), H), {H.shape()[1]});
}

Tensor aggregate_prototype(const std::vector<Tensor>& reps) {
    if (reps.empty()) throw ContractError("aggregate_prototype: no representations");
    return mean_rows(reps);
}

namespace {

Tensor query_logits(const EncodedInstance& query, const Tensor& prototype) {
    const int l = query.H.shape()[0];
    const int hidden = query.H.shape()[1];
    return scale(reshape(matmul(query.H, reshape(prototype, {hidden, 1})), {l}),
                 1.0 / std::sqrt(static_cast<double>(hidden)));
}

}  // namespace

Tensor query_representation(const EncodedInstance& query, const Tensor& prototype) {
    Tensor weights = softmax(query_logits(query, prototype), &query.mask);
    return instance_representation(query.H, weights);
}

Tensor query_representation(const EncodedInstance& query, const Tensor& prototype,
                            const ModelParams& params, const LabelEmbedding& label) {
    Tensor alpha = label_similarity(query, label);
    Tensor weights = gated_attention(alpha, query_logits(query, prototype), query.mask, params);
    return instance_representation(query.H, weights);
}

Tensor score_query(const std::vector<Tensor>& prototypes,
                   const std::vector<Tensor>& query_reps) {
    if (prototypes.empty() || prototypes.size() != query_reps.size()) {
        throw ContractError("score_query: prototypes and query representations must "
                            "align and be nonempty");
    }
    std::vector<Tensor> dists;
    dists.reserve(prototypes.size());
    for (std::size_t n = 0; n < prototypes.size(); ++n)
        dists.push_back(euclidean_distance(prototypes[n], query_reps[n]));
    return softmax(neg(concat(dists, 0)));
}

double threshold_for(int n_way, double configured) {
    if (n_way == 5) return 0.3;
    if (n_way == 10) return 0.2;
    if (configured > 0.0) return configured;
    throw ConfigError("predict: no threshold configured for n_way=" +
                      std::to_string(n_way));
}

std::vector<int> predict(const std::vector<double>& scores, int n_way, double configured) {
    const double thr = threshold_for(n_way, configured);
    std::vector<int> bits(scores.size(), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) bits[i] = scores[i] > thr ? 1 : 0;
    return bits;
}

EpisodePrototypes build_prototypes(const Episode& ep, const EmbeddingTable& table,
                                   const ModelParams& params,
                                   const std::vector<LabelEmbedding>& labels,
                                   bool use_las) {
    const int n_way = static_cast<int>(ep.classes.size());
    if (use_las && static_cast<int>(labels.size()) != n_way) {
        throw ContractError("build_prototypes: labels must align with episode classes");
    }
    EpisodePrototypes out;
    out.reps.resize(n_way);
    out.attention.resize(n_way);
    out.tokens.resize(n_way);
    for (int n = 0; n < n_way; ++n) {
        for (const auto& instance : ep.support[n]) {
            EncodedInstance enc = encode(instance.text, table, params);
            Tensor scores = attention_scores(enc.H, params);
            Tensor attn;
            if (use_las) {
                Tensor alpha = label_similarity(enc, labels[n]);
                attn = gated_attention(alpha, scores, enc.mask, params);
            } else {
                attn = softmax(scores, &enc.mask);
            }
            out.reps[n].push_back(instance_representation(enc.H, attn));
            out.attention[n].push_back(attn.data());
            out.tokens[n].push_back(enc.tokens);
        }
        out.prototypes.push_back(aggregate_prototype(out.reps[n]));
    }
    return out;
}

Tensor score_episode(const Episode& ep, const EmbeddingTable& table,
                     const ModelParams& params, const EpisodePrototypes& protos,
                     const std::vector<LabelEmbedding>* query_gate_labels) {
    const int n_way = static_cast<int>(ep.classes.size());
    if (query_gate_labels && static_cast<int>(query_gate_labels->size()) != n_way) {
        throw DimensionError("score_episode: " + std::to_string(query_gate_labels->size()) +
                             " gate labels for " + std::to_string(n_way) + " classes");
    }
    std::vector<Tensor> rows;
    rows.reserve(ep.queries.size());
    for (const auto& query : ep.queries) {
        EncodedInstance enc = encode(query.text, table, params);
        std::vector<Tensor> qreps;
        qreps.reserve(n_way);
        for (int n = 0; n < n_way; ++n) {
            qreps.push_back(query_gate_labels
                                ? query_representation(enc, protos.prototypes[n], params,
                                                       (*query_gate_labels)[n])
                                : query_representation(enc, protos.prototypes[n]));
        }
        rows.push_back(reshape(score_query(protos.prototypes, qreps), {1, n_way}));
    }
    return concat(rows, 0);
}

}  // namespace fsacd
