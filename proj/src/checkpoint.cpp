#include "fsacd/checkpoint.hpp"

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "fsacd/errors.hpp"
#include "json.hpp"

namespace fsacd {

namespace {

constexpr const char* kFormat = "fsacd-checkpoint-v1";

nlohmann::json tensor_json(const Tensor& t) {
    return {{"shape", t.shape()}, {"data", t.data()}};
}

Tensor tensor_from_json(const nlohmann::json& j, const std::string& name) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
        throw ParseError("checkpoint: parameter '" + name + "' needs shape and data");
    }
    std::vector<int> shape = j["shape"].get<std::vector<int>>();
    std::vector<double> data = j["data"].get<std::vector<double>>();
    long expect = 1;
    for (int d : shape) expect *= d;
    if (expect != static_cast<long>(data.size())) {
        throw ParseError("checkpoint: parameter '" + name + "' has " +
                         std::to_string(data.size()) + " values for shape " +
                         Tensor::shape_str(shape));
    }
    return Tensor::from_data(std::move(data), std::move(shape), true);
}

nlohmann::json config_json(const TrainConfig& c) {
    nlohmann::json j;
    j["n_way"] = c.n_way;
    j["k_shot"] = c.k_shot;
    j["queries_per_class"] = c.queries_per_class;
    j["epochs"] = c.epochs;
    j["episodes_per_epoch"] = c.episodes_per_epoch;
    j["eval_episodes"] = c.eval_episodes;
    j["patience"] = c.patience;
    j["lr"] = c.lr;
    j["tau"] = c.tau;
    j["lambda"] = c.lambda;
    j["seed"] = c.seed;
    j["use_las"] = c.use_las;
    j["use_lcl"] = c.use_lcl;
    j["use_scl"] = c.use_scl;
    j["hidden"] = c.hidden;
    j["window"] = c.window;
    j["max_len"] = c.max_len;
    j["threshold"] = c.threshold;
    j["unfreeze_embeddings"] = c.unfreeze_embeddings;
    j["las_on_query"] = c.las_on_query;
    j["strict_negatives"] = c.strict_negatives;
    j["train_corpus"] = c.train_corpus;
    j["dev_corpus"] = c.dev_corpus;
    j["test_corpus"] = c.test_corpus;
    j["embeddings"] = c.embeddings;
    j["checkpoint_dir"] = c.checkpoint_dir;
    return j;
}

TrainConfig config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    try {
        c.n_way = j.at("n_way").get<int>();
        c.k_shot = j.at("k_shot").get<int>();
        c.queries_per_class = j.at("queries_per_class").get<int>();
        c.epochs = j.at("epochs").get<int>();
        c.episodes_per_epoch = j.at("episodes_per_epoch").get<int>();
        c.eval_episodes = j.at("eval_episodes").get<int>();
        c.patience = j.at("patience").get<int>();
        c.lr = j.at("lr").get<double>();
        c.tau = j.at("tau").get<double>();
        c.lambda = j.at("lambda").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.use_las = j.at("use_las").get<bool>();
        c.use_lcl = j.at("use_lcl").get<bool>();
        c.use_scl = j.at("use_scl").get<bool>();
        c.hidden = j.at("hidden").get<int>();
        c.window = j.at("window").get<int>();
        c.max_len = j.at("max_len").get<int>();
        c.threshold = j.at("threshold").get<double>();
        c.unfreeze_embeddings = j.at("unfreeze_embeddings").get<bool>();
        c.las_on_query = j.at("las_on_query").get<bool>();
        c.strict_negatives = j.at("strict_negatives").get<bool>();
        c.train_corpus = j.at("train_corpus").get<std::string>();
        c.dev_corpus = j.at("dev_corpus").get<std::string>();
        c.test_corpus = j.at("test_corpus").get<std::string>();
        c.embeddings = j.at("embeddings").get<std::string>();
        c.checkpoint_dir = j.at("checkpoint_dir").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint: bad config block: ") + e.what());
    }
    return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    nlohmann::json j;
    j["format"] = kFormat;
    j["epoch"] = ckpt.epoch;
    j["dev_auc"] = ckpt.dev_auc;
    j["dev_episode_seed"] = ckpt.dev_episode_seed;
    j["config"] = config_json(ckpt.config);
    nlohmann::json params;
    for (const auto& [name, tensor] : ckpt.params.named()) params[name] = tensor_json(tensor);
    j["params"] = std::move(params);
    if (ckpt.trained_table) {
        const EmbeddingTable& t = *ckpt.trained_table;
        std::vector<std::string> tokens(t.size());
        for (const auto& [token, id] : t.vocab) tokens[id] = token;
        j["trained_embeddings"] = {{"dim", t.dim},
                                   {"tokens", tokens},
                                   {"matrix", tensor_json(t.matrix)}};
    }

    std::ofstream out(path);
    if (!out) throw ParseError("checkpoint: cannot write " + path);
    out << j.dump(1, '\t') << "\n";
    if (!out.good()) throw ParseError("checkpoint: write to " + path + " failed");
}

Checkpoint load_checkpoint(const std::string& path, const EmbeddingTable* expected_table) {
    std::ifstream in(path);
    if (!in) throw ParseError("checkpoint: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint: " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kFormat) {
        throw ParseError("checkpoint: " + path + " is not a " + kFormat + " file");
    }

    Checkpoint ckpt;
    ckpt.config = config_from_json(j.at("config"));
    ckpt.epoch = j.value("epoch", -1);
    ckpt.dev_auc = j.value("dev_auc", 0.0);
    ckpt.dev_episode_seed = j.value("dev_episode_seed", std::uint64_t{0});

    if (!j.contains("params") || !j["params"].is_object()) {
        throw ParseError("checkpoint: " + path + " has no params block");
    }
    std::map<std::string, Tensor> loaded;
    for (const auto& [name, value] : j["params"].items()) {
        loaded.emplace(name, tensor_from_json(value, name));
    }
    auto take = [&](const char* name) {
        auto it = loaded.find(name);
        if (it == loaded.end()) {
            throw ParseError("checkpoint: missing parameter '" + std::string(name) + "'");
        }
        return it->second;
    };
    ModelParams& p = ckpt.params;
    p.conv_w = take("conv_w");
    p.conv_b = take("conv_b");
    p.attn_w = take("attn_w");
    p.attn_v = take("attn_v");
    p.gate_w = take("gate_w");
    p.gate_b = take("gate_b");
    p.unk = take("unk");
    if (p.conv_w.shape().size() != 3) {
        throw ParseError("checkpoint: conv_w must be rank 3, got " +
                         Tensor::shape_str(p.conv_w.shape()));
    }
    p.window = p.conv_w.shape()[0];
    p.dim = p.conv_w.shape()[1];
    p.hidden = p.conv_w.shape()[2];
    p.max_len = ckpt.config.max_len;
    if (p.hidden != ckpt.config.hidden || p.window != ckpt.config.window) {
        throw ParseError("checkpoint: parameter shapes disagree with the embedded config");
    }

    if (j.contains("trained_embeddings")) {
        const auto& te = j["trained_embeddings"];
        EmbeddingTable table;
        table.dim = te.at("dim").get<int>();
        std::vector<std::string> tokens = te.at("tokens").get<std::vector<std::string>>();
        Tensor matrix = tensor_from_json(te.at("matrix"), "trained_embeddings.matrix");
        if (matrix.shape().size() != 2 ||
            matrix.shape()[0] != static_cast<int>(tokens.size()) ||
            matrix.shape()[1] != table.dim) {
            throw ParseError("checkpoint: trained embedding matrix shape mismatch");
        }
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            table.vocab.emplace(tokens[i], static_cast<int>(i));
        }
        table.matrix = matrix;
        table.frozen = false;
        ckpt.trained_table = std::move(table);
    }

    if (expected_table && expected_table->size() > 0 && expected_table->dim != p.dim) {
        throw DimensionError("checkpoint: model expects " + std::to_string(p.dim) +
                             "-dimensional embeddings, table has " +
                             std::to_string(expected_table->dim));
    }
    return ckpt;
}

}  // namespace fsacd
