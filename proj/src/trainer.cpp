#include "fsacd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

#include "fsacd/adam.hpp"
#include "fsacd/checkpoint.hpp"
#include "fsacd/errors.hpp"
#include "fsacd/metrics.hpp"
#include "fsacd/ops.hpp"

namespace fsacd {

namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

long long to_ll(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
    }
    if (used != value.size()) {
        throw ConfigError("key '" + key + "': '" + value + "' is not an integer");
    }
    return v;
}

int to_int(const std::string& key, const std::string& value) {
    return static_cast<int>(to_ll(key, value));
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    const long long v = to_ll(key, value);
    if (v < 0) throw ConfigError("key '" + key + "': must not be negative");
    return static_cast<std::uint64_t>(v);
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + value + "' is not a number");
    }
    if (used != value.size()) {
        throw ConfigError("key '" + key + "': '" + value + "' is not a number");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("key '" + key + "': '" + value + "' is not true/false");
}

std::string double_str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<LabelEmbedding> class_labels(const Episode& ep, const EmbeddingTable& table) {
    std::vector<LabelEmbedding> labels;
    labels.reserve(ep.classes.size());
    for (const auto& name : ep.classes) labels.push_back(build_label_embedding(name, table));
    return labels;
}

EmbeddingTable snapshot_table(const EmbeddingTable& table) {
    EmbeddingTable copy;
    copy.dim = table.dim;
    copy.vocab = table.vocab;
    copy.frozen = table.frozen;
    copy.duplicates_skipped = table.duplicates_skipped;
    if (table.size() > 0) {
        copy.matrix = Tensor::from_data(table.matrix.data(), table.matrix.shape());
    }
    return copy;
}

}  // namespace

void set_config_key(TrainConfig& c, const std::string& key, const std::string& value) {
    if (key == "n_way") c.n_way = to_int(key, value);
    else if (key == "k_shot") c.k_shot = to_int(key, value);
    else if (key == "queries_per_class") c.queries_per_class = to_int(key, value);
    else if (key == "epochs") c.epochs = to_int(key, value);
    else if (key == "episodes_per_epoch") c.episodes_per_epoch = to_int(key, value);
    else if (key == "eval_episodes") c.eval_episodes = to_int(key, value);
    else if (key == "patience") c.patience = to_int(key, value);
    else if (key == "lr") c.lr = to_double(key, value);
    else if (key == "tau") c.tau = to_double(key, value);
    else if (key == "lambda") c.lambda = to_double(key, value);
    else if (key == "seed") c.seed = to_u64(key, value);
    else if (key == "use_las") c.use_las = to_bool(key, value);
    else if (key == "use_lcl") c.use_lcl = to_bool(key, value);
    else if (key == "use_scl") c.use_scl = to_bool(key, value);
    else if (key == "hidden") c.hidden = to_int(key, value);
    else if (key == "window") c.window = to_int(key, value);
    else if (key == "max_len") c.max_len = to_int(key, value);
    else if (key == "threshold") c.threshold = to_double(key, value);
    else if (key == "unfreeze_embeddings") c.unfreeze_embeddings = to_bool(key, value);
    else if (key == "las_on_query") c.las_on_query = to_bool(key, value);
    else if (key == "strict_negatives") c.strict_negatives = to_bool(key, value);
    else if (key == "train_corpus") c.train_corpus = value;
    else if (key == "dev_corpus") c.dev_corpus = value;
    else if (key == "test_corpus") c.test_corpus = value;
    else if (key == "embeddings") c.embeddings = value;
    else if (key == "checkpoint_dir") c.checkpoint_dir = value;
    else throw ConfigError("unknown key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& c) {
    return {
        {"n_way", std::to_string(c.n_way)},
        {"k_shot", std::to_string(c.k_shot)},
        {"queries_per_class", std::to_string(c.queries_per_class)},
        {"epochs", std::to_string(c.epochs)},
        {"episodes_per_epoch", std::to_string(c.episodes_per_epoch)},
        {"eval_episodes", std::to_string(c.eval_episodes)},
        {"patience", std::to_string(c.patience)},
        {"lr", double_str(c.lr)},
        {"tau", double_str(c.tau)},
        {"lambda", double_str(c.lambda)},
        {"seed", std::to_string(c.seed)},
        {"use_las", c.use_las ? "true" : "false"},
        {"use_lcl", c.use_lcl ? "true" : "false"},
        {"use_scl", c.use_scl ? "true" : "false"},
        {"hidden", std::to_string(c.hidden)},
        {"window", std::to_string(c.window)},
        {"max_len", std::to_string(c.max_len)},
        {"threshold", double_str(c.threshold)},
        {"unfreeze_embeddings", c.unfreeze_embeddings ? "true" : "false"},
        {"las_on_query", c.las_on_query ? "true" : "false"},
        {"strict_negatives", c.strict_negatives ? "true" : "false"},
        {"train_corpus", c.train_corpus},
        {"dev_corpus", c.dev_corpus},
        {"test_corpus", c.test_corpus},
        {"embeddings", c.embeddings},
        {"checkpoint_dir", c.checkpoint_dir},
    };
}

TrainConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    TrainConfig c;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trimmed(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        const std::string key = trimmed(line.substr(0, eq));
        const std::string value = trimmed(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config: line " + std::to_string(lineno) + ": empty key");
        }
        if (!seen.insert(key).second) {
            throw ConfigError("config: line " + std::to_string(lineno) +
                              ": duplicate key '" + key + "'");
        }
        try {
            set_config_key(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config: line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

void validate_config(const TrainConfig& c) {
    auto positive = [](const char* name, long v) {
        if (v <= 0) {
            throw ConfigError(std::string("config: ") + name + " must be positive, got " +
                              std::to_string(v));
        }
    };
    positive("n_way", c.n_way);
    positive("k_shot", c.k_shot);
    positive("queries_per_class", c.queries_per_class);
    positive("epochs", c.epochs);
    positive("episodes_per_epoch", c.episodes_per_epoch);
    positive("eval_episodes", c.eval_episodes);
    positive("patience", c.patience);
    positive("hidden", c.hidden);
    positive("max_len", c.max_len);
    if (c.window <= 0 || c.window % 2 == 0) {
        throw ConfigError("config: window must be a positive odd number, got " +
                          std::to_string(c.window));
    }
    if (c.lr <= 0.0) throw ConfigError("config: lr must be positive");
    if (c.tau <= 0.0) throw ConfigError("config: tau must be positive");
    if (c.lambda < 0.0) throw ConfigError("config: lambda must not be negative");
    if (c.use_lcl && c.use_scl) {
        throw ConfigError("config: use_lcl and use_scl are mutually exclusive");
    }
    if (c.threshold != -1.0 && (c.threshold <= 0.0 || c.threshold >= 1.0)) {
        throw ConfigError("config: threshold must lie in (0, 1), or -1 for the built-in cutoff");
    }
}

void apply_ablation(TrainConfig& c, const std::string& name) {
    if (name == "base") {
        c.use_las = false;
        c.use_lcl = false;
        c.use_scl = false;
    } else if (name == "las") {
        c.use_las = true;
        c.use_lcl = false;
        c.use_scl = false;
    } else if (name == "lcl") {
        c.use_las = false;
        c.use_lcl = true;
        c.use_scl = false;
    } else if (name == "scl") {
        c.use_las = false;
        c.use_lcl = false;
        c.use_scl = true;
    } else if (name == "ldf") {
        c.use_las = true;
        c.use_lcl = true;
        c.use_scl = false;
    } else {
        throw ConfigError("ablation: unknown setting '" + name +
                          "' (expected base, las, lcl, scl, or ldf)");
    }
}

std::string setting_name(const TrainConfig& c) {
    if (c.use_las && c.use_lcl) return "ldf";
    if (c.use_las && c.use_scl) return "las+scl";
    if (c.use_las) return "las";
    if (c.use_lcl) return "lcl";
    if (c.use_scl) return "scl";
    return "base";
}

EpisodeLoss episode_loss(const Episode& ep, const EmbeddingTable& table,
                         const ModelParams& params, const TrainConfig& config) {
    const int n_way = static_cast<int>(ep.classes.size());
    const bool needs_labels = config.use_las || config.use_lcl || config.las_on_query;
    std::vector<LabelEmbedding> labels;
    if (needs_labels) labels = class_labels(ep, table);

    EpisodePrototypes protos = build_prototypes(ep, table, params, labels, config.use_las);
    Tensor scores = score_episode(ep, table, params, protos,
                                  config.las_on_query ? &labels : nullptr);

    std::vector<double> gold;
    gold.reserve(ep.query_labels.size() * n_way);
    for (const auto& row : ep.query_labels) {
        for (int bit : row) gold.push_back(static_cast<double>(bit));
    }
    Tensor mse = mse_loss(
        scores, Tensor::from_data(std::move(gold),
                                  {static_cast<int>(ep.query_labels.size()), n_way}));

    EpisodeLoss out;
    out.mse = mse.value();
    if (config.use_lcl || config.use_scl) {
        std::vector<Tensor> reps;
        std::vector<int> rep_labels;
        for (int n = 0; n < n_way; ++n) {
            for (const auto& r : protos.reps[n]) {
                reps.push_back(r);
                rep_labels.push_back(n);
            }
        }
        Tensor contrastive =
            config.use_lcl
                ? label_weighted_contrastive_loss({reps, rep_labels,
                                                   label_weight_matrix(labels), config.tau,
                                                   config.strict_negatives})
                : supervised_contrastive_loss(reps, rep_labels, config.tau);
        out.contrastive = contrastive.value();
        out.total = total_loss(mse, contrastive, config.lambda);
    } else {
        out.total = mse;
    }
    return out;
}

std::uint64_t eval_stream_seed(std::uint64_t run_seed) { return Rng(run_seed).split(2).seed(); }

EvalResult evaluate_model(const ModelParams& params, const EmbeddingTable& table,
                          const Corpus& corpus, const TrainConfig& config,
                          std::uint64_t episode_seed, std::ostream* warn_to) {
    validate_config(config);
    const Rng stream(episode_seed);
    EvalResult out;
    double f1_sum = 0.0, auc_sum = 0.0;
    int auc_n = 0;
    for (int i = 0; i < config.eval_episodes; ++i) {
        Rng ep_rng = stream.split(static_cast<std::uint64_t>(i));
        Episode ep = sample_episode(corpus, config.n_way, config.k_shot,
                                    config.queries_per_class, ep_rng);
        std::vector<LabelEmbedding> labels;
        if (config.use_las || config.las_on_query) labels = class_labels(ep, table);
        EpisodePrototypes protos = build_prototypes(ep, table, params, labels, config.use_las);
        Tensor scores = score_episode(ep, table, params, protos,
                                      config.las_on_query ? &labels : nullptr);

        EpisodeScores es;
        es.n_way = config.n_way;
        es.gold = ep.query_labels;
        const int m = scores.shape()[0];
        for (int q = 0; q < m; ++q) {
            es.scores.emplace_back(scores.data().begin() + q * config.n_way,
                                   scores.data().begin() + (q + 1) * config.n_way);
        }
        f1_sum += macro_f1(es, config.threshold);
        if (auto a = auc(es)) {
            auc_sum += *a;
            ++auc_n;
        } else {
            ++out.skipped_auc;
        }
        ++out.episodes;
    }
    out.macro_f1 = f1_sum / config.eval_episodes;
    out.auc = auc_n > 0 ? auc_sum / auc_n : 0.0;
    if (warn_to && out.skipped_auc > 0) {
        *warn_to << "warning: auc skipped on " << out.skipped_auc << " of "
                 << config.eval_episodes << " episodes (single-class score pools)\n";
    }
    return out;
}

TrainResult train_model(const TrainConfig& config, const Corpus& train_corpus,
                        const Corpus& dev_corpus, EmbeddingTable& table,
                        std::ostream* log_to) {
    validate_config(config);
    if (table.size() == 0) {
        throw ConfigError("train: embedding table is empty; an embeddings file is required");
    }

    const Rng master(config.seed);
    Rng init_rng = master.split(0);
    const Rng train_stream = master.split(1);

    ModelParams params =
        ModelParams::init(table.dim, config.hidden, config.window, config.max_len, init_rng);
    std::vector<Tensor> opt_params = params.trainable();
    if (config.unfreeze_embeddings) {
        table.set_trainable(true);
        opt_params.push_back(table.matrix);
    }
    Adam opt(opt_params, config.lr);

    TrainResult result;
    result.dev_episode_seed = eval_stream_seed(config.seed);
    result.best_dev_auc = -std::numeric_limits<double>::infinity();

    std::optional<EmbeddingTable> best_table;
    int stale_epochs = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double loss_sum = 0.0;
        for (int i = 0; i < config.episodes_per_epoch; ++i) {
            const std::uint64_t step =
                static_cast<std::uint64_t>(epoch) * config.episodes_per_epoch + i;
            Rng ep_rng = train_stream.split(step);
            const std::uint64_t episode_seed = ep_rng.seed();
            Episode ep = sample_episode(train_corpus, config.n_way, config.k_shot,
                                        config.queries_per_class, ep_rng);
            EpisodeLoss loss = episode_loss(ep, table, params, config);
            const double value = loss.total.value();
            if (!std::isfinite(value)) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", step " + std::to_string(step) + " (episode seed " +
                                   std::to_string(episode_seed) + ")");
            }
            if (epoch == 0 && result.first_losses.size() < 10) {
                result.first_losses.push_back(value);
            }
            loss_sum += value;
            loss.total.backward();
            opt.step();
        }

        EvalResult dev = evaluate_model(params, table, dev_corpus, config,
                                        result.dev_episode_seed, log_to);
        EpochLog entry;
        entry.epoch = epoch;
        entry.mean_loss = loss_sum / config.episodes_per_epoch;
        entry.dev_macro_f1 = dev.macro_f1;
        entry.dev_auc = dev.auc;
        entry.improved = dev.auc > result.best_dev_auc;
        result.log.push_back(entry);
        result.epochs_run = epoch + 1;

        if (entry.improved) {
            result.best_dev_auc = dev.auc;
            result.best_epoch = epoch;
            result.best_params = params.clone_values();
            if (config.unfreeze_embeddings) best_table = snapshot_table(table);
            stale_epochs = 0;
        } else {
            ++stale_epochs;
        }
        if (log_to) {
            char line[160];
            std::snprintf(line, sizeof line,
                          "epoch %d/%d: train_loss %.6f dev_f1 %.4f dev_auc %.4f%s\n",
                          epoch + 1, config.epochs, entry.mean_loss, dev.macro_f1, dev.auc,
                          entry.improved ? " (improved)" : "");
            *log_to << line << std::flush;
        }
        if (stale_epochs >= config.patience) {
            if (log_to) {
                *log_to << "early stop: no dev AUC improvement in " << stale_epochs
                        << " epochs\n";
            }
            break;
        }
    }

    result.last_params = params.clone_values();
    if (!config.checkpoint_dir.empty()) {
        std::filesystem::create_directories(config.checkpoint_dir);
        Checkpoint best;
        best.params = result.best_params;
        best.config = config;
        best.dev_auc = result.best_dev_auc;
        best.epoch = result.best_epoch;
        best.dev_episode_seed = result.dev_episode_seed;
        best.trained_table = best_table;
        result.best_path = config.checkpoint_dir + "/best.json";
        save_checkpoint(best, result.best_path);

        Checkpoint last = best;
        last.params = result.last_params;
        last.dev_auc = result.log.back().dev_auc;
        last.epoch = result.epochs_run - 1;
        if (config.unfreeze_embeddings) last.trained_table = snapshot_table(table);
        result.last_path = config.checkpoint_dir + "/last.json";
        save_checkpoint(last, result.last_path);
    }
    if (log_to) {
        char line[120];
        std::snprintf(line, sizeof line, "best dev_auc %.6f at epoch %d/%d\n",
                      result.best_dev_auc, result.best_epoch + 1, result.epochs_run);
        *log_to << line;
    }
    return result;
}

int drop_untokenizable(Corpus& corpus, std::ostream* warn_to) {
    std::vector<Instance> kept;
    kept.reserve(corpus.instances.size());
    int dropped = 0;
    for (auto& inst : corpus.instances) {
        if (tokenize(inst.text).empty()) ++dropped;
        else kept.push_back(std::move(inst));
    }
    // Rebuild even when nothing was dropped: the loop has already moved the
    // surviving instances out of the corpus.
    corpus = corpus_from_instances(std::move(kept));
    if (dropped > 0 && warn_to) {
        *warn_to << "warning: dropped " << dropped
                 << " instances with no usable tokens\n";
    }
    return dropped;
}

}  // namespace fsacd
