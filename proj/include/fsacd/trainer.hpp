#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsacd/embeddings.hpp"
#include "fsacd/episodes.hpp"
#include "fsacd/losses.hpp"
#include "fsacd/model.hpp"
#include "fsacd/tensor.hpp"

namespace fsacd {

/// Everything a run needs, readable from a flat key = value file. The three
/// objective flags pick the setting: all off is the plain prototype model,
/// use_las adds the label gate, and use_lcl / use_scl (mutually exclusive)
/// add a contrastive term weighted by lambda.
struct TrainConfig {
    int n_way = 5;
    int k_shot = 5;
    int queries_per_class = 5;

    int epochs = 30;
    int episodes_per_epoch = 800;
    int eval_episodes = 600;
    int patience = 3;

    double lr = 1e-3;
    double tau = 0.1;
    double lambda = 0.2;
    std::uint64_t seed = 5;

    bool use_las = true;
    bool use_lcl = true;
    bool use_scl = false;

    int hidden = 50;
    int window = 3;
    int max_len = 64;
    double threshold = -1.0;  // consulted only for widths without a built-in cutoff
    bool unfreeze_embeddings = false;
    bool las_on_query = false;
    bool strict_negatives = false;

    std::string train_corpus;
    std::string dev_corpus;
    std::string test_corpus;
    std::string embeddings;
    std::string checkpoint_dir;
};

/// Parse `key = value` lines; '#' starts a comment. Unknown or repeated keys
/// are configuration errors, as is a value that does not parse as the key's
/// type.
TrainConfig parse_config_file(const std::string& path);
void set_config_key(TrainConfig& config, const std::string& key, const std::string& value);
std::vector<std::pair<std::string, std::string>> config_entries(const TrainConfig& config);
void validate_config(const TrainConfig& config);

/// Named settings: "base", "las", "lcl", "scl", "ldf" (las + lcl).
void apply_ablation(TrainConfig& config, const std::string& name);

/// Inverse of apply_ablation where one exists; combinations it cannot
/// produce get a composed name like "las+scl".
std::string setting_name(const TrainConfig& config);

/// One episode's objective, tape-attached, plus the plain values for logs.
struct EpisodeLoss {
    Tensor total;
    double mse = 0.0;
    double contrastive = 0.0;
};

EpisodeLoss episode_loss(const Episode& ep, const EmbeddingTable& table,
                         const ModelParams& params, const TrainConfig& config);

struct EvalResult {
    double macro_f1 = 0.0;
    double auc = 0.0;
    int episodes = 0;
    int skipped_auc = 0;  // degenerate pools left out of the AUC mean
};

/// Score eval_episodes episodes sampled from episode_seed. Episodes with a
/// single-class score pool are skipped for AUC and counted in skipped_auc
/// (with a note to warn_to, when given).
EvalResult evaluate_model(const ModelParams& params, const EmbeddingTable& table,
                          const Corpus& corpus, const TrainConfig& config,
                          std::uint64_t episode_seed, std::ostream* warn_to = nullptr);

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    double dev_macro_f1 = 0.0;
    double dev_auc = 0.0;
    bool improved = false;
};

struct TrainResult {
    ModelParams best_params;
    ModelParams last_params;
    double best_dev_auc = 0.0;
    int best_epoch = -1;
    int epochs_run = 0;
    std::uint64_t dev_episode_seed = 0;
    std::vector<EpochLog> log;
    std::vector<double> first_losses;  // first 10 episode losses, a determinism probe
    std::string best_path;             // written when checkpoint_dir is set
    std::string last_path;
};

/// Episodic training: one optimizer step per sampled episode, dev evaluation
/// after every epoch on a fixed episode stream, early stop after `patience`
/// epochs without a dev-AUC improvement. The table is only mutated when
/// config.unfreeze_embeddings is set.
TrainResult train_model(const TrainConfig& config, const Corpus& train_corpus,
                        const Corpus& dev_corpus, EmbeddingTable& table,
                        std::ostream* log_to = nullptr);

/// The evaluation episode stream for a run seed; training uses it for the
/// dev set and the eval command derives it the same way, so evaluating a
/// checkpoint against its dev corpus with the training seed reproduces the
/// stored dev AUC.
std::uint64_t eval_stream_seed(std::uint64_t run_seed);

/// Drop instances whose text tokenizes to nothing; returns how many were
/// removed (reported by callers so silent data loss is visible).
int drop_untokenizable(Corpus& corpus, std::ostream* warn_to = nullptr);

}  // namespace fsacd
