#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fsacd/embeddings.hpp"
#include "fsacd/model.hpp"
#include "fsacd/trainer.hpp"

namespace fsacd {

/// A self-describing snapshot: parameters plus the configuration that built
/// them, so evaluation needs nothing but the file (and a corpus). When the
/// run unfroze its embedding table, the trained table rides along too.
struct Checkpoint {
    ModelParams params;
    TrainConfig config;
    double dev_auc = 0.0;
    int epoch = -1;
    std::uint64_t dev_episode_seed = 0;
    std::optional<EmbeddingTable> trained_table;
};

/// JSON with full double round-trip fidelity: load(save(x)) is bit-identical.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

/// expected_table, when given, must match the checkpoint's embedding width.
Checkpoint load_checkpoint(const std::string& path,
                           const EmbeddingTable* expected_table = nullptr);

}  // namespace fsacd
