#pragma once

#include <map>
#include <string>
#include <vector>

#include "fsacd/embeddings.hpp"
#include "fsacd/rng.hpp"

namespace fsacd {

struct Instance {
    std::string text;
    std::vector<std::string> labels;  // unique, original order
};

/// Class-partitioned view of a dataset. Read-only after construction; the
/// index maps every class to the ids of all instances carrying that label.
struct Corpus {
    std::vector<Instance> instances;
    std::vector<std::string> classes;  // sorted
    std::map<std::string, std::vector<int>> index;
};

/// JSON Lines, one object per line with "text" (string) and "labels"
/// (nonempty string array).
Corpus load_corpus(const std::string& path);

/// Inverse of load_corpus: one JSON object per instance, in corpus order.
void save_corpus(const Corpus& corpus, const std::string& path);

Corpus corpus_from_instances(std::vector<Instance> instances);

/// One N-way K-shot meta-task. Query labels are binary vectors over the
/// episode's own classes; labels outside the episode are ignored.
struct Episode {
    std::vector<std::string> classes;            // N names in draw order
    std::vector<std::vector<Instance>> support;  // N x K
    std::vector<Instance> queries;               // M = N x queries_per_class
    std::vector<std::vector<int>> query_labels;  // M x N in {0,1}
};

/// Draws N distinct classes, K support instances per class without
/// replacement, then queries_per_class queries per class from the remaining
/// data. An instance drawn as query for a second episode class is emitted
/// once with both bits set and a replacement is drawn, keeping M constant.
Episode sample_episode(const Corpus& corpus, int n_way, int k_shot,
                       int queries_per_class, Rng& rng);

struct SynthConfig {
    int dim = 24;
    int keywords_per_class = 6;
    int tokens_per_sentence = 8;
    double noise_fraction = 0.5;  // share of tokens drawn from the noise vocabulary
    double multi_label_fraction = 0.2;
    double group_cosine = 0.9;  // label-embedding cosine within a similarity group
};

struct SynthResult {
    Corpus corpus;
    EmbeddingTable table;
    std::vector<std::string> class_names;
    std::map<std::string, std::vector<std::string>> class_keywords;
};

/// Builds a corpus whose class keywords cluster around the class's label
/// embedding (tightness set by keyword_strength in [0,1]), mixed with shared
/// noise tokens. Classes listed in one similarity group get near-parallel
/// label embeddings; multi-label instances union two classes' keywords.
SynthResult make_synthetic_corpus(int n_classes, int instances_per_class,
                                  double keyword_strength, int noise_vocab_size,
                                  const std::vector<std::vector<int>>& label_similarity_groups,
                                  Rng& rng, const SynthConfig& cfg = {});

/// Keeps instances whose labels all fall inside keep_classes. dropped, when
/// given, counts instances with some but not all labels inside the cut.
Corpus filter_corpus(const Corpus& corpus, const std::vector<std::string>& keep_classes,
                     int* dropped = nullptr);

}  // namespace fsacd
