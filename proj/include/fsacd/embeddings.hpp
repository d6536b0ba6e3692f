#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsacd/tensor.hpp"

namespace fsacd {

/// Pretrained word vectors. Rows are immutable after load; set_trainable(true)
/// rebuilds the matrix as a parameter for the fine-tuning configuration.
struct EmbeddingTable {
    int dim = 0;
    std::unordered_map<std::string, int> vocab;
    Tensor matrix;  // [V x dim]; undefined when the table is empty
    bool frozen = true;
    int duplicates_skipped = 0;

    int size() const { return static_cast<int>(vocab.size()); }
    std::optional<int> lookup(const std::string& token) const;
    /// Copy of one row by id.
    std::vector<double> row(int id) const;
    void set_trainable(bool trainable);
};

/// Whitespace-separated text, one token followed by dim floats per line.
/// The first data line fixes dim; duplicate tokens keep the first occurrence.
EmbeddingTable load_vectors(const std::string& path);

/// Table built directly from (token, row) pairs; duplicates keep the first.
EmbeddingTable table_from_rows(int dim,
                               const std::vector<std::pair<std::string, std::vector<double>>>& rows);

/// Writes the load_vectors format with enough digits to round-trip exactly.
void save_vectors(const std::string& path, const EmbeddingTable& table);

/// Lowercase, split on whitespace, strip leading/trailing ASCII punctuation
/// per token, drop empties.
std::vector<std::string> tokenize(const std::string& text);

/// Class-name tokens: split on underscore, lowercase, duplicates kept.
std::vector<std::string> label_tokens(const std::string& class_name);

struct LabelEmbedding {
    std::string class_name;
    Tensor vector;  // [dim], constant; zero vector when no token is covered
    std::vector<std::string> covered_tokens;
};

/// Mean of the in-vocabulary rows of the class-name tokens; zero vector when
/// every token is out of vocabulary.
LabelEmbedding build_label_embedding(const std::string& class_name,
                                     const EmbeddingTable& table);

/// Plain-double cosine with the same zero-norm guard as the cosine op.
double cosine_sim(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace fsacd
