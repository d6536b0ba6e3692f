#include "fsacd/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "fsacd/errors.hpp"

namespace fsacd {
namespace {

bool is_ascii_punct(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    return u < 128 && std::ispunct(u);
}

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::vector<std::string> split_whitespace(const std::string& line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_double(const std::string& s, int line_no) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size() || s.empty()) {
        throw ParseError("embeddings: line " + std::to_string(line_no) + ": bad float '" +
                         s + "'");
    }
    return v;
}

EmbeddingTable finalize(int dim, std::unordered_map<std::string, int> vocab,
                        std::vector<double> flat, int duplicates) {
    EmbeddingTable table;
    table.dim = dim;
    table.vocab = std::move(vocab);
    table.duplicates_skipped = duplicates;
    const int v = static_cast<int>(table.vocab.size());
    if (v > 0) table.matrix = Tensor::from_data(std::move(flat), {v, dim});
    return table;
}

}  // namespace

std::optional<int> EmbeddingTable::lookup(const std::string& token) const {
    const auto it = vocab.find(token);
    if (it == vocab.end()) return std::nullopt;
    return it->second;
}

std::vector<double> EmbeddingTable::row(int id) const {
    if (id < 0 || id >= size()) {
        throw ContractError("embeddings: row " + std::to_string(id) +
                            " out of range for table of " + std::to_string(size()));
    }
    const auto& d = matrix.data();
    return std::vector<double>(d.begin() + static_cast<std::size_t>(id) * dim,
                               d.begin() + static_cast<std::size_t>(id + 1) * dim);
}

void EmbeddingTable::set_trainable(bool trainable) {
    frozen = !trainable;
    if (matrix.defined() && matrix.requires_grad() != trainable) {
        matrix = Tensor::from_data(matrix.data(), matrix.shape(), trainable);
    }
}

EmbeddingTable load_vectors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("embeddings: cannot open " + path);
    std::unordered_map<std::string, int> vocab;
    std::vector<double> flat;
    int dim = 0, duplicates = 0, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto parts = split_whitespace(line);
        if (parts.empty()) continue;
        if (parts.size() < 2) {
            throw ParseError("embeddings: line " + std::to_string(line_no) +
                             ": expected a token and at least one value");
        }
        const int row_dim = static_cast<int>(parts.size()) - 1;
        if (dim == 0) {
            dim = row_dim;
        } else if (row_dim != dim) {
            throw ParseError("embeddings: line " + std::to_string(line_no) + ": expected " +
                             std::to_string(dim) + " values, got " + std::to_string(row_dim));
        }
        if (vocab.count(parts[0])) {
            ++duplicates;
            for (int i = 1; i <= dim; ++i) parse_double(parts[i], line_no);  // still validated
            continue;
        }
        vocab.emplace(parts[0], static_cast<int>(vocab.size()));
        for (int i = 1; i <= dim; ++i) flat.push_back(parse_double(parts[i], line_no));
    }
    return finalize(dim, std::move(vocab), std::move(flat), duplicates);
}

EmbeddingTable table_from_rows(
    int dim, const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
    if (dim <= 0) throw ConfigError("embeddings: dim must be positive");
    std::unordered_map<std::string, int> vocab;
    std::vector<double> flat;
    int duplicates = 0;
    for (const auto& [token, values] : rows) {
        if (static_cast<int>(values.size()) != dim) {
            throw DimensionError("embeddings: row for '" + token + "' has " +
                                 std::to_string(values.size()) + " values, expected " +
                                 std::to_string(dim));
        }
        if (vocab.count(token)) {
            ++duplicates;
            continue;
        }
        vocab.emplace(token, static_cast<int>(vocab.size()));
        flat.insert(flat.end(), values.begin(), values.end());
    }
    return finalize(dim, std::move(vocab), std::move(flat), duplicates);
}

void save_vectors(const std::string& path, const EmbeddingTable& table) {
    std::ofstream out(path);
    if (!out) throw ParseError("embeddings: cannot write " + path);
    std::vector<const std::string*> by_id(table.vocab.size());
    for (const auto& [token, id] : table.vocab) by_id[id] = &token;
    char buf[64];
    for (std::size_t id = 0; id < by_id.size(); ++id) {
        out << *by_id[id];
        for (int c = 0; c < table.dim; ++c) {
            std::snprintf(buf, sizeof(buf), " %.17g",
                          table.matrix.data()[id * table.dim + c]);
            out << buf;
        }
        out << '\n';
    }
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    for (std::string tok : split_whitespace(text)) {
        for (char& c : tok) c = ascii_lower(c);
        std::size_t b = 0, e = tok.size();
        while (b < e && is_ascii_punct(tok[b])) ++b;
        while (e > b && is_ascii_punct(tok[e - 1])) --e;
        if (e > b) out.push_back(tok.substr(b, e - b));
    }
    return out;
}

std::vector<std::string> label_tokens(const std::string& class_name) {
    if (class_name.empty()) throw ParseError("label_tokens: empty class name");
    std::vector<std::string> out;
    std::string cur;
    for (char c : class_name) {
        if (c == '_') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ascii_lower(c));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

LabelEmbedding build_label_embedding(const std::string& class_name,
                                     const EmbeddingTable& table) {
    LabelEmbedding out;
    out.class_name = class_name;
    std::vector<double> acc(std::max(table.dim, 1), 0.0);
    for (const auto& tok : label_tokens(class_name)) {
        const auto id = table.lookup(tok);
        if (!id) continue;
        const auto r = table.row(*id);
        for (int c = 0; c < table.dim; ++c) acc[c] += r[c];
        out.covered_tokens.push_back(tok);
    }
    if (!out.covered_tokens.empty()) {
        const double inv = 1.0 / static_cast<double>(out.covered_tokens.size());
        for (double& v : acc) v *= inv;
    }
    out.vector = Tensor::from_data(std::move(acc), {std::max(table.dim, 1)});
    return out;
}

double cosine_sim(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine_sim: lengths " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
    double aa = 0.0, bb = 0.0, ab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa += a[i] * a[i];
        bb += b[i] * b[i];
        ab += a[i] * b[i];
    }
    const double na = std::sqrt(aa), nb = std::sqrt(bb);
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    return ab / (na * nb);
}

}  // namespace fsacd
