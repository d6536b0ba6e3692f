#include "fsacd/episodes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include "fsacd/errors.hpp"
#include "json.hpp"

namespace fsacd {
namespace {

void shuffle_ids(std::vector<int>& ids, Rng& rng) {
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        const std::size_t j = i + rng.uniform_int(ids.size() - i);
        std::swap(ids[i], ids[j]);
    }
}

std::vector<double> gaussian_vec(int dim, Rng& rng) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal(0.0, 1.0);
    return v;
}

double norm_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize_in_place(std::vector<double>& v) {
    const double n = norm_of(v);
    for (double& x : v) x /= n;
}

}  // namespace

Corpus corpus_from_instances(std::vector<Instance> instances) {
    Corpus corpus;
    corpus.instances = std::move(instances);
    for (int id = 0; id < static_cast<int>(corpus.instances.size()); ++id) {
        for (const auto& label : corpus.instances[id].labels)
            corpus.index[label].push_back(id);
    }
    corpus.classes.reserve(corpus.index.size());
    for (const auto& [name, ids] : corpus.index) corpus.classes.push_back(name);
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("corpus: cannot write " + path);
    for (const auto& inst : corpus.instances) {
        nlohmann::json j = {{"text", inst.text}, {"labels", inst.labels}};
        out << j.dump() << "\n";
    }
    if (!out.good()) throw ParseError("corpus: write to " + path + " failed");
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("corpus: cannot open " + path);
    std::vector<Instance> instances;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("corpus: line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
            throw ParseError("corpus: line " + std::to_string(line_no) +
                             ": missing \"text\" string");
        }
        if (!j.contains("labels") || !j["labels"].is_array() || j["labels"].empty()) {
            throw ParseError("corpus: line " + std::to_string(line_no) +
                             ": instance needs a nonempty \"labels\" array");
        }
        Instance inst;
        inst.text = j["text"].get<std::string>();
        std::set<std::string> seen;
        for (const auto& item : j["labels"]) {
            if (!item.is_string()) {
                throw ParseError("corpus: line " + std::to_string(line_no) +
                                 ": labels must be strings");
            }
            const auto label = item.get<std::string>();
            if (seen.insert(label).second) inst.labels.push_back(label);
        }
        instances.push_back(std::move(inst));
    }
    return corpus_from_instances(std::move(instances));
}

Episode sample_episode(const Corpus& corpus, int n_way, int k_shot,
                       int queries_per_class, Rng& rng) {
    if (n_way <= 0 || k_shot <= 0 || queries_per_class <= 0) {
        throw ConfigError("sample_episode: n_way, k_shot, queries_per_class must be positive");
    }
    const int total = static_cast<int>(corpus.classes.size());
    if (total < n_way) {
        throw SamplingError("sample_episode: need " + std::to_string(n_way) +
                            " classes, corpus has " + std::to_string(total));
    }

    std::vector<int> class_ids(total);
    for (int i = 0; i < total; ++i) class_ids[i] = i;
    for (int i = 0; i < n_way; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(total - i));
        std::swap(class_ids[i], class_ids[j]);
    }

    Episode ep;
    for (int n = 0; n < n_way; ++n) ep.classes.push_back(corpus.classes[class_ids[n]]);

    std::unordered_set<int> used;  // support ids, global across classes
    ep.support.resize(n_way);
    for (int n = 0; n < n_way; ++n) {
        std::vector<int> pool = corpus.index.at(ep.classes[n]);
        shuffle_ids(pool, rng);
        for (int id : pool) {
            if (static_cast<int>(ep.support[n].size()) == k_shot) break;
            if (used.count(id)) continue;
            used.insert(id);
            ep.support[n].push_back(corpus.instances[id]);
        }
        if (static_cast<int>(ep.support[n].size()) < k_shot) {
            throw SamplingError("sample_episode: class '" + ep.classes[n] +
                                "' cannot fill " + std::to_string(k_shot) +
                                " support instances");
        }
    }

    std::unordered_set<int> emitted;
    std::vector<int> query_ids;
    for (int n = 0; n < n_way; ++n) {
        std::vector<int> pool = corpus.index.at(ep.classes[n]);
        shuffle_ids(pool, rng);
        int count = 0;
        for (int id : pool) {
            if (count == queries_per_class) break;
            if (used.count(id)) continue;
            // Already emitted for an earlier class: its label bit for this
            // class is set through the label vector, and the next unused
            // instance acts as the replacement.
            if (emitted.count(id)) continue;
            emitted.insert(id);
            query_ids.push_back(id);
            ++count;
        }
        if (count < queries_per_class) {
            throw SamplingError("sample_episode: class '" + ep.classes[n] +
                                "' cannot fill " + std::to_string(queries_per_class) +
                                " queries");
        }
    }

    for (int id : query_ids) {
        const Instance& inst = corpus.instances[id];
        std::vector<int> y(n_way, 0);
        for (int n = 0; n < n_way; ++n) {
            if (std::find(inst.labels.begin(), inst.labels.end(), ep.classes[n]) !=
                inst.labels.end())
                y[n] = 1;
        }
        ep.queries.push_back(inst);
        ep.query_labels.push_back(std::move(y));
    }
    return ep;
}

SynthResult make_synthetic_corpus(int n_classes, int instances_per_class,
                                  double keyword_strength, int noise_vocab_size,
                                  const std::vector<std::vector<int>>& label_similarity_groups,
                                  Rng& rng, const SynthConfig& cfg) {
    if (n_classes <= 0 || instances_per_class <= 0) {
        throw ConfigError("make_synthetic_corpus: class and instance counts must be positive");
    }
    if (keyword_strength < 0.0 || keyword_strength > 1.0) {
        throw ConfigError("make_synthetic_corpus: keyword_strength must be in [0,1]");
    }
    if (noise_vocab_size < 0) {
        throw ConfigError("make_synthetic_corpus: noise_vocab_size must be >= 0");
    }
    if (cfg.dim <= 0 || cfg.keywords_per_class <= 0 || cfg.tokens_per_sentence <= 0 ||
        cfg.group_cosine <= 0.0 || cfg.group_cosine > 1.0) {
        throw ConfigError("make_synthetic_corpus: invalid generator config");
    }
    std::vector<bool> grouped(n_classes, false);
    for (const auto& group : label_similarity_groups) {
        for (int cid : group) {
            if (cid < 0 || cid >= n_classes) {
                throw ConfigError("make_synthetic_corpus: group class id " +
                                  std::to_string(cid) + " out of range");
            }
            if (grouped[cid]) {
                throw ConfigError("make_synthetic_corpus: class " + std::to_string(cid) +
                                  " appears in two similarity groups");
            }
            grouped[cid] = true;
        }
    }

    // Orthonormal pool; once dim directions are taken, fall back to plain
    // random units (near-orthogonal in high dimension anyway).
    std::vector<std::vector<double>> pool;
    auto random_unit = [&]() {
        auto v = gaussian_vec(cfg.dim, rng);
        while (norm_of(v) < 1e-6) v = gaussian_vec(cfg.dim, rng);
        normalize_in_place(v);
        return v;
    };
    auto next_ortho = [&]() {
        if (static_cast<int>(pool.size()) >= cfg.dim) return random_unit();
        while (true) {
            auto v = gaussian_vec(cfg.dim, rng);
            for (const auto& q : pool) {
                double d = 0.0;
                for (int i = 0; i < cfg.dim; ++i) d += v[i] * q[i];
                for (int i = 0; i < cfg.dim; ++i) v[i] -= d * q[i];
            }
            if (norm_of(v) > 1e-6) {
                normalize_in_place(v);
                pool.push_back(v);
                return v;
            }
        }
    };

    // Within a group every pair's cosine is exactly group_cosine:
    // (b + d*o_i).(b + d*o_j) / (1 + d^2) = 1 / (1 + d^2) for orthonormal b, o.
    std::vector<std::vector<double>> dir(n_classes);
    const double delta = std::sqrt(1.0 / cfg.group_cosine - 1.0);
    for (const auto& group : label_similarity_groups) {
        const auto base = next_ortho();
        for (int cid : group) {
            auto o = next_ortho();
            std::vector<double> d(cfg.dim);
            for (int i = 0; i < cfg.dim; ++i) d[i] = base[i] + delta * o[i];
            normalize_in_place(d);
            dir[cid] = std::move(d);
        }
    }
    for (int cid = 0; cid < n_classes; ++cid)
        if (!grouped[cid]) dir[cid] = next_ortho();

    SynthResult out;
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    char buf[32];
    for (int n = 0; n < n_classes; ++n) {
        std::snprintf(buf, sizeof(buf), "aspect%02d", n);
        out.class_names.emplace_back(buf);
        rows.emplace_back(out.class_names.back(), dir[n]);
    }
    for (int n = 0; n < n_classes; ++n) {
        auto& kws = out.class_keywords[out.class_names[n]];
        for (int j = 0; j < cfg.keywords_per_class; ++j) {
            std::snprintf(buf, sizeof(buf), "kw%02dx%d", n, j);
            kws.emplace_back(buf);
            std::vector<double> v(cfg.dim);
            if (keyword_strength == 1.0) {
                v = dir[n];
            } else {
                const auto g = random_unit();
                for (int i = 0; i < cfg.dim; ++i)
                    v[i] = keyword_strength * dir[n][i] + (1.0 - keyword_strength) * g[i];
                normalize_in_place(v);
            }
            rows.emplace_back(kws.back(), std::move(v));
        }
    }
    std::vector<std::string> noise_tokens;
    for (int j = 0; j < noise_vocab_size; ++j) {
        std::snprintf(buf, sizeof(buf), "zz%d", j);
        noise_tokens.emplace_back(buf);
        rows.emplace_back(noise_tokens.back(), random_unit());
    }
    out.table = table_from_rows(cfg.dim, rows);

    const int T = cfg.tokens_per_sentence;
    int n_noise = 0;
    if (noise_vocab_size > 0) {
        n_noise = std::min<int>(T - 1, static_cast<int>(std::llround(T * cfg.noise_fraction)));
        n_noise = std::max(n_noise, 0);
    }
    const int n_kw = T - n_noise;

    std::vector<Instance> instances;
    for (int n = 0; n < n_classes; ++n) {
        const auto& own = out.class_keywords[out.class_names[n]];
        for (int i = 0; i < instances_per_class; ++i) {
            const bool multi =
                n_classes >= 2 && rng.uniform() < cfg.multi_label_fraction;
            int partner = -1;
            if (multi) {
                partner = static_cast<int>(rng.uniform_int(n_classes - 1));
                if (partner >= n) ++partner;
            }
            std::vector<std::string> toks;
            const int own_kw = multi ? (n_kw + 1) / 2 : n_kw;
            for (int t = 0; t < own_kw; ++t)
                toks.push_back(own[rng.uniform_int(own.size())]);
            if (multi) {
                const auto& other = out.class_keywords[out.class_names[partner]];
                for (int t = own_kw; t < n_kw; ++t)
                    toks.push_back(other[rng.uniform_int(other.size())]);
            }
            for (int t = 0; t < n_noise; ++t)
                toks.push_back(noise_tokens[rng.uniform_int(noise_tokens.size())]);
            for (std::size_t a = 0; a + 1 < toks.size(); ++a) {
                const std::size_t b = a + rng.uniform_int(toks.size() - a);
                std::swap(toks[a], toks[b]);
            }
            Instance inst;
            for (std::size_t t = 0; t < toks.size(); ++t) {
                if (t) inst.text += ' ';
                inst.text += toks[t];
            }
            inst.labels.push_back(out.class_names[n]);
            if (multi) inst.labels.push_back(out.class_names[partner]);
            instances.push_back(std::move(inst));
        }
    }
    out.corpus = corpus_from_instances(std::move(instances));
    return out;
}

Corpus filter_corpus(const Corpus& corpus, const std::vector<std::string>& keep_classes,
                     int* dropped) {
    const std::set<std::string> keep(keep_classes.begin(), keep_classes.end());
    std::vector<Instance> kept;
    int spanning = 0;
    for (const auto& inst : corpus.instances) {
        int inside = 0;
        for (const auto& label : inst.labels) inside += keep.count(label) ? 1 : 0;
        if (inside == static_cast<int>(inst.labels.size())) kept.push_back(inst);
        else if (inside > 0) ++spanning;
    }
    if (dropped) *dropped = spanning;
    return corpus_from_instances(std::move(kept));
}

}  // namespace fsacd
