// Command-line front end: train, eval, gen-synth, and report subcommands.
// Exit codes: 0 success, 1 usage/configuration, 2 data, 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsacd/checkpoint.hpp"
#include "fsacd/errors.hpp"
#include "fsacd/report.hpp"
#include "fsacd/trainer.hpp"
#include "json.hpp"

namespace {

using namespace fsacd;

struct TrainArgs {
    std::string config_path;
    std::int64_t seed = -1;
    std::string ablation;
};

struct EvalArgs {
    std::string checkpoint_path;
    std::string corpus_path;
    std::string embeddings_path;
    std::string out_dir;
    std::vector<std::uint64_t> seeds = {5, 10, 15, 20, 25};
};

struct SynthArgs {
    std::string out_dir;
    int classes = 15;
    int instances = 40;
    double keyword_strength = 0.9;
    int noise_vocab = 12;
    std::string groups;  // "0,1;2,3"
    std::string splits;  // "5,5,5" class counts for train/dev/test
    std::uint64_t seed = 7;
    SynthConfig knobs;
};

struct ReportArgs {
    std::string runs_dir;
    std::string json_path;
};

std::vector<std::vector<int>> parse_groups(const std::string& text) {
    std::vector<std::vector<int>> groups;
    if (text.empty()) return groups;
    std::stringstream outer(text);
    std::string group;
    while (std::getline(outer, group, ';')) {
        std::vector<int> ids;
        std::stringstream inner(group);
        std::string id;
        while (std::getline(inner, id, ',')) {
            try {
                ids.push_back(std::stoi(id));
            } catch (const std::exception&) {
                throw ConfigError("gen-synth: bad class id '" + id + "' in --groups");
            }
        }
        if (!ids.empty()) groups.push_back(std::move(ids));
    }
    return groups;
}

std::vector<int> parse_splits(const std::string& text, int n_classes) {
    std::vector<int> counts;
    if (text.empty()) return counts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            counts.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("gen-synth: bad count '" + part + "' in --splits");
        }
    }
    if (counts.size() != 3) {
        throw ConfigError("gen-synth: --splits needs three counts (train,dev,test)");
    }
    int total = 0;
    for (int c : counts) {
        if (c <= 0) throw ConfigError("gen-synth: split counts must be positive");
        total += c;
    }
    if (total > n_classes) {
        throw ConfigError("gen-synth: splits use " + std::to_string(total) +
                          " classes but only " + std::to_string(n_classes) + " exist");
    }
    return counts;
}

int run_train(const TrainArgs& args) {
    TrainConfig config = parse_config_file(args.config_path);
    if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.ablation.empty()) apply_ablation(config, args.ablation);
    validate_config(config);
    if (config.embeddings.empty()) throw ConfigError("train: config needs an embeddings path");
    if (config.train_corpus.empty() || config.dev_corpus.empty()) {
        throw ConfigError("train: config needs train_corpus and dev_corpus paths");
    }

    EmbeddingTable table = load_vectors(config.embeddings);
    Corpus train_corpus = load_corpus(config.train_corpus);
    Corpus dev_corpus = load_corpus(config.dev_corpus);
    drop_untokenizable(train_corpus, &std::cerr);
    drop_untokenizable(dev_corpus, &std::cerr);

    std::cout << "setting " << setting_name(config) << ", seed " << config.seed << ", "
              << config.n_way << "-way " << config.k_shot << "-shot\n";
    TrainResult result = train_model(config, train_corpus, dev_corpus, table, &std::cout);
    if (!result.best_path.empty()) {
        std::cout << "checkpoints: " << result.best_path << " (best), " << result.last_path
                  << " (last)\n";
    }
    return 0;
}

int run_eval(const EvalArgs& args) {
    if (args.seeds.empty()) throw ConfigError("eval: --seeds must not be empty");
    Checkpoint ckpt = load_checkpoint(args.checkpoint_path);

    EmbeddingTable table;
    if (ckpt.trained_table) {
        table = *ckpt.trained_table;
    } else {
        const std::string path =
            !args.embeddings_path.empty() ? args.embeddings_path : ckpt.config.embeddings;
        if (path.empty()) {
            throw ConfigError("eval: checkpoint has no embeddings path; pass --embeddings");
        }
        table = load_vectors(path);
    }
    if (table.dim != ckpt.params.dim) {
        throw DimensionError("eval: embeddings are " + std::to_string(table.dim) +
                             "-dimensional, model expects " + std::to_string(ckpt.params.dim));
    }

    Corpus corpus = load_corpus(args.corpus_path);
    drop_untokenizable(corpus, &std::cerr);

    if (!args.out_dir.empty()) std::filesystem::create_directories(args.out_dir);
    const std::string setting = setting_name(ckpt.config);
    std::vector<double> f1s, aucs;
    for (std::uint64_t seed : args.seeds) {
        TrainConfig cfg = ckpt.config;
        cfg.seed = seed;
        EvalResult r =
            evaluate_model(ckpt.params, table, corpus, cfg, eval_stream_seed(seed), &std::cerr);
        f1s.push_back(r.macro_f1);
        aucs.push_back(r.auc);
        char line[120];
        std::snprintf(line, sizeof line, "seed %llu: macro_f1 %.4f auc %.4f (%d episodes)\n",
                      static_cast<unsigned long long>(seed), r.macro_f1, r.auc, r.episodes);
        std::cout << line;
        if (!args.out_dir.empty()) {
            write_run_record({setting, seed, r.macro_f1, r.auc},
                             args.out_dir + "/run_" + setting + "_seed" +
                                 std::to_string(seed) + ".json");
        }
    }
    RunSummary f1 = aggregate_runs(f1s);
    RunSummary auc_summary = aggregate_runs(aucs);
    char line[160];
    std::snprintf(line, sizeof line,
                  "%s over %zu seeds: macro_f1 %.4f ± %.4f, auc %.4f ± %.4f\n",
                  setting.c_str(), args.seeds.size(), f1.mean, f1.stddev, auc_summary.mean,
                  auc_summary.stddev);
    std::cout << line;
    return 0;
}

int run_gen_synth(const SynthArgs& args) {
    Rng rng(args.seed);
    SynthResult synth =
        make_synthetic_corpus(args.classes, args.instances, args.keyword_strength,
                              args.noise_vocab, parse_groups(args.groups), rng, args.knobs);
    std::filesystem::create_directories(args.out_dir);
    save_vectors(args.out_dir + "/embeddings.txt", synth.table);

    const std::vector<int> splits = parse_splits(args.splits, args.classes);
    if (splits.empty()) {
        save_corpus(synth.corpus, args.out_dir + "/corpus.jsonl");
        std::cout << "wrote " << args.out_dir << "/corpus.jsonl ("
                  << synth.corpus.instances.size() << " instances, " << args.classes
                  << " classes)\n";
    } else {
        const char* names[3] = {"train", "dev", "test"};
        int start = 0;
        for (int part = 0; part < 3; ++part) {
            std::vector<std::string> keep(synth.class_names.begin() + start,
                                          synth.class_names.begin() + start + splits[part]);
            start += splits[part];
            int dropped = 0;
            Corpus cut = filter_corpus(synth.corpus, keep, &dropped);
            const std::string path =
                args.out_dir + "/" + names[part] + ".jsonl";
            save_corpus(cut, path);
            std::cout << "wrote " << path << " (" << cut.instances.size() << " instances, "
                      << splits[part] << " classes, " << dropped
                      << " cross-split instances dropped)\n";
        }
    }

    nlohmann::json meta;
    meta["classes"] = synth.class_names;
    meta["keywords"] = synth.class_keywords;
    meta["seed"] = args.seed;
    meta["keyword_strength"] = args.keyword_strength;
    meta["noise_vocab"] = args.noise_vocab;
    meta["groups"] = args.groups;
    meta["dim"] = args.knobs.dim;
    meta["group_cosine"] = args.knobs.group_cosine;
    std::ofstream meta_out(args.out_dir + "/meta.json");
    meta_out << meta.dump(1, '\t') << "\n";
    std::cout << "wrote " << args.out_dir << "/embeddings.txt and meta.json\n";
    return 0;
}

int run_report(const ReportArgs& args) {
    std::vector<RunRecord> runs = load_runs(args.runs_dir);
    if (runs.empty()) throw ParseError("report: no run records in " + args.runs_dir);
    auto summaries = summarize_runs(runs);
    auto sig = significance(runs);
    std::cout << format_report_text(summaries, sig);
    if (!args.json_path.empty()) {
        std::ofstream out(args.json_path);
        if (!out) throw ParseError("report: cannot write " + args.json_path);
        out << format_report_json(summaries, sig);
        std::cout << "wrote " << args.json_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Few-shot aspect category detection: episodic training, evaluation, "
                 "synthetic corpora, and run reports"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "Train a model from a config file");
    train->add_option("--config", train_args.config_path, "flat key = value config file")
        ->required();
    train->add_option("--seed", train_args.seed, "override the config's seed");
    train->add_option("--ablation", train_args.ablation,
                      "objective setting: base, las, lcl, scl, or ldf");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint over seeds");
    eval->add_option("--checkpoint", eval_args.checkpoint_path, "checkpoint JSON")->required();
    eval->add_option("--corpus", eval_args.corpus_path, "JSON Lines corpus")->required();
    eval->add_option("--seeds", eval_args.seeds, "run seeds (default 5 10 15 20 25)")
        ->delimiter(',');
    eval->add_option("--embeddings", eval_args.embeddings_path,
                     "embeddings file (defaults to the checkpoint's path)");
    eval->add_option("--out-dir", eval_args.out_dir, "write per-seed run records here");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("gen-synth", "Generate a synthetic corpus");
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--classes", synth_args.classes, "number of classes");
    synth->add_option("--instances", synth_args.instances, "instances per class");
    synth->add_option("--keyword-strength", synth_args.keyword_strength,
                      "how tightly keywords align with their label, in [0,1]");
    synth->add_option("--noise-vocab", synth_args.noise_vocab, "shared noise vocabulary size");
    synth->add_option("--groups", synth_args.groups,
                      "similarity groups as class ids, e.g. \"0,1;2,3\"");
    synth->add_option("--splits", synth_args.splits,
                      "train,dev,test class counts, e.g. \"5,5,5\"");
    synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->add_option("--dim", synth_args.knobs.dim, "embedding width");
    synth->add_option("--keywords-per-class", synth_args.knobs.keywords_per_class);
    synth->add_option("--tokens-per-sentence", synth_args.knobs.tokens_per_sentence);
    synth->add_option("--noise-fraction", synth_args.knobs.noise_fraction,
                      "share of sentence tokens drawn from the noise vocabulary");
    synth->add_option("--multi-label-fraction", synth_args.knobs.multi_label_fraction);
    synth->add_option("--group-cosine", synth_args.knobs.group_cosine,
                      "label cosine within a similarity group");

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "Summarize run records");
    report->add_option("--runs", report_args.runs_dir, "directory of run JSON files")
        ->required();
    report->add_option("--json", report_args.json_path, "also write the report as JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (train->parsed()) return run_train(train_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (synth->parsed()) return run_gen_synth(synth_args);
        if (report->parsed()) return run_report(report_args);
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SamplingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
