// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#include "cli.hpp"

#include "sgcnn/checkpoint.hpp"
#include "sgcnn/config.hpp"
#include "sgcnn/errors.hpp"
#include "sgcnn/graph_io.hpp"
#include "sgcnn/random.hpp"
#include "sgcnn/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace sgcnn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  internal error\n"
    "  2  usage error (unknown flag, missing or malformed argument)\n"
    "  3  missing or unreadable input file, unwritable output\n"
    "  4  configuration validation failure\n"
    "  5  configuration mismatch (checkpoint vs. config or dataset)\n"
    "  6  numeric failure (non-finite loss or parameters)\n"
    "Errors are printed to stderr as one JSON line:\n"
    "  {\"error\":\"<kind>\",\"exit_code\":N,\"message\":\"...\"}\n";

struct Options {
    std::string config;
    std::string dataset;
    std::string out;
    std::string checkpoint;
    std::string split_file;
    std::string part = "all";

    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch;
    std::optional<double> lr;
    std::optional<std::size_t> layers;
    std::optional<std::size_t> threads;
    std::optional<double> split_ratio;

    std::vector<std::size_t> k;
    std::vector<std::size_t> s;
    std::vector<std::size_t> pre_dropout;
    std::vector<std::string> activation;
    std::vector<std::string> pooling;

    std::optional<std::size_t> classes;
    std::optional<std::size_t> samples_per_class;
    std::optional<std::size_t> subgraph_size;
    std::optional<double> noise;

    std::size_t neighbors = 5;
    bool no_timing = false;
    bool quiet = false;
};

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <typename T, typename Apply>
void apply_per_layer(const std::vector<T>& values, ModelConfig& model, const char* flag, Apply apply) {
    if (values.size() > model.layers.size()) {
        throw UsageError(std::string("--") + flag + " lists " + std::to_string(values.size()) +
                         " values but the model has " + std::to_string(model.layers.size()) + " layers");
    }
    for (std::size_t i = 0; i < values.size(); ++i) apply(model.layers[i], values[i]);
}

fs::path config_dir(const Options& opt) {
    return opt.config.empty() ? fs::path{} : fs::path(opt.config).parent_path();
}

/// Config file, then --layers, then per-layer lists, then scalar overrides.
ExperimentConfig effective_config(const Options& opt) {
    ExperimentConfig cfg = opt.config.empty() ? default_experiment() : read_experiment_file(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.classes) {
        cfg.synth.num_classes = *opt.classes;
        cfg.model.classifier.num_classes = *opt.classes;
    }
    if (opt.samples_per_class) cfg.synth.samples_per_class = *opt.samples_per_class;
    if (opt.subgraph_size) cfg.synth.subgraph_size = *opt.subgraph_size;
    if (opt.noise) cfg.synth.noise_rate = *opt.noise;
    if (opt.layers) cfg.model.layers = default_model_config(*opt.layers, cfg.model.classifier.num_classes).layers;
    apply_per_layer(opt.k, cfg.model, "k", [](LayerConfig& l, std::size_t v) { l.k = v; });
    apply_per_layer(opt.s, cfg.model, "s", [](LayerConfig& l, std::size_t v) { l.s = v; });
    apply_per_layer(opt.pre_dropout, cfg.model, "pre-dropout",
                    [](LayerConfig& l, std::size_t v) { l.pre_dropout = v; });
    apply_per_layer(opt.activation, cfg.model, "activation",
                    [](LayerConfig& l, const std::string& v) { l.activation = parse_activation(v); });
    apply_per_layer(opt.pooling, cfg.model, "pooling",
                    [](LayerConfig& l, const std::string& v) { l.pooling = parse_pooling_mode(v); });
    if (opt.epochs) cfg.train.epochs = *opt.epochs;
    if (opt.batch) cfg.train.batch_size = *opt.batch;
    if (opt.lr) cfg.train.optimizer.learning_rate = *opt.lr;
    if (opt.threads) cfg.train.threads = *opt.threads;
    if (opt.split_ratio) cfg.split_ratio = *opt.split_ratio;
    validate(cfg);
    return cfg;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
    std::string text;
    for (const auto& row : rows) text += row.dump() + "\n";
    write_text_file(path, text);
}

void require_labels(const Dataset& dataset, std::size_t classes, bool mismatch) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto label = dataset[i].label();
        if (!label) throw ConfigError("sample " + std::to_string(i) + " has no label");
        if (*label < 0 || static_cast<std::size_t>(*label) >= classes) {
            const std::string msg = "sample " + std::to_string(i) + " has label " + std::to_string(*label) +
                                    " but the model has " + std::to_string(classes) + " classes";
            if (mismatch) throw MismatchError(msg);
            throw ConfigError(msg);
        }
    }
}

SplitIndices read_split_file(const fs::path& path, std::size_t dataset_size) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw IoError("split file '" + path.string() + "': " + e.what());
    }
    SplitIndices out;
    for (auto [key, target] : {std::pair{"train", &out.train}, std::pair{"test", &out.test}}) {
        if (!doc.contains(key) || !doc[key].is_array()) {
            throw IoError("split file '" + path.string() + "' lacks a '" + key + "' index array");
        }
        for (const auto& v : doc[key]) {
            if (!v.is_number_unsigned() || v.get<std::size_t>() >= dataset_size) {
                throw MismatchError("split file index " + v.dump() + " does not fit a dataset of " +
                                    std::to_string(dataset_size) + " samples");
            }
            target->push_back(v.get<std::size_t>());
        }
    }
    return out;
}

std::vector<std::size_t> selected_indices(const Options& opt, std::size_t dataset_size) {
    std::vector<std::size_t> all(dataset_size);
    for (std::size_t i = 0; i < dataset_size; ++i) all[i] = i;
    if (opt.split_file.empty()) {
        if (opt.part != "all") throw UsageError("--part requires --split-file");
        return all;
    }
    auto split = read_split_file(opt.split_file, dataset_size);
    if (opt.part == "train") return split.train;
    if (opt.part == "test") return split.test;
    if (opt.part == "all") return all;
    throw UsageError("--part must be one of train, test, all");
}

int cmd_gen_data(const Options& opt, std::ostream& out) {
    const ExperimentConfig cfg = effective_config(opt);
    const SynthConfig synth = synth_config_for(cfg);
    const Dataset dataset = generate(synth);
    const fs::path dir = opt.out;
    ensure_dir(dir);
    write_dataset(dir / "dataset.jsonl", dataset);
    write_text_file(dir / "config.json", to_json_text(cfg));

    json classes = json::array();
    for (std::size_t c = 0; c < synth.num_classes; ++c) {
        classes.push_back({{"label", c},
                           {"motif", to_string(motif_for_class(c))},
                           {"samples", synth.samples_per_class}});
    }
    const json manifest = {{"dataset", "dataset.jsonl"},
                           {"samples", dataset.size()},
                           {"seed", cfg.seed},
                           {"synth_seed", synth.seed},
                           {"seed_derivation", "synth_seed = derive_seed(seed, \"synth\")"},
                           {"classes", classes},
                           {"config", json::parse(to_json_text(cfg))}};
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
    if (!opt.quiet) out << "wrote " << dataset.size() << " samples to " << (dir / "dataset.jsonl").string() << "\n";
    return kOk;
}

int cmd_train(const Options& opt, std::ostream& out) {
    const ExperimentConfig cfg = effective_config(opt);
    const Dataset raw = read_dataset(opt.dataset);
    if (raw.empty()) throw ConfigError("dataset '" + opt.dataset + "' is empty");
    const ModelConfig model_cfg = model_config_for(cfg);
    require_labels(raw, model_cfg.classifier.num_classes, false);

    const EmbedderConfig embedder = embedder_config_for(cfg, config_dir(opt));
    const Dataset dataset = embed_dataset(raw, embedder);
    const SplitIndices parts =
        opt.split_file.empty() ? split(dataset, cfg.split_ratio, split_seed_for(cfg)) : read_split_file(opt.split_file, dataset.size());
    const Dataset train_set = subset(dataset, parts.train);
    const Dataset test_set = subset(dataset, parts.test);
    for (const auto& sample : dataset) validate_for_input(model_cfg, sample.size());

    const fs::path dir = opt.out;
    ensure_dir(dir);
    ExperimentConfig logged = cfg;
    if (!cfg.embedding_table.empty()) logged.embedding_table = fs::absolute(config_dir(opt) / cfg.embedding_table).string();
    write_text_file(dir / "config.json", to_json_text(logged));
    write_text_file(dir / "split.json", json({{"train", parts.train}, {"test", parts.test}}).dump() + "\n");

    std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
    if (!metrics) throw IoError("cannot open '" + (dir / "metrics.csv").string() + "' for writing");
    metrics << "epoch,train_loss,test_accuracy,seconds\n";

    Model model(model_cfg, embedder.dimension);
    const TrainConfig train_cfg = train_config_for(cfg);
    if (!opt.quiet) {
        out << "training on " << train_set.size() << " samples, testing on " << test_set.size() << " ("
            << model.params().scalar_count() << " parameters)\n";
    }
    auto result = train(model, train_set, test_set, train_cfg, [&](const EpochMetrics& m) {
        metrics << m.epoch << ',' << format_double(m.train_loss) << ',' << format_double(m.test_accuracy) << ','
                << format_double(opt.no_timing ? 0.0 : m.seconds) << '\n';
        metrics.flush();
        if (!opt.quiet) {
            char line[160];
            std::snprintf(line, sizeof line, "epoch %zu/%zu loss=%.6f train_acc=%.4f test_acc=%.4f (%.1fs)\n",
                          m.epoch, train_cfg.epochs, m.train_loss, m.train_accuracy, m.test_accuracy, m.seconds);
            out << line << std::flush;
        }
    });
    if (!metrics) throw IoError("write to '" + (dir / "metrics.csv").string() + "' failed");
    save_checkpoint(dir / "checkpoint.json", model, embedder, logged.embedding_table, &result.optimizer);
    if (!opt.quiet && !result.history.empty()) {
        out << "final test accuracy " << format_double(result.history.back().test_accuracy) << "\n";
    }
    return kOk;
}

struct Loaded {
    Checkpoint ck;
    Dataset dataset;                   // embedded, selected samples only
    std::vector<std::size_t> indices;  // dataset-file index of each selected sample
    ExperimentConfig effective;
};

Loaded load_for_inference(const Options& opt) {
    Checkpoint ck = load_checkpoint(opt.checkpoint);
    const ModelConfig& model_cfg = ck.model.config();
    if (!opt.config.empty()) {
        const ExperimentConfig cfg = read_experiment_file(opt.config);
        if (cfg.model.classifier.num_classes != model_cfg.classifier.num_classes) {
            throw MismatchError("checkpoint was trained with num_classes=" +
                                std::to_string(model_cfg.classifier.num_classes) + " but the config asks for " +
                                std::to_string(cfg.model.classifier.num_classes));
        }
        ModelConfig expected = cfg.model;
        expected.seed = model_cfg.seed;
        if (model_config_to_json_text(expected) != model_config_to_json_text(model_cfg)) {
            throw MismatchError("checkpoint architecture differs from the model section of '" + opt.config + "'");
        }
    }
    EmbedderConfig embedder = ck.embedding;
    if (embedder.mode == EmbedMode::PretrainedTable) {
        embedder.table = std::make_shared<const PretrainedTable>(read_pretrained_table(ck.embedding_table));
    }
    const Dataset raw = read_dataset(opt.dataset);
    const auto indices = selected_indices(opt, raw.size());
    ExperimentConfig effective = default_experiment();
    effective.model = model_cfg;
    effective.embedding = ck.embedding;
    effective.embedding_table = ck.embedding_table;
    if (opt.threads) effective.train.threads = *opt.threads;
    Dataset dataset = embed_dataset(subset(raw, indices), embedder);
    return {std::move(ck), std::move(dataset), indices, std::move(effective)};
}

int cmd_eval(const Options& opt, std::ostream& out) {
    Loaded loaded = load_for_inference(opt);
    const std::size_t classes = loaded.ck.model.config().classifier.num_classes;
    require_labels(loaded.dataset, classes, true);
    const auto& origin = loaded.indices;
    const EvalResult result = evaluate(loaded.ck.model, loaded.dataset, loaded.effective.train.threads);

    const fs::path dir = opt.out;
    ensure_dir(dir);
    write_text_file(dir / "config.json", to_json_text(loaded.effective));
    std::ostringstream confusion;
    confusion << "true\\predicted";
    for (std::size_t c = 0; c < classes; ++c) confusion << ',' << c;
    confusion << '\n';
    for (std::size_t t = 0; t < classes; ++t) {
        confusion << t;
        for (std::size_t p = 0; p < classes; ++p) confusion << ',' << result.confusion[t][p];
        confusion << '\n';
    }
    write_text_file(dir / "confusion.csv", confusion.str());
    std::vector<json> rows;
    for (const auto& p : result.predictions) {
        rows.push_back({{"sample_index", origin[p.sample_index]},
                        {"label", p.label},
                        {"logits", p.logits},
                        {"predicted", p.predicted}});
    }
    write_jsonl(dir / "predictions.jsonl", rows);
    std::size_t correct = 0;
    for (std::size_t c = 0; c < classes; ++c) correct += result.confusion[c][c];
    out << "accuracy=" << format_double(result.accuracy) << " correct=" << correct
        << " total=" << loaded.dataset.size() << "\n";
    return kOk;
}

int cmd_embed(const Options& opt, std::ostream& out) {
    Loaded loaded = load_for_inference(opt);
    const auto& origin = loaded.indices;
    const EmbedResult result = embed(loaded.ck.model, loaded.dataset, opt.neighbors, loaded.effective.train.threads);

    const fs::path dir = opt.out;
    ensure_dir(dir);
    write_text_file(dir / "config.json", to_json_text(loaded.effective));
    std::vector<json> embeddings;
    std::vector<json> neighbors;
    for (std::size_t i = 0; i < result.embeddings.size(); ++i) {
        json row = {{"sample_index", origin[i]}, {"embedding", result.embeddings[i]}};
        if (auto label = loaded.dataset[i].label()) row["label"] = *label;
        embeddings.push_back(std::move(row));
        json list = json::array();
        for (const auto& n : result.neighbors[i]) {
            list.push_back({{"sample_index", origin[n.index]}, {"distance", n.distance}});
        }
        neighbors.push_back({{"sample_index", origin[i]}, {"neighbors", list}});
    }
    write_jsonl(dir / "embeddings.jsonl", embeddings);
    if (opt.neighbors > 0) write_jsonl(dir / "neighbors.jsonl", neighbors);
    if (!opt.quiet) out << "wrote " << embeddings.size() << " embeddings to " << (dir / "embeddings.jsonl").string() << "\n";
    return kOk;
}

void add_model_overrides(CLI::App* cmd, Options& opt) {
    cmd->add_option("--layers", opt.layers, "Use the default 3- or 4-layer architecture");
    cmd->add_option("--k", opt.k, "Candidate size per layer, comma separated from layer 0")->delimiter(',');
    cmd->add_option("--s", opt.s, "Kept candidates per layer, comma separated")->delimiter(',');
    cmd->add_option("--pre-dropout", opt.pre_dropout, "Pre-sampled candidates per layer (0 = all)")->delimiter(',');
    cmd->add_option("--activation", opt.activation,
                    "Activation per layer: identity, sigmoid, softplus, tanh, relu, leaky-relu(a)")
        ->delimiter(',');
    cmd->add_option("--pooling", opt.pooling, "Pooling per layer: degree or random")->delimiter(',');
}

int error_line(std::ostream& err, const char* kind, int code, const std::string& message) {
    err << json({{"error", kind}, {"exit_code", code}, {"message", message}}).dump() << "\n";
    return code;
}

}  // namespace

int run(std::span<const std::string> argv, std::ostream& out, std::ostream& err) {
    Options opt;
    CLI::App app{"Structural graph convolutional network: generate data, train, evaluate, embed."};
    app.name(argv.empty() ? "sgcnn" : fs::path(argv[0]).filename().string());
    app.footer(kExitCodes);
    app.require_subcommand(1);
    app.set_version_flag("--version", "sgcnn 0.1.0");

    auto* gen = app.add_subcommand("gen-data", "Generate the synthetic motif dataset");
    gen->add_option("--config", opt.config, "Experiment config JSON");
    gen->add_option("--out", opt.out, "Output directory")->required();
    gen->add_option("--seed", opt.seed, "Root seed");
    gen->add_option("--classes", opt.classes, "Number of classes (2-6)");
    gen->add_option("--samples-per-class", opt.samples_per_class, "Samples per class");
    gen->add_option("--subgraph-size", opt.subgraph_size, "Target nodes per sample");
    gen->add_option("--noise", opt.noise, "Probability of each extra edge between target nodes");
    gen->add_flag("--quiet", opt.quiet, "No progress output");

    auto* tr = app.add_subcommand("train", "Train a model; writes checkpoint, metrics and split");
    tr->add_option("--dataset", opt.dataset, "Dataset JSONL")->required();
    tr->add_option("--config", opt.config, "Experiment config JSON");
    tr->add_option("--out", opt.out, "Output directory")->required();
    tr->add_option("--seed", opt.seed, "Root seed");
    tr->add_option("--epochs", opt.epochs, "Training epochs");
    tr->add_option("--lr", opt.lr, "Learning rate");
    tr->add_option("--batch", opt.batch, "Mini-batch size");
    tr->add_option("--threads", opt.threads, "Worker threads (0 = all cores); results do not depend on it");
    tr->add_option("--split-ratio", opt.split_ratio, "Train fraction of the stratified split");
    tr->add_option("--split-file", opt.split_file, "Use the train/test indices of an earlier split.json");
    tr->add_option("--classes", opt.classes, "Number of classes");
    add_model_overrides(tr, opt);
    tr->add_flag("--no-timing", opt.no_timing, "Write 0 in the metrics seconds column (byte-reproducible output)");
    tr->add_flag("--quiet", opt.quiet, "No progress output");

    for (auto [name, help] : {std::pair{"eval", "Evaluate a checkpoint; writes confusion matrix and predictions"},
                              std::pair{"embed", "Export embeddings and nearest-neighbour lists"}}) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("--checkpoint", opt.checkpoint, "Checkpoint JSON written by train")->required();
        cmd->add_option("--dataset", opt.dataset, "Dataset JSONL")->required();
        cmd->add_option("--out", opt.out, "Output directory")->required();
        cmd->add_option("--config", opt.config, "Config to check the checkpoint against");
        cmd->add_option("--split-file", opt.split_file, "split.json selecting samples");
        cmd->add_option("--part", opt.part, "Split part to use: train, test or all");
        cmd->add_option("--threads", opt.threads, "Worker threads (0 = all cores)");
        cmd->add_flag("--quiet", opt.quiet, "No progress output");
        if (std::string_view(name) == "embed") {
            cmd->add_option("--neighbors", opt.neighbors, "Nearest neighbours per sample (0 = none)");
        }
    }

    std::vector<const char*> raw;
    for (const auto& a : argv) raw.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return error_line(err, "usage", kUsage, e.what());
    }

    try {
        if (gen->parsed()) return cmd_gen_data(opt, out);
        if (tr->parsed()) return cmd_train(opt, out);
        if (app.got_subcommand("eval")) return cmd_eval(opt, out);
        return cmd_embed(opt, out);
    } catch (const UsageError& e) {
        return error_line(err, "usage", kUsage, e.what());
    } catch (const IoError& e) {
        return error_line(err, "io", kIo, e.what());
    } catch (const ConfigError& e) {
        return error_line(err, "config", kConfig, e.what());
    } catch (const MismatchError& e) {
        return error_line(err, "mismatch", kMismatch, e.what());
    } catch (const NumericError& e) {
        return error_line(err, "numeric", kNumeric, e.what());
    } catch (const std::exception& e) {
        return error_line(err, "internal", kInternal, e.what());
    }
}

}  // namespace sgcnn::cli
