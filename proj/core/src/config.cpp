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

#include "sgcnn/config.hpp"

#include "json_convert.hpp"
#include "sgcnn/graph_io.hpp"
#include "sgcnn/random.hpp"

namespace sgcnn {

namespace detail {

ObjectReader::ObjectReader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(path_ + ": expected an object");
}

std::string ObjectReader::path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

const json* ObjectReader::child(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
}

void ObjectReader::read(const char* key, double& out) {
    if (const json* v = child(key)) {
        if (!v->is_number()) throw ConfigError(path(key) + ": expected a number");
        out = v->get<double>();
    }
}

void ObjectReader::read(const char* key, std::string& out) {
    if (const json* v = child(key)) {
        if (!v->is_string()) throw ConfigError(path(key) + ": expected a string");
        out = v->get<std::string>();
    }
}

void ObjectReader::read(const char* key, std::vector<std::size_t>& out) {
    if (const json* v = child(key)) {
        if (!v->is_array()) throw ConfigError(path(key) + ": expected an array of integers");
        out.clear();
        for (const auto& x : *v) {
            if (!x.is_number_unsigned()) throw ConfigError(path(key) + ": expected an array of integers");
            out.push_back(x.get<std::size_t>());
        }
    }
}

void ObjectReader::finish() const {
    for (const auto& [key, value] : doc_.items()) {
        if (!seen_.count(key)) throw ConfigError(path(key.c_str()) + ": unknown key");
    }
}

namespace {

template <typename Parse>
auto read_enum(ObjectReader& r, const char* key, Parse parse) -> std::optional<decltype(parse(""))> {
    std::string text;
    if (!r.child(key)) return std::nullopt;
    r.read(key, text);
    try {
        return parse(text);
    } catch (const ConfigError& e) {
        throw ConfigError(r.path(key) + ": " + e.what());
    }
}

EmbedMode parse_embed_mode(std::string_view text) {
    if (text == "hashed") return EmbedMode::HashedBagOfWords;
    if (text == "table") return EmbedMode::PretrainedTable;
    throw ConfigError("unknown embedding mode '" + std::string(text) + "' (expected hashed or table)");
}

Normalization parse_normalization(std::string_view text) {
    if (text == "none") return Normalization::None;
    if (text == "unit-l2") return Normalization::UnitL2;
    throw ConfigError("unknown normalization '" + std::string(text) + "' (expected none or unit-l2)");
}

}  // namespace

json to_json(const SynthConfig& cfg) {
    return {{"num_classes", cfg.num_classes},     {"samples_per_class", cfg.samples_per_class},
            {"subgraph_size", cfg.subgraph_size}, {"noise_rate", cfg.noise_rate},
            {"context_min", cfg.context_min},     {"context_max", cfg.context_max},
            {"class_token_bias", cfg.class_token_bias}};
}

void from_json(const json& doc, const std::string& path, SynthConfig& cfg) {
    ObjectReader r(doc, path);
    r.read("num_classes", cfg.num_classes);
    r.read("samples_per_class", cfg.samples_per_class);
    r.read("subgraph_size", cfg.subgraph_size);
    r.read("noise_rate", cfg.noise_rate);
    r.read("context_min", cfg.context_min);
    r.read("context_max", cfg.context_max);
    r.read("class_token_bias", cfg.class_token_bias);
    r.finish();
}

json to_json(const EmbedderConfig& cfg, const std::string& table_path) {
    json doc = {{"dimension", cfg.dimension},
                {"mode", cfg.mode == EmbedMode::HashedBagOfWords ? "hashed" : "table"},
                {"normalization", cfg.normalization == Normalization::None ? "none" : "unit-l2"}};
    if (!table_path.empty()) doc["table"] = table_path;
    return doc;
}

void from_json(const json& doc, const std::string& path, EmbedderConfig& cfg, std::string& table_path) {
    ObjectReader r(doc, path);
    r.read("dimension", cfg.dimension);
    if (auto m = read_enum(r, "mode", parse_embed_mode)) cfg.mode = *m;
    if (auto n = read_enum(r, "normalization", parse_normalization)) cfg.normalization = *n;
    r.read("table", table_path);
    r.finish();
}

json to_json(const AggregationConfig& cfg) {
    return {{"depths", cfg.depths},
            {"samples", cfg.samples},
            {"path_pool", to_string(cfg.path_pool)},
            {"depth_pool", to_string(cfg.depth_pool)},
            {"activation", to_string(cfg.activation)}};
}

void from_json(const json& doc, const std::string& path, AggregationConfig& cfg) {
    ObjectReader r(doc, path);
    r.read("depths", cfg.depths);
    r.read("samples", cfg.samples);
    if (auto p = read_enum(r, "path_pool", parse_pool)) cfg.path_pool = *p;
    if (auto p = read_enum(r, "depth_pool", parse_pool)) cfg.depth_pool = *p;
    if (auto a = read_enum(r, "activation", parse_activation)) cfg.activation = *a;
    r.finish();
}

json to_json(const LayerConfig& cfg) {
    return {{"k", cfg.k},
            {"s", cfg.s},
            {"pre_dropout", cfg.pre_dropout},
            {"pooling", to_string(cfg.pooling)},
            {"out_dim", cfg.out_dim},
            {"activation", to_string(cfg.activation)}};
}

void from_json(const json& doc, const std::string& path, LayerConfig& cfg) {
    ObjectReader r(doc, path);
    r.read("k", cfg.k);
    r.read("s", cfg.s);
    r.read("pre_dropout", cfg.pre_dropout);
    if (auto p = read_enum(r, "pooling", parse_pooling_mode)) cfg.pooling = *p;
    r.read("out_dim", cfg.out_dim);
    if (auto a = read_enum(r, "activation", parse_activation)) cfg.activation = *a;
    r.finish();
}

json to_json(const ModelConfig& cfg) {
    json layers = json::array();
    for (const auto& l : cfg.layers) layers.push_back(to_json(l));
    return {{"aggregation", to_json(cfg.aggregation)},
            {"layers", layers},
            {"classifier",
             {{"num_classes", cfg.classifier.num_classes}, {"readout", to_string(cfg.classifier.readout)}}}};
}

void from_json(const json& doc, const std::string& path, ModelConfig& cfg) {
    ObjectReader r(doc, path);
    if (const json* a = r.child("aggregation")) from_json(*a, r.path("aggregation"), cfg.aggregation);
    if (const json* layers = r.child("layers")) {
        if (!layers->is_array()) throw ConfigError(r.path("layers") + ": expected an array");
        // Explicit layer lists replace the default stack entirely.
        cfg.layers.assign(layers->size(), LayerConfig{});
        for (std::size_t i = 0; i < layers->size(); ++i) {
            from_json((*layers)[i], r.path("layers") + "[" + std::to_string(i) + "]", cfg.layers[i]);
        }
    }
    if (const json* c = r.child("classifier")) {
        ObjectReader cr(*c, r.path("classifier"));
        cr.read("num_classes", cfg.classifier.num_classes);
        if (auto ro = read_enum(cr, "readout", parse_readout)) cfg.classifier.readout = *ro;
        cr.finish();
    }
    r.finish();
}

json to_json(const OptimizerConfig& cfg) {
    return {{"kind", to_string(cfg.kind)},
            {"learning_rate", cfg.learning_rate},
            {"beta1", cfg.beta1},
            {"beta2", cfg.beta2},
            {"epsilon", cfg.epsilon}};
}

void from_json(const json& doc, const std::string& path, OptimizerConfig& cfg) {
    ObjectReader r(doc, path);
    if (auto k = read_enum(r, "kind", parse_optimizer)) cfg.kind = *k;
    r.read("learning_rate", cfg.learning_rate);
    r.read("beta1", cfg.beta1);
    r.read("beta2", cfg.beta2);
    r.read("epsilon", cfg.epsilon);
    r.finish();
}

json to_json(const TrainConfig& cfg) {
    return {{"optimizer", to_json(cfg.optimizer)},
            {"batch_size", cfg.batch_size},
            {"epochs", cfg.epochs},
            {"threads", cfg.threads}};
}

void from_json(const json& doc, const std::string& path, TrainConfig& cfg) {
    ObjectReader r(doc, path);
    if (const json* o = r.child("optimizer")) from_json(*o, r.path("optimizer"), cfg.optimizer);
    r.read("batch_size", cfg.batch_size);
    r.read("epochs", cfg.epochs);
    r.read("threads", cfg.threads);
    r.finish();
}

json parse_json(std::string_view text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": malformed JSON: " + e.what());
    }
}

}  // namespace detail

ExperimentConfig default_experiment(std::size_t layers) {
    ExperimentConfig cfg;
    cfg.model = default_model_config(layers, cfg.synth.num_classes);
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) {
        throw ConfigError("split_ratio must lie strictly between 0 and 1");
    }
    validate(cfg.synth);
    if (cfg.embedding.mode == EmbedMode::PretrainedTable && cfg.embedding_table.empty() && !cfg.embedding.table) {
        throw ConfigError("embedding.table is required in table mode");
    }
    if (cfg.embedding.dimension == 0) throw ConfigError("embedding.dimension must be >= 1");
    validate(cfg.model);
    validate(cfg.train);
}

SynthConfig synth_config_for(const ExperimentConfig& cfg) {
    SynthConfig out = cfg.synth;
    out.seed = derive_seed(cfg.seed, "synth");
    return out;
}

ModelConfig model_config_for(const ExperimentConfig& cfg) {
    ModelConfig out = cfg.model;
    out.seed = derive_seed(cfg.seed, "model");
    return out;
}

TrainConfig train_config_for(const ExperimentConfig& cfg) {
    TrainConfig out = cfg.train;
    out.seed = derive_seed(cfg.seed, "train");
    return out;
}

std::uint64_t split_seed_for(const ExperimentConfig& cfg) { return derive_seed(cfg.seed, "split"); }

EmbedderConfig embedder_config_for(const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
    EmbedderConfig out = cfg.embedding;
    if (out.mode == EmbedMode::PretrainedTable && !out.table) {
        std::filesystem::path p = cfg.embedding_table;
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        out.table = std::make_shared<const PretrainedTable>(read_pretrained_table(p));
    }
    validate(out);
    return out;
}

std::string to_json_text(const ExperimentConfig& cfg) {
    const detail::json doc = {{"seed", cfg.seed},
                              {"split_ratio", cfg.split_ratio},
                              {"synth", detail::to_json(cfg.synth)},
                              {"embedding", detail::to_json(cfg.embedding, cfg.embedding_table)},
                              {"model", detail::to_json(cfg.model)},
                              {"train", detail::to_json(cfg.train)}};
    return doc.dump(2) + "\n";
}

ExperimentConfig experiment_from_json(std::string_view text) {
    const auto doc = detail::parse_json(text, "config");
    detail::ObjectReader r(doc, "");
    ExperimentConfig cfg = default_experiment();
    r.read("seed", cfg.seed);
    r.read("split_ratio", cfg.split_ratio);
    if (const auto* s = r.child("synth")) detail::from_json(*s, "synth", cfg.synth);
    if (const auto* e = r.child("embedding")) detail::from_json(*e, "embedding", cfg.embedding, cfg.embedding_table);
    if (const auto* m = r.child("model")) detail::from_json(*m, "model", cfg.model);
    if (const auto* t = r.child("train")) detail::from_json(*t, "train", cfg.train);
    r.finish();
    validate(cfg);
    return cfg;
}

ExperimentConfig read_experiment_file(const std::filesystem::path& path) {
    return experiment_from_json(read_text_file(path));
}

std::string model_config_to_json_text(const ModelConfig& cfg) {
    auto doc = detail::to_json(cfg);
    doc["seed"] = cfg.seed;
    return doc.dump(2);
}

ModelConfig model_config_from_json(std::string_view text) {
    auto doc = detail::parse_json(text, "model config");
    ModelConfig cfg = default_model_config();
    if (doc.is_object() && doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw ConfigError("model.seed: expected a non-negative integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
        doc.erase("seed");
    }
    detail::from_json(doc, "model", cfg);
    validate(cfg);
    return cfg;
}

}  // namespace sgcnn
