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

#include "sgcnn/checkpoint.hpp"

#include "json_convert.hpp"
#include "sgcnn/graph_io.hpp"

#include <cmath>

namespace sgcnn {

namespace {

using detail::json;

constexpr const char* kFormat = "sgcnn-checkpoint";

json matrix_values(const Matrix& m, const std::string& name) {
    for (double x : m.values()) {
        if (!std::isfinite(x)) throw NumericError("cannot checkpoint non-finite value in " + name);
    }
    return m.values();
}

Matrix read_values(const json& values, const Matrix& like, const std::string& name) {
    if (!values.is_array() || values.size() != like.size()) {
        throw MismatchError("checkpoint tensor " + name + " has " +
                            std::to_string(values.is_array() ? values.size() : 0) + " values, expected " +
                            std::to_string(like.size()));
    }
    Matrix out(like.rows(), like.cols());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].is_number()) throw IoError("checkpoint tensor " + name + " holds a non-number");
        out[i] = values[i].get<double>();
    }
    return out;
}

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw IoError(std::string("checkpoint: missing '") + key + "'");
    return *it;
}

}  // namespace

std::string checkpoint_to_json_text(const Model& model, const EmbedderConfig& embedding,
                                    const std::string& embedding_table, const Optimizer* optimizer) {
    json model_doc = detail::to_json(model.config());
    model_doc["seed"] = model.config().seed;
    json tensors = json::array();
    for (const auto& p : model.params()) {
        tensors.push_back({{"name", p.name}, {"shape", p.shape}, {"values", matrix_values(p.value, p.name)}});
    }
    json doc = {{"format", kFormat},
                {"version", kCheckpointVersion},
                {"feature_dim", model.feature_dim()},
                {"model", model_doc},
                {"embedding", detail::to_json(embedding, embedding_table)},
                {"tensors", tensors}};
    if (optimizer) {
        json state = detail::to_json(optimizer->config());
        state["steps"] = optimizer->steps();
        json m = json::array();
        json v = json::array();
        for (std::size_t i = 0; i < model.params().size(); ++i) {
            const auto& name = model.params().at(i).name;
            m.push_back(matrix_values(optimizer->first_moment()[i], name));
            v.push_back(matrix_values(optimizer->second_moment()[i], name));
        }
        state["m"] = std::move(m);
        state["v"] = std::move(v);
        doc["optimizer"] = std::move(state);
    }
    return doc.dump() + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("checkpoint: malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != kFormat) throw IoError("checkpoint: not a checkpoint document");
    const json& version = require(doc, "version");
    if (!version.is_number_integer() || version.get<int>() != kCheckpointVersion) {
        throw IoError("checkpoint: unsupported version " + version.dump());
    }
    const json& fdim = require(doc, "feature_dim");
    if (!fdim.is_number_unsigned()) throw IoError("checkpoint: feature_dim must be a non-negative integer");

    ModelConfig cfg = model_config_from_json(require(doc, "model").dump());
    EmbedderConfig embedding;
    std::string table;
    detail::from_json(require(doc, "embedding"), "embedding", embedding, table);
    if (embedding.dimension != fdim.get<std::size_t>()) {
        throw MismatchError("checkpoint: embedding dimension " + std::to_string(embedding.dimension) +
                            " differs from model feature_dim " + fdim.dump());
    }

    Checkpoint out{Model(std::move(cfg), fdim.get<std::size_t>()), embedding, table, std::nullopt};
    auto& store = out.model.params();
    const json& tensors = require(doc, "tensors");
    if (!tensors.is_array() || tensors.size() != store.size()) {
        throw MismatchError("checkpoint: expected " + std::to_string(store.size()) + " tensors for this architecture");
    }
    for (const auto& t : tensors) {
        if (!t.is_object() || !t.contains("name") || !t["name"].is_string()) {
            throw IoError("checkpoint: tensor entry without a name");
        }
        const auto name = t["name"].get<std::string>();
        const auto index = store.find(name);
        if (!index) throw MismatchError("checkpoint: unknown tensor " + name);
        auto& param = store.at(*index);
        if (!t.contains("shape") || t["shape"] != json(param.shape)) {
            throw MismatchError("checkpoint: tensor " + name + " has shape " + t.value("shape", json()).dump() +
                                ", architecture expects " + json(param.shape).dump());
        }
        param.value = read_values(require(t, "values"), param.value, name);
    }

    if (auto it = doc.find("optimizer"); it != doc.end()) {
        json state = *it;
        const json steps = require(state, "steps");
        const json m = require(state, "m");
        const json v = require(state, "v");
        for (const char* key : {"steps", "m", "v"}) state.erase(key);
        OptimizerConfig ocfg;
        detail::from_json(state, "optimizer", ocfg);
        if (!steps.is_number_unsigned()) throw IoError("checkpoint: optimizer steps must be a non-negative integer");
        if (!m.is_array() || !v.is_array() || m.size() != store.size() || v.size() != store.size()) {
            throw MismatchError("checkpoint: optimizer moments do not match the parameter count");
        }
        GradientSet gm;
        GradientSet gv;
        for (std::size_t i = 0; i < store.size(); ++i) {
            gm.push_back(read_values(m[i], store.at(i).value, store.at(i).name + " (first moment)"));
            gv.push_back(read_values(v[i], store.at(i).value, store.at(i).name + " (second moment)"));
        }
        Optimizer opt(ocfg, store);
        opt.restore(steps.get<std::uint64_t>(), std::move(gm), std::move(gv));
        out.optimizer.emplace(std::move(opt));
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const EmbedderConfig& embedding,
                     const std::string& embedding_table, const Optimizer* optimizer) {
    write_text_file(path, checkpoint_to_json_text(model, embedding, embedding_table, optimizer));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return checkpoint_from_json(read_text_file(path)); }

}  // namespace sgcnn
