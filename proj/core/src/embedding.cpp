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

#include "sgcnn/embedding.hpp"

#include "sgcnn/errors.hpp"
#include "sgcnn/graph_io.hpp"
#include "sgcnn/random.hpp"

#include <json.hpp>

#include <cctype>
#include <cmath>

namespace sgcnn {

PretrainedTable pretrained_table_from_json(std::string_view text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        PretrainedTable table;
        table.dimension = doc.at("dimension").get<std::size_t>();
        for (const auto& [key, vec] : doc.at("vectors").items()) {
            auto values = vec.get<std::vector<double>>();
            if (values.size() != table.dimension) {
                throw ConfigError("pretrained table: vector for '" + key + "' has " +
                                  std::to_string(values.size()) + " entries, expected " +
                                  std::to_string(table.dimension));
            }
            table.vectors.emplace(key, std::move(values));
        }
        return table;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed pretrained table: ") + e.what());
    }
}

PretrainedTable read_pretrained_table(const std::filesystem::path& path) {
    return pretrained_table_from_json(read_text_file(path));
}

void validate(const EmbedderConfig& cfg) {
    if (cfg.dimension == 0) throw ConfigError("embedding: dimension must be >= 1");
    if (cfg.mode == EmbedMode::PretrainedTable) {
        if (!cfg.table) throw ConfigError("embedding: pretrained-table mode needs a table");
        if (cfg.table->dimension != cfg.dimension) {
            throw ConfigError("embedding: table dimension " + std::to_string(cfg.table->dimension) +
                              " does not match configured dimension " +
                              std::to_string(cfg.dimension));
        }
    }
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) && c < 128) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

TokenBucket token_bucket(std::string_view token, std::size_t dimension) {
    const std::uint64_t h = fnv1a64(token);
    return {static_cast<std::size_t>(h % dimension), (h >> 63) != 0 ? -1.0 : 1.0};
}

namespace {

void normalize(std::vector<double>& v, Normalization mode) {
    if (mode != Normalization::UnitL2) return;
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq == 0.0) return;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
}

std::vector<double> token_sum(const std::map<std::string, std::string>& attrs, const EmbedderConfig& cfg) {
    std::vector<double> v(cfg.dimension, 0.0);
    for (const auto& [key, value] : attrs) {
        for (const auto& token : tokenize(value)) {
            if (cfg.mode == EmbedMode::HashedBagOfWords) {
                const auto tb = token_bucket(token, cfg.dimension);
                v[tb.bucket] += tb.sign;
            } else if (auto it = cfg.table->vectors.find(token); it != cfg.table->vectors.end()) {
                for (std::size_t f = 0; f < cfg.dimension; ++f) v[f] += it->second[f];
            }
        }
    }
    return v;
}

}  // namespace

std::vector<double> embed_node(const std::map<std::string, std::string>& attrs,
                               const EmbedderConfig& cfg) {
    validate(cfg);
    auto v = token_sum(attrs, cfg);
    normalize(v, cfg.normalization);
    return v;
}

AttributedGraph embed_graph(const AttributedGraph& graph, const EmbedderConfig& cfg) {
    validate(cfg);
    AttributedGraph out = graph;
    for (std::size_t i = 0; i < out.node_count(); ++i) {
        auto& node = out.node(i);
        std::vector<double> v;
        if (cfg.mode == EmbedMode::PretrainedTable) {
            if (auto it = cfg.table->vectors.find(node.id); it != cfg.table->vectors.end()) {
                v = it->second;
            }
        }
        if (v.empty()) v = token_sum(node.attributes, cfg);
        normalize(v, cfg.normalization);
        node.features = std::move(v);
    }
    return out;
}

}  // namespace sgcnn
