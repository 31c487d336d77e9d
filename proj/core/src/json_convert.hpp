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

// JSON conversions shared by the config and checkpoint modules.
#pragma once

#include "sgcnn/config.hpp"
#include "sgcnn/errors.hpp"

#include <json.hpp>

#include <concepts>
#include <set>
#include <string>
#include <vector>

namespace sgcnn::detail {

using nlohmann::json;

/// Reads keys out of one JSON object, converting type mismatches into
/// ConfigError messages that carry the dotted key path.
class ObjectReader {
public:
    ObjectReader(const json& doc, std::string path);

    template <std::unsigned_integral T>
    void read(const char* key, T& out) {
        if (const json* v = child(key)) {
            if (!v->is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
            out = v->get<T>();
        }
    }
    void read(const char* key, double& out);
    void read(const char* key, std::string& out);
    void read(const char* key, std::vector<std::size_t>& out);

    const json* child(const char* key);
    std::string path(const char* key) const;

    /// Throws ConfigError naming the first key that was never read.
    void finish() const;

private:
    const json& doc_;
    std::string path_;
    std::set<std::string> seen_;
};

json to_json(const SynthConfig& cfg);
json to_json(const EmbedderConfig& cfg, const std::string& table_path);
json to_json(const AggregationConfig& cfg);
json to_json(const LayerConfig& cfg);
json to_json(const ModelConfig& cfg);
json to_json(const OptimizerConfig& cfg);
json to_json(const TrainConfig& cfg);

void from_json(const json& doc, const std::string& path, SynthConfig& cfg);
void from_json(const json& doc, const std::string& path, EmbedderConfig& cfg, std::string& table_path);
void from_json(const json& doc, const std::string& path, AggregationConfig& cfg);
void from_json(const json& doc, const std::string& path, LayerConfig& cfg);
void from_json(const json& doc, const std::string& path, ModelConfig& cfg);
void from_json(const json& doc, const std::string& path, OptimizerConfig& cfg);
void from_json(const json& doc, const std::string& path, TrainConfig& cfg);

json parse_json(std::string_view text, const std::string& what);

}  // namespace sgcnn::detail
