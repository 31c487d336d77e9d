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

#pragma once

#include "sgcnn/graph.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sgcnn {

// Node text -> fixed-width feature vector.
//
// Hashed bag-of-words (the default) is reproducible outside this library:
//   1. visit attribute values in ascending key order;
//   2. lowercase ASCII, split on every non-alphanumeric byte, drop empties;
//   3. h = FNV-1a 64 of the token bytes (offset 14695981039346656037,
//      prime 1099511628211);
//   4. add +1 to bucket h % F when bit 63 of h is clear, -1 otherwise.
// Token contributions are summed, so repeating a token scales its pattern.
// Attribute keys and the node type are not embedded.

enum class EmbedMode { HashedBagOfWords, PretrainedTable };
enum class Normalization { None, UnitL2 };

/// {"dimension":F, "vectors":{"token or node id":[F reals], ...}}
struct PretrainedTable {
    std::size_t dimension = 0;
    std::unordered_map<std::string, std::vector<double>> vectors;
};

PretrainedTable read_pretrained_table(const std::filesystem::path& path);
PretrainedTable pretrained_table_from_json(std::string_view text);

struct EmbedderConfig {
    std::size_t dimension = 16;
    EmbedMode mode = EmbedMode::HashedBagOfWords;
    Normalization normalization = Normalization::None;
    std::shared_ptr<const PretrainedTable> table;  // required for PretrainedTable mode
};

void validate(const EmbedderConfig& cfg);

std::vector<std::string> tokenize(std::string_view text);

/// Signed bucket of a token under the hashing scheme above.
struct TokenBucket {
    std::size_t bucket;
    double sign;
};
TokenBucket token_bucket(std::string_view token, std::size_t dimension);

std::vector<double> embed_node(const std::map<std::string, std::string>& attrs,
                               const EmbedderConfig& cfg);

/// Copy of `graph` with every node's features filled. In table mode a node
/// whose id appears in the table takes that vector directly.
AttributedGraph embed_graph(const AttributedGraph& graph, const EmbedderConfig& cfg);

}  // namespace sgcnn
