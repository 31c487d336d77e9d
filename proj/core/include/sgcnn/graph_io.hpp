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
#include <string>
#include <string_view>
#include <vector>

namespace sgcnn {

/// Current version of the graph JSON document.
inline constexpr int kGraphFormatVersion = 1;

/// Graph document:
///   {"version":1,
///    "nodes":[{"id":"...","type":"...","attrs":{"k":"v",...}}, ...],
///    "edges":[[i,j], ...]}
/// Node array order defines node indices. Features are not serialized.
std::string graph_to_json(const AttributedGraph& graph);
AttributedGraph graph_from_json(std::string_view text);

AttributedGraph read_graph_file(const std::filesystem::path& path);
void write_graph_file(const std::filesystem::path& path, const AttributedGraph& graph);

using Dataset = std::vector<TargetSubgraph>;

/// JSON-lines, one sample per line:
///   {"graph":{...} | "graph_file":"relative/or/absolute.json",
///    "target_nodes":[i, ...], "label":int}
/// target_nodes may hold node indices or node id strings. Samples that refer
/// to the same graph_file share one host graph.
Dataset read_dataset(const std::filesystem::path& path);

/// Writes every sample with its host graph inline.
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sgcnn
