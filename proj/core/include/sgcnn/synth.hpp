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

#include "sgcnn/graph_io.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sgcnn {

// Synthetic stand-in for a schema-induced engineering dataset. Each class is
// one structural motif laid out over n target nodes; node types follow the
// same positional pattern in every class and the node text draws mostly from
// a shared vocabulary, so the class is carried by the edges.

enum class Motif { Star, ChainOfStars, RingWithPendants, BipartiteFan, Tree, CliqueWithTail };

inline constexpr std::size_t kMotifCount = 6;
inline constexpr std::size_t kMinMotifNodes = 6;

std::string to_string(Motif motif);

/// Motif used for class `label`.
Motif motif_for_class(std::size_t label);

/// Edges of the motif over local nodes 0..n-1 (node 0 is the root).
std::vector<std::pair<std::size_t, std::size_t>> motif_edges(Motif motif, std::size_t n);

struct SynthConfig {
    std::size_t num_classes = 6;
    std::size_t samples_per_class = 300;
    std::size_t subgraph_size = 17;
    /// Probability that each absent pair of target nodes gets a noise edge.
    double noise_rate = 0.01;
    /// Number of non-target context nodes per host graph, uniform in range.
    std::size_t context_min = 2;
    std::size_t context_max = 6;
    /// Probability that a node's descriptive word comes from its class's
    /// own word list instead of the shared one.
    double class_token_bias = 0.1;
    std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

/// Target type at position i of every sample.
std::string node_type_at(std::size_t position);

/// Samples are emitted class by class, samples_per_class each. In every host
/// graph the target occupies nodes 0..n-1 in breadth-first order from the
/// motif root (siblings shuffled), followed by the context nodes.
Dataset generate(const SynthConfig& cfg);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified split. Per class, floor(ratio * count) samples go to train and
/// the remaining round(ratio * N) - sum(floor) train slots go to the classes
/// with the largest fractional parts (lower label first). Every class keeps
/// at least one sample on each side. Indices come back ascending.
SplitIndices split(const Dataset& dataset, double ratio, std::uint64_t seed);

Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices);

}  // namespace sgcnn
