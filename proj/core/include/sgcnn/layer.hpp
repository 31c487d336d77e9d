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

#include "sgcnn/autodiff.hpp"
#include "sgcnn/graph.hpp"
#include "sgcnn/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgcnn {

// One structural graph convolution layer.
//
//   1. Attribute matrix: entry (i, j) is node j's feature vector when i == j
//      or i ~ j, and the zero vector otherwise.
//   2. Candidates: every k-subset of the n nodes (the k x k block left after
//      deleting n - k rows/columns), in lexicographic order.
//   3. Pooling: a seeded uniform pre-sample of at most pre_dropout candidates
//      is scored by total node degree plus the number of other surviving
//      candidates it touches through an edge; the s best are kept.
//   4. Each kept block is convolved with one k x k x F_in kernel per output
//      channel; the outputs become the s nodes of a new feature graph whose
//      edges join candidates that overlap or are linked by an edge.

using Candidate = std::vector<std::size_t>;

enum class PoolingMode { DegreeRanked, Random };

PoolingMode parse_pooling_mode(std::string_view text);
std::string to_string(PoolingMode mode);

struct LayerConfig {
    std::size_t k = 2;
    std::size_t s = 1;
    std::size_t pre_dropout = 0;  // 0: score every candidate
    PoolingMode pooling = PoolingMode::DegreeRanked;
    std::size_t out_dim = 16;
    Activation activation{ActivationKind::Relu};
    std::uint64_t seed = 0;
};

void validate(const LayerConfig& cfg);

/// C(n, k); throws ContractError when the value does not fit in 64 bits.
std::uint64_t binomial(std::size_t n, std::size_t k);

std::vector<Candidate> enumerate_candidates(std::size_t n, std::size_t k);

/// The rank-th candidate of enumerate_candidates(n, k) without building it.
Candidate unrank_candidate(std::size_t n, std::size_t k, std::uint64_t rank);

/// n x n blocks of F-vectors stored as (n * n) x F.
struct AttributeMatrix {
    std::size_t n = 0;
    std::size_t feature_dim = 0;
    Matrix entries;

    std::span<const double> at(std::size_t i, std::size_t j) const { return entries.row(i * n + j); }
};

AttributeMatrix attribute_matrix(const Matrix& features, const BinaryMatrix& adjacency);

/// Pooling score of each candidate: sum of node degrees plus the number of
/// other listed candidates it shares an edge with.
std::vector<std::uint64_t> candidate_scores(const BinaryMatrix& adjacency,
                                            std::span<const Candidate> candidates);

/// Degree-ranked pooling over an explicit candidate list. Ties keep list
/// order; fewer than s survivors are cycled up to s.
std::vector<Candidate> graph_pool(const BinaryMatrix& adjacency, std::span<const Candidate> candidates,
                                  std::size_t s, std::size_t pre_dropout, std::uint64_t seed);

/// Same selection as graph_pool(adjacency, enumerate_candidates(n, k), ...)
/// but never materializes the full candidate list. Random mode instead draws
/// s candidates uniformly from all C(n, k) and keeps them in rank order.
std::vector<Candidate> select_candidates(const BinaryMatrix& adjacency, std::size_t k, std::size_t s,
                                         std::size_t pre_dropout, PoolingMode mode, std::uint64_t seed);

/// Kernel layout: row ((i * k + j) * F_in + f), column = output channel.
struct LayerParams {
    std::size_t k = 0;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    Matrix kernel;
    std::vector<double> bias;
    Activation activation{ActivationKind::Relu};
};

std::vector<double> convolve_candidate(const AttributeMatrix& ar, std::span<const std::size_t> subset,
                                       const LayerParams& params);

BinaryMatrix new_adjacency(std::span<const Candidate> kept, const BinaryMatrix& adjacency);

struct FeatureGraph {
    Matrix node_features;  // s x F_out
    BinaryMatrix adjacency;
    std::vector<Candidate> provenance;
};

/// Structural part of a layer: kept candidates, their non-zero attribute
/// blocks and the outgoing adjacency. Depends on the graph and seed only.
struct LayerPlan {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<Candidate> kept;
    /// Per kept candidate: (block entry i * k + j, input node) for every
    /// unmasked entry of its k x k attribute block.
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> entries;
    BinaryMatrix out_adjacency;
};

LayerPlan plan_layer(const BinaryMatrix& adjacency, const LayerConfig& cfg,
                     std::string_view layer_name = "layer");

/// Pre-activation candidate convolution: X (n x F_in), kernel
/// (k*k*F_in x F_out) -> s x F_out.
Var candidate_conv(Var features, Var kernel, const LayerPlan& plan);

/// act(candidate_conv + bias).
Var layer_apply(Var features, Var kernel, Var bias, const LayerPlan& plan, Activation act);

FeatureGraph layer_forward(const Matrix& features, const BinaryMatrix& adjacency, const LayerConfig& cfg,
                           const LayerParams& params, std::string_view layer_name = "layer");

/// Per-thread work counters, reset explicitly.
struct LayerCounters {
    std::uint64_t convolutions = 0;      // candidate blocks convolved
    std::uint64_t scored_candidates = 0; // candidates that went through scoring
};

LayerCounters& layer_counters();
void reset_layer_counters();

}  // namespace sgcnn
