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
#include <vector>

namespace sgcnn {

// Neighbor-node aggregation. For each configured path length d, paths of d
// nodes leaving the target subgraph are pooled into a neighbor matrix N
// (s rows, d columns, each entry a feature vector). A scalar-per-position
// kernel w (length d) collapses each row to one F-vector, rows are pooled,
// the bias is added and the activation applied:
//     x_d = act(pool_r(sum_t w[t] * N[r][t]) + b)
// The per-depth outputs are pooled again into x_n, which is appended to every
// target node's own features.

struct AggregationConfig {
    std::vector<std::size_t> depths{1};
    std::vector<std::size_t> samples{32};  // one entry per depth
    Pool path_pool = Pool::Mean;
    Pool depth_pool = Pool::Mean;
    Activation activation{ActivationKind::Relu};
    std::uint64_t seed = 0;
};

void validate(const AggregationConfig& cfg);

struct NeighborPathMatrix {
    std::size_t depth = 0;
    std::size_t feature_dim = 0;
    /// Sampled paths, one per row; path[0] is the anchor. Empty when the
    /// pooled path set was empty, in which case `values` is all zero.
    std::vector<Path> rows;
    /// (s * depth) x F; row r * depth + t holds the features of rows[r][t].
    Matrix values;

    std::size_t sample_count() const { return values.rows() / (depth == 0 ? 1 : depth); }
};

/// Pools the paths of every anchor (in target order), then keeps s of them:
/// a seeded uniform sample without replacement when more than s exist,
/// otherwise the whole set cycled in order up to s rows.
NeighborPathMatrix build_neighbor_matrix(const TargetSubgraph& sub, std::size_t depth,
                                         std::size_t samples, std::uint64_t seed);

struct DepthParams {
    std::vector<double> w;  // length = depth
    std::vector<double> b;  // length = F
};

/// Everything structural the aggregation needs for one sample.
struct AggregationPlan {
    Matrix node_features;  // n x F, target order
    std::vector<NeighborPathMatrix> neighbors;  // one per configured depth
};

AggregationPlan plan_aggregation(const TargetSubgraph& sub, const AggregationConfig& cfg);

/// Seed used for the depth-`depth` path sample.
std::uint64_t depth_seed(const AggregationConfig& cfg, std::size_t depth);

struct DepthVars {
    Var w;  // 1 x depth
    Var b;  // 1 x F
};

/// sum_t w[t] * N[r][t] for every row r: 1 x d kernel, (s*d) x F -> s x F.
Var weighted_path_sum(Var w, const NeighborPathMatrix& n);

Var aggregate_depth(const NeighborPathMatrix& n, DepthVars params, Pool pool, Activation act);

/// x_n (1 x F).
Var neighbor_feature(const AggregationPlan& plan, std::span<const DepthVars> params,
                     const AggregationConfig& cfg);

/// [node features | x_n broadcast]: n x 2F.
Var augment(Tape& tape, const AggregationPlan& plan, Var neighbor);

// Tape-free conveniences over the same code path.
std::vector<double> aggregate_depth(const NeighborPathMatrix& n, const DepthParams& params, Pool pool,
                                    Activation act);
std::vector<std::vector<double>> aggregate(const TargetSubgraph& sub, const AggregationConfig& cfg,
                                           std::span<const DepthParams> params);

}  // namespace sgcnn
