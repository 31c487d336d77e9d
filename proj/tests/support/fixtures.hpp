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

// Small builders shared by the test binaries.
#pragma once

#include "sgcnn/graph.hpp"
#include "sgcnn/random.hpp"
#include "sgcnn/tensor.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace fx {

using namespace sgcnn;

/// Erdos-Renyi graph with n nodes of type `type` and uniform(-1, 1)
/// features of dimension `dim` (no features when dim == 0).
std::shared_ptr<AttributedGraph> random_graph(std::size_t n, double p, std::size_t dim, Rng& rng,
                                              const std::string& type = "node");

BinaryMatrix random_adjacency(std::size_t n, double p, Rng& rng);

/// Copy of g where old node v becomes node perm[v].
std::shared_ptr<AttributedGraph> permuted(const AttributedGraph& g, const std::vector<std::size_t>& perm);

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// Target subgraph over host nodes 0..n-1.
TargetSubgraph first_nodes(std::shared_ptr<const AttributedGraph> host, std::size_t n,
                           std::optional<int> label = std::nullopt);

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0);

std::vector<std::vector<double>> rows_of(const Matrix& m);
std::vector<double> flat(const Matrix& m);

/// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor);

/// Central differences of `loss` with respect to every value in `params`.
std::vector<double> central_differences(const std::function<double()>& loss, const std::vector<double*>& params,
                                        double step);

}  // namespace fx
