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

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sgcnn {

/// Dense square 0/1 matrix, row-major.
class BinaryMatrix {
public:
    BinaryMatrix() = default;
    explicit BinaryMatrix(std::size_t n) : n_(n), bits_(n * n, 0) {}

    std::size_t size() const { return n_; }
    bool operator()(std::size_t i, std::size_t j) const { return bits_[i * n_ + j] != 0; }
    void set(std::size_t i, std::size_t j, bool v = true) { bits_[i * n_ + j] = v ? 1 : 0; }
    void set_symmetric(std::size_t i, std::size_t j, bool v = true) {
        set(i, j, v);
        set(j, i, v);
    }

    std::size_t row_sum(std::size_t i) const;
    bool is_symmetric() const;
    bool has_zero_diagonal() const;

    friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> bits_;
};

struct NodeRecord {
    std::string id;
    std::string type;
    std::map<std::string, std::string> attributes;
    std::vector<double> features;
};

/// Undirected, unweighted graph with attributed nodes. Node indices are the
/// insertion order and never change.
class AttributedGraph {
public:
    std::size_t add_node(NodeRecord node);

    /// Inserts the undirected edge {a, b}. Returns false when it already
    /// exists. Self-loops and out-of-range endpoints throw ContractError.
    bool add_edge(std::size_t a, std::size_t b);

    bool has_edge(std::size_t a, std::size_t b) const;

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edge_count_; }
    std::size_t degree(std::size_t v) const { return adjacency_[v].size(); }

    const NodeRecord& node(std::size_t i) const { return nodes_[i]; }
    NodeRecord& node(std::size_t i) { return nodes_[i]; }
    std::span<const NodeRecord> nodes() const { return nodes_; }

    /// Neighbours of v in ascending index order.
    std::span<const std::size_t> neighbors(std::size_t v) const { return adjacency_[v]; }

    /// Edges as (i, j) with i < j, sorted lexicographically.
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

    /// Shared feature dimension, 0 when no node carries features yet.
    std::size_t feature_dim() const;

private:
    std::vector<NodeRecord> nodes_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::size_t edge_count_ = 0;
};

/// An induced subgraph of a host graph. node_indices fixes the row order of
/// every matrix derived from the sample.
class TargetSubgraph {
public:
    TargetSubgraph(std::shared_ptr<const AttributedGraph> host, std::vector<std::size_t> node_indices,
                   std::optional<int> label = std::nullopt);

    const AttributedGraph& host() const { return *host_; }
    const std::shared_ptr<const AttributedGraph>& host_ptr() const { return host_; }
    std::span<const std::size_t> node_indices() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    std::optional<int> label() const { return label_; }
    void set_label(std::optional<int> label) { label_ = label; }

    bool contains(std::size_t host_index) const;

    /// Position of host_index inside node_indices.
    std::optional<std::size_t> local_index(std::size_t host_index) const;

    /// Same node list over a different host (e.g. the embedded copy).
    TargetSubgraph rehosted(std::shared_ptr<const AttributedGraph> host) const;

private:
    std::shared_ptr<const AttributedGraph> host_;
    std::vector<std::size_t> nodes_;
    std::optional<int> label_;
};

/// Expand from already-matched nodes of `from_type` to adjacent, unmatched
/// nodes of `to_type`, in ascending host index order.
struct ExpansionRule {
    std::string from_type;
    std::string to_type;
    std::size_t min_count = 0;
    std::size_t max_count = 1;
};

/// Root node type plus breadth-first expansion rules. A root whose expansion
/// falls short of some rule's min_count yields no subgraph; expansion stops
/// adding nodes once max_nodes is reached.
struct Schema {
    std::string root_type;
    std::vector<ExpansionRule> rules;
    std::size_t max_nodes = 1;
};

/// Throws ConfigError for malformed schemas. A rule's from_type must be the
/// root type or the to_type of an earlier rule.
void validate(const Schema& schema);

/// One subgraph per matching root, ordered by smallest contained node index
/// (then by root index).
std::vector<TargetSubgraph> induce_subgraphs(std::shared_ptr<const AttributedGraph> graph,
                                             const Schema& schema);

/// n x n adjacency restricted to sub.node_indices(), in that order.
BinaryMatrix adjacency_matrix(const TargetSubgraph& sub);

using Path = std::vector<std::size_t>;

/// All simple paths of exactly `nodes` vertices that start at `anchor` and
/// avoid every other target node. Depth-first, neighbours ascending.
std::vector<Path> enumerate_paths(const TargetSubgraph& sub, std::size_t anchor, std::size_t nodes);

}  // namespace sgcnn
