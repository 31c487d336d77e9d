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

#include "sgcnn/graph.hpp"

#include "sgcnn/errors.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <unordered_set>

namespace sgcnn {

std::size_t BinaryMatrix::row_sum(std::size_t i) const {
    std::size_t total = 0;
    for (std::size_t j = 0; j < n_; ++j) total += bits_[i * n_ + j];
    return total;
}

bool BinaryMatrix::is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            if ((*this)(i, j) != (*this)(j, i)) return false;
        }
    }
    return true;
}

bool BinaryMatrix::has_zero_diagonal() const {
    for (std::size_t i = 0; i < n_; ++i) {
        if ((*this)(i, i)) return false;
    }
    return true;
}

std::size_t AttributedGraph::add_node(NodeRecord node) {
    nodes_.push_back(std::move(node));
    adjacency_.emplace_back();
    return nodes_.size() - 1;
}

bool AttributedGraph::add_edge(std::size_t a, std::size_t b) {
    if (a >= nodes_.size() || b >= nodes_.size()) {
        throw ContractError("add_edge: endpoint out of range (" + std::to_string(a) + ", " +
                            std::to_string(b) + ")");
    }
    if (a == b) {
        throw ContractError("add_edge: self-loop on node " + std::to_string(a));
    }
    auto& la = adjacency_[a];
    auto it = std::lower_bound(la.begin(), la.end(), b);
    if (it != la.end() && *it == b) return false;
    la.insert(it, b);
    auto& lb = adjacency_[b];
    lb.insert(std::lower_bound(lb.begin(), lb.end(), a), a);
    ++edge_count_;
    return true;
}

bool AttributedGraph::has_edge(std::size_t a, std::size_t b) const {
    if (a >= nodes_.size() || b >= nodes_.size()) return false;
    const auto& la = adjacency_[a];
    return std::binary_search(la.begin(), la.end(), b);
}

std::vector<std::pair<std::size_t, std::size_t>> AttributedGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(edge_count_);
    for (std::size_t i = 0; i < adjacency_.size(); ++i) {
        for (std::size_t j : adjacency_[i]) {
            if (i < j) out.emplace_back(i, j);
        }
    }
    return out;
}

std::size_t AttributedGraph::feature_dim() const {
    for (const auto& n : nodes_) {
        if (!n.features.empty()) return n.features.size();
    }
    return 0;
}

TargetSubgraph::TargetSubgraph(std::shared_ptr<const AttributedGraph> host,
                               std::vector<std::size_t> node_indices, std::optional<int> label)
    : host_(std::move(host)), nodes_(std::move(node_indices)), label_(label) {
    if (!host_) throw ContractError("TargetSubgraph: null host graph");
    std::unordered_set<std::size_t> seen;
    for (std::size_t v : nodes_) {
        if (v >= host_->node_count()) {
            throw ContractError("TargetSubgraph: node index " + std::to_string(v) +
                                " out of range for host with " +
                                std::to_string(host_->node_count()) + " nodes");
        }
        if (!seen.insert(v).second) {
            throw ContractError("TargetSubgraph: duplicate node index " + std::to_string(v));
        }
    }
}

bool TargetSubgraph::contains(std::size_t host_index) const {
    return local_index(host_index).has_value();
}

std::optional<std::size_t> TargetSubgraph::local_index(std::size_t host_index) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), host_index);
    if (it == nodes_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - nodes_.begin());
}

TargetSubgraph TargetSubgraph::rehosted(std::shared_ptr<const AttributedGraph> host) const {
    return TargetSubgraph(std::move(host), nodes_, label_);
}

void validate(const Schema& schema) {
    if (schema.root_type.empty()) throw ConfigError("schema: root_type is empty");
    if (schema.max_nodes == 0) throw ConfigError("schema: max_nodes must be positive");
    std::set<std::string> reachable{schema.root_type};
    for (std::size_t r = 0; r < schema.rules.size(); ++r) {
        const auto& rule = schema.rules[r];
        const std::string where = "schema rule " + std::to_string(r) + ": ";
        if (rule.from_type.empty() || rule.to_type.empty()) {
            throw ConfigError(where + "from_type and to_type must be non-empty");
        }
        if (rule.max_count == 0) throw ConfigError(where + "max_count must be positive");
        if (rule.min_count > rule.max_count) throw ConfigError(where + "min_count exceeds max_count");
        if (!reachable.contains(rule.from_type)) {
            throw ConfigError(where + "from_type '" + rule.from_type +
                              "' is neither the root type nor produced by an earlier rule");
        }
        reachable.insert(rule.to_type);
    }
}

namespace {

std::optional<std::vector<std::size_t>> expand_root(const AttributedGraph& g, std::size_t root,
                                                    const Schema& schema) {
    std::vector<std::size_t> matched{root};
    std::unordered_set<std::size_t> in_match{root};
    for (const auto& rule : schema.rules) {
        std::size_t taken = 0;
        const std::size_t frontier = matched.size();
        for (std::size_t m = 0; m < frontier; ++m) {
            const std::size_t u = matched[m];
            if (g.node(u).type != rule.from_type) continue;
            for (std::size_t v : g.neighbors(u)) {
                if (taken == rule.max_count || matched.size() == schema.max_nodes) break;
                if (g.node(v).type != rule.to_type || in_match.contains(v)) continue;
                matched.push_back(v);
                in_match.insert(v);
                ++taken;
            }
        }
        if (taken < rule.min_count) return std::nullopt;
    }
    return matched;
}

}  // namespace

std::vector<TargetSubgraph> induce_subgraphs(std::shared_ptr<const AttributedGraph> graph,
                                             const Schema& schema) {
    validate(schema);
    struct Found {
        std::size_t min_index;
        std::size_t root;
        std::vector<std::size_t> nodes;
    };
    std::vector<Found> found;
    for (std::size_t v = 0; v < graph->node_count(); ++v) {
        if (graph->node(v).type != schema.root_type) continue;
        if (auto nodes = expand_root(*graph, v, schema)) {
            const std::size_t lo = *std::min_element(nodes->begin(), nodes->end());
            found.push_back({lo, v, std::move(*nodes)});
        }
    }
    std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
        return a.min_index != b.min_index ? a.min_index < b.min_index : a.root < b.root;
    });
    std::vector<TargetSubgraph> out;
    out.reserve(found.size());
    for (auto& f : found) out.emplace_back(graph, std::move(f.nodes));
    return out;
}

BinaryMatrix adjacency_matrix(const TargetSubgraph& sub) {
    const auto nodes = sub.node_indices();
    BinaryMatrix a(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (sub.host().has_edge(nodes[i], nodes[j])) a.set_symmetric(i, j);
        }
    }
    return a;
}

namespace {

// on_path also marks every target node, so the walk never re-enters the target.
void extend_paths(const AttributedGraph& g, std::size_t target_len, Path& current,
                  std::vector<std::uint8_t>& on_path, std::vector<Path>& out) {
    if (current.size() == target_len) {
        out.push_back(current);
        return;
    }
    for (std::size_t v : g.neighbors(current.back())) {
        if (on_path[v]) continue;
        on_path[v] = 1;
        current.push_back(v);
        extend_paths(g, target_len, current, on_path, out);
        current.pop_back();
        on_path[v] = 0;
    }
}

}  // namespace

std::vector<Path> enumerate_paths(const TargetSubgraph& sub, std::size_t anchor, std::size_t nodes) {
    if (nodes == 0) throw ContractError("enumerate_paths: path length must be >= 1");
    if (!sub.contains(anchor)) {
        throw ContractError("enumerate_paths: anchor " + std::to_string(anchor) +
                            " is not a target node");
    }
    const auto& g = sub.host();
    std::vector<Path> out;
    Path current{anchor};
    std::vector<std::uint8_t> on_path(g.node_count(), 0);
    for (std::size_t v : sub.node_indices()) on_path[v] = 1;
    extend_paths(g, nodes, current, on_path, out);
    return out;
}

}  // namespace sgcnn
