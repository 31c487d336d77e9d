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

#include "sgcnn/aggregation.hpp"

#include "sgcnn/errors.hpp"
#include "sgcnn/random.hpp"

#include <set>
#include <string>

namespace sgcnn {

void validate(const AggregationConfig& cfg) {
    if (cfg.depths.empty()) throw ConfigError("aggregation: depths must be non-empty");
    if (cfg.samples.size() != cfg.depths.size()) {
        throw ConfigError("aggregation: need one sample count per depth (" +
                          std::to_string(cfg.depths.size()) + " depths, " +
                          std::to_string(cfg.samples.size()) + " sample counts)");
    }
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < cfg.depths.size(); ++i) {
        if (cfg.depths[i] == 0) throw ConfigError("aggregation: depths must be >= 1");
        if (cfg.samples[i] == 0) throw ConfigError("aggregation: sample counts must be >= 1");
        if (!seen.insert(cfg.depths[i]).second) {
            throw ConfigError("aggregation: depth " + std::to_string(cfg.depths[i]) + " listed twice");
        }
    }
}

namespace {

std::size_t require_features(const TargetSubgraph& sub) {
    const std::size_t f = sub.host().feature_dim();
    if (f == 0) throw ContractError("aggregation: host graph has no node features (embed it first)");
    for (const auto& node : sub.host().nodes()) {
        if (node.features.size() != f) throw ContractError("aggregation: ragged node feature dimensions");
    }
    return f;
}

}  // namespace

NeighborPathMatrix build_neighbor_matrix(const TargetSubgraph& sub, std::size_t depth,
                                         std::size_t samples, std::uint64_t seed) {
    if (depth == 0 || samples == 0) throw ContractError("build_neighbor_matrix: depth and samples must be >= 1");
    const std::size_t f = require_features(sub);
    std::vector<Path> pooled;
    for (std::size_t anchor : sub.node_indices()) {
        auto paths = enumerate_paths(sub, anchor, depth);
        pooled.insert(pooled.end(), std::make_move_iterator(paths.begin()),
                      std::make_move_iterator(paths.end()));
    }
    NeighborPathMatrix n;
    n.depth = depth;
    n.feature_dim = f;
    n.values = Matrix(samples * depth, f);
    if (pooled.empty()) return n;
    if (pooled.size() <= samples) {
        for (std::size_t r = 0; r < samples; ++r) n.rows.push_back(pooled[r % pooled.size()]);
    } else {
        Rng rng(seed);
        for (auto idx : sample_without_replacement(pooled.size(), samples, rng)) {
            n.rows.push_back(pooled[idx]);
        }
    }
    for (std::size_t r = 0; r < samples; ++r) {
        for (std::size_t t = 0; t < depth; ++t) {
            const auto& feat = sub.host().node(n.rows[r][t]).features;
            std::copy(feat.begin(), feat.end(), n.values.row(r * depth + t).begin());
        }
    }
    return n;
}

std::uint64_t depth_seed(const AggregationConfig& cfg, std::size_t depth) {
    return derive_seed(cfg.seed, "aggregation/depth/" + std::to_string(depth));
}

AggregationPlan plan_aggregation(const TargetSubgraph& sub, const AggregationConfig& cfg) {
    validate(cfg);
    const std::size_t f = require_features(sub);
    AggregationPlan plan;
    plan.node_features = Matrix(sub.size(), f);
    for (std::size_t i = 0; i < sub.size(); ++i) {
        const auto& feat = sub.host().node(sub.node_indices()[i]).features;
        std::copy(feat.begin(), feat.end(), plan.node_features.row(i).begin());
    }
    for (std::size_t i = 0; i < cfg.depths.size(); ++i) {
        plan.neighbors.push_back(
            build_neighbor_matrix(sub, cfg.depths[i], cfg.samples[i], depth_seed(cfg, cfg.depths[i])));
    }
    return plan;
}

Var weighted_path_sum(Var w, const NeighborPathMatrix& n) {
    const Matrix& wv = w.value();
    if (wv.rows() != 1 || wv.cols() != n.depth) {
        throw ContractError("aggregate_depth: kernel is " + wv.shape_string() + " but paths have " +
                            std::to_string(n.depth) + " nodes");
    }
    const std::size_t s = n.sample_count();
    const std::size_t f = n.feature_dim;
    Matrix out(s, f);
    for (std::size_t r = 0; r < s; ++r) {
        auto dst = out.row(r);
        for (std::size_t t = 0; t < n.depth; ++t) {
            const double wt = wv[t];
            auto src = n.values.row(r * n.depth + t);
            for (std::size_t k = 0; k < f; ++k) dst[k] += wt * src[k];
        }
    }
    const Var inputs[] = {w};
    return w.tape->record(std::move(out), inputs, [w, &n](Tape& t, const Matrix&, const Matrix& g) {
        Matrix* gw = t.grad(w);
        if (!gw) return;
        for (std::size_t r = 0; r < g.rows(); ++r) {
            auto gr = g.row(r);
            for (std::size_t d = 0; d < n.depth; ++d) {
                auto src = n.values.row(r * n.depth + d);
                double acc = 0.0;
                for (std::size_t k = 0; k < gr.size(); ++k) acc += gr[k] * src[k];
                (*gw)[d] += acc;
            }
        }
    });
}

Var aggregate_depth(const NeighborPathMatrix& n, DepthVars params, Pool pool, Activation act) {
    if (params.b.value().rows() != 1 || params.b.value().cols() != n.feature_dim) {
        throw ContractError("aggregate_depth: bias is " + params.b.value().shape_string() +
                            ", expected 1x" + std::to_string(n.feature_dim));
    }
    Var rows = weighted_path_sum(params.w, n);
    return activate(add(reduce_rows(rows, pool), params.b), act);
}

Var neighbor_feature(const AggregationPlan& plan, std::span<const DepthVars> params,
                     const AggregationConfig& cfg) {
    if (params.size() != plan.neighbors.size()) {
        throw ContractError("aggregation: " + std::to_string(params.size()) + " parameter sets for " +
                            std::to_string(plan.neighbors.size()) + " depths");
    }
    std::vector<Var> per_depth;
    per_depth.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        per_depth.push_back(aggregate_depth(plan.neighbors[i], params[i], cfg.path_pool, cfg.activation));
    }
    return reduce_rows(stack_rows(per_depth), cfg.depth_pool);
}

Var augment(Tape& tape, const AggregationPlan& plan, Var neighbor) {
    return concat_cols(tape.constant(plan.node_features), neighbor);
}

std::vector<double> aggregate_depth(const NeighborPathMatrix& n, const DepthParams& params, Pool pool,
                                    Activation act) {
    Tape tape;
    DepthVars vars{tape.constant(Matrix::row_vector(params.w)), tape.constant(Matrix::row_vector(params.b))};
    const Matrix& out = aggregate_depth(n, vars, pool, act).value();
    return {out.values().begin(), out.values().end()};
}

std::vector<std::vector<double>> aggregate(const TargetSubgraph& sub, const AggregationConfig& cfg,
                                           std::span<const DepthParams> params) {
    const AggregationPlan plan = plan_aggregation(sub, cfg);
    Tape tape;
    std::vector<DepthVars> vars;
    for (const auto& p : params) {
        vars.push_back({tape.constant(Matrix::row_vector(p.w)), tape.constant(Matrix::row_vector(p.b))});
    }
    const Matrix& x = augment(tape, plan, neighbor_feature(plan, vars, cfg)).value();
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < x.rows(); ++r) out.emplace_back(x.row(r).begin(), x.row(r).end());
    return out;
}

}  // namespace sgcnn
