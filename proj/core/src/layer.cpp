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

#include "sgcnn/layer.hpp"

#include "sgcnn/errors.hpp"
#include "sgcnn/random.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace sgcnn {

PoolingMode parse_pooling_mode(std::string_view text) {
    if (text == "degree" || text == "degree-ranked") return PoolingMode::DegreeRanked;
    if (text == "random") return PoolingMode::Random;
    throw ConfigError("unknown pooling mode '" + std::string(text) + "' (expected degree-ranked or random)");
}

std::string to_string(PoolingMode mode) {
    return mode == PoolingMode::DegreeRanked ? "degree-ranked" : "random";
}

void validate(const LayerConfig& cfg) {
    if (cfg.k == 0) throw ConfigError("layer: k must be >= 1");
    if (cfg.s == 0) throw ConfigError("layer: s must be >= 1");
    if (cfg.out_dim == 0) throw ConfigError("layer: out_dim must be >= 1");
    if (cfg.pre_dropout != 0 && cfg.pre_dropout < cfg.s) {
        throw ConfigError("layer: pre_dropout (" + std::to_string(cfg.pre_dropout) + ") must be >= s (" +
                          std::to_string(cfg.s) + ")");
    }
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        // r * num / i is exact at every step; guard the multiplication.
        if (r > std::numeric_limits<std::uint64_t>::max() / num) {
            throw ContractError("binomial(" + std::to_string(n) + ", " + std::to_string(k) + ") overflows");
        }
        r = r * num / i;
    }
    return r;
}

std::vector<Candidate> enumerate_candidates(std::size_t n, std::size_t k) {
    if (k == 0 || k > n) {
        throw ContractError("enumerate_candidates: need 1 <= k <= n, got n=" + std::to_string(n) +
                            ", k=" + std::to_string(k));
    }
    std::vector<Candidate> out;
    out.reserve(binomial(n, k));
    Candidate c(k);
    std::iota(c.begin(), c.end(), std::size_t{0});
    while (true) {
        out.push_back(c);
        std::size_t i = k;
        while (i > 0 && c[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++c[i - 1];
        for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

Candidate unrank_candidate(std::size_t n, std::size_t k, std::uint64_t rank) {
    if (k == 0 || k > n) throw ContractError("unrank_candidate: need 1 <= k <= n");
    if (rank >= binomial(n, k)) throw ContractError("unrank_candidate: rank out of range");
    Candidate c;
    c.reserve(k);
    std::size_t x = 0;
    for (std::size_t i = 0; i < k; ++i) {
        while (true) {
            const std::uint64_t block = binomial(n - 1 - x, k - 1 - i);
            if (rank < block) break;
            rank -= block;
            ++x;
        }
        c.push_back(x++);
    }
    return c;
}

AttributeMatrix attribute_matrix(const Matrix& features, const BinaryMatrix& adjacency) {
    const std::size_t n = features.rows();
    if (adjacency.size() != n) {
        throw ContractError("attribute_matrix: " + std::to_string(n) + " feature rows but adjacency is " +
                            std::to_string(adjacency.size()) + "x" + std::to_string(adjacency.size()));
    }
    AttributeMatrix ar{n, features.cols(), Matrix(n * n, features.cols())};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && !adjacency(i, j)) continue;
            auto src = features.row(j);
            std::copy(src.begin(), src.end(), ar.entries.row(i * n + j).begin());
        }
    }
    return ar;
}

namespace {

using Bits = std::vector<std::uint64_t>;

Bits node_mask(std::span<const std::size_t> nodes, std::size_t n) {
    Bits b((n + 63) / 64, 0);
    for (std::size_t v : nodes) b[v / 64] |= std::uint64_t{1} << (v % 64);
    return b;
}

Bits neighbour_mask(std::span<const std::size_t> nodes, const BinaryMatrix& a) {
    const std::size_t n = a.size();
    Bits b((n + 63) / 64, 0);
    for (std::size_t v : nodes) {
        for (std::size_t u = 0; u < n; ++u) {
            if (a(v, u)) b[u / 64] |= std::uint64_t{1} << (u % 64);
        }
    }
    return b;
}

bool intersects(const Bits& x, const Bits& y) {
    for (std::size_t w = 0; w < x.size(); ++w) {
        if (x[w] & y[w]) return true;
    }
    return false;
}

void check_candidates(const BinaryMatrix& a, std::span<const Candidate> candidates) {
    for (const auto& c : candidates) {
        for (std::size_t v : c) {
            if (v >= a.size()) throw ContractError("candidate node " + std::to_string(v) + " out of range");
        }
    }
}

std::vector<Candidate> rank_and_keep(const BinaryMatrix& a, std::vector<Candidate> survivors, std::size_t s) {
    const auto scores = candidate_scores(a, survivors);
    std::vector<std::size_t> order(survivors.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return scores[x] > scores[y]; });
    std::vector<Candidate> kept;
    const std::size_t top = std::min(s, order.size());
    kept.reserve(s);
    for (std::size_t i = 0; i < top; ++i) kept.push_back(std::move(survivors[order[i]]));
    for (std::size_t i = top; i < s && top > 0; ++i) kept.push_back(kept[i % top]);
    return kept;
}

}  // namespace

std::vector<std::uint64_t> candidate_scores(const BinaryMatrix& adjacency, std::span<const Candidate> candidates) {
    check_candidates(adjacency, candidates);
    const std::size_t n = adjacency.size();
    std::vector<std::size_t> degree(n);
    for (std::size_t v = 0; v < n; ++v) degree[v] = adjacency.row_sum(v);
    std::vector<Bits> members;
    std::vector<Bits> reach;
    members.reserve(candidates.size());
    reach.reserve(candidates.size());
    for (const auto& c : candidates) {
        members.push_back(node_mask(c, n));
        reach.push_back(neighbour_mask(c, adjacency));
    }
    std::vector<std::uint64_t> scores(candidates.size(), 0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        for (std::size_t v : candidates[i]) scores[i] += degree[v];
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (j != i && intersects(reach[i], members[j])) ++scores[i];
        }
    }
    layer_counters().scored_candidates += candidates.size();
    return scores;
}

std::vector<Candidate> graph_pool(const BinaryMatrix& adjacency, std::span<const Candidate> candidates,
                                  std::size_t s, std::size_t pre_dropout, std::uint64_t seed) {
    if (s == 0) throw ContractError("graph_pool: s must be >= 1");
    if (pre_dropout != 0 && s > pre_dropout) throw ContractError("graph_pool: s exceeds pre_dropout");
    if (candidates.empty()) throw ContractError("graph_pool: no candidates");
    Rng rng(seed);
    const std::uint64_t keep = pre_dropout == 0 ? candidates.size() : pre_dropout;
    std::vector<Candidate> survivors;
    for (auto idx : sample_without_replacement(candidates.size(), keep, rng)) {
        survivors.push_back(candidates[idx]);
    }
    return rank_and_keep(adjacency, std::move(survivors), s);
}

std::vector<Candidate> select_candidates(const BinaryMatrix& adjacency, std::size_t k, std::size_t s,
                                         std::size_t pre_dropout, PoolingMode mode, std::uint64_t seed) {
    const std::size_t n = adjacency.size();
    if (s == 0) throw ContractError("select_candidates: s must be >= 1");
    if (pre_dropout != 0 && s > pre_dropout) throw ContractError("select_candidates: s exceeds pre_dropout");
    const std::uint64_t total = binomial(n, k);
    Rng rng(seed);
    if (mode == PoolingMode::Random) {
        std::vector<Candidate> kept;
        for (auto rank : sample_without_replacement(total, s, rng)) kept.push_back(unrank_candidate(n, k, rank));
        const std::size_t top = kept.size();
        for (std::size_t i = top; i < s; ++i) kept.push_back(kept[i % top]);
        return kept;
    }
    const std::uint64_t keep = pre_dropout == 0 ? total : pre_dropout;
    std::vector<Candidate> survivors;
    for (auto rank : sample_without_replacement(total, keep, rng)) survivors.push_back(unrank_candidate(n, k, rank));
    return rank_and_keep(adjacency, std::move(survivors), s);
}

std::vector<double> convolve_candidate(const AttributeMatrix& ar, std::span<const std::size_t> subset,
                                       const LayerParams& params) {
    const std::size_t k = params.k;
    if (subset.size() != k) throw ContractError("convolve_candidate: subset size differs from kernel size");
    if (ar.feature_dim != params.in_dim) throw ContractError("convolve_candidate: feature dimension mismatch");
    for (std::size_t v : subset) {
        if (v >= ar.n) throw ContractError("convolve_candidate: subset node out of range");
    }
    std::vector<double> out(params.out_dim, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            auto x = ar.at(subset[i], subset[j]);
            for (std::size_t f = 0; f < params.in_dim; ++f) {
                if (x[f] == 0.0) continue;
                auto krow = params.kernel.row((i * k + j) * params.in_dim + f);
                for (std::size_t c = 0; c < params.out_dim; ++c) out[c] += krow[c] * x[f];
            }
        }
    }
    for (std::size_t c = 0; c < params.out_dim; ++c) out[c] = params.activation.apply(out[c] + params.bias[c]);
    ++layer_counters().convolutions;
    return out;
}

BinaryMatrix new_adjacency(std::span<const Candidate> kept, const BinaryMatrix& adjacency) {
    if (kept.empty()) throw ContractError("new_adjacency: no kept candidates");
    check_candidates(adjacency, kept);
    const std::size_t n = adjacency.size();
    std::vector<Bits> members;
    std::vector<Bits> reach;
    for (const auto& c : kept) {
        members.push_back(node_mask(c, n));
        reach.push_back(neighbour_mask(c, adjacency));
    }
    BinaryMatrix out(kept.size());
    for (std::size_t p = 0; p < kept.size(); ++p) {
        for (std::size_t q = p + 1; q < kept.size(); ++q) {
            if (intersects(members[p], members[q]) || intersects(reach[p], members[q])) out.set_symmetric(p, q);
        }
    }
    return out;
}

LayerPlan plan_layer(const BinaryMatrix& adjacency, const LayerConfig& cfg, std::string_view layer_name) {
    validate(cfg);
    const std::size_t n = adjacency.size();
    if (n < cfg.k) {
        throw ContractError(std::string(layer_name) + ": kernel size k=" + std::to_string(cfg.k) +
                            " exceeds the " + std::to_string(n) + " input nodes");
    }
    LayerPlan plan;
    plan.n = n;
    plan.k = cfg.k;
    plan.kept = select_candidates(adjacency, cfg.k, cfg.s, cfg.pre_dropout, cfg.pooling, cfg.seed);
    plan.entries.reserve(plan.kept.size());
    for (const auto& c : plan.kept) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
        for (std::size_t i = 0; i < cfg.k; ++i) {
            for (std::size_t j = 0; j < cfg.k; ++j) {
                if (i == j || adjacency(c[i], c[j])) {
                    e.emplace_back(static_cast<std::uint32_t>(i * cfg.k + j), static_cast<std::uint32_t>(c[j]));
                }
            }
        }
        plan.entries.push_back(std::move(e));
    }
    plan.out_adjacency = new_adjacency(plan.kept, adjacency);
    return plan;
}

Var candidate_conv(Var features, Var kernel, const LayerPlan& plan) {
    const Matrix& x = features.value();
    const Matrix& w = kernel.value();
    if (x.rows() != plan.n) {
        throw ContractError("candidate_conv: " + std::to_string(x.rows()) + " input nodes, plan expects " +
                            std::to_string(plan.n));
    }
    const std::size_t fin = x.cols();
    const std::size_t fout = w.cols();
    if (w.rows() != plan.k * plan.k * fin) {
        throw ContractError("candidate_conv: kernel is " + w.shape_string() + ", expected " +
                            std::to_string(plan.k * plan.k * fin) + " rows");
    }
    Matrix out(plan.kept.size(), fout);
    for (std::size_t p = 0; p < plan.kept.size(); ++p) {
        auto acc = out.row(p);
        for (auto [entry, node] : plan.entries[p]) {
            auto xr = x.row(node);
            for (std::size_t f = 0; f < fin; ++f) {
                const double xf = xr[f];
                if (xf == 0.0) continue;
                auto kr = w.row(entry * fin + f);
                for (std::size_t c = 0; c < fout; ++c) acc[c] += xf * kr[c];
            }
        }
    }
    layer_counters().convolutions += plan.kept.size();
    const Var inputs[] = {features, kernel};
    return features.tape->record(
        std::move(out), inputs, [features, kernel, &plan](Tape& t, const Matrix&, const Matrix& g) {
            const Matrix& x = t.value(features);
            const Matrix& w = t.value(kernel);
            const std::size_t fin = x.cols();
            const std::size_t fout = w.cols();
            Matrix* gx = t.grad(features);
            Matrix* gw = t.grad(kernel);
            for (std::size_t p = 0; p < plan.kept.size(); ++p) {
                auto gp = g.row(p);
                for (auto [entry, node] : plan.entries[p]) {
                    auto xr = x.row(node);
                    for (std::size_t f = 0; f < fin; ++f) {
                        const std::size_t row = entry * fin + f;
                        if (gw) {
                            const double xf = xr[f];
                            if (xf != 0.0) {
                                auto gwr = gw->row(row);
                                for (std::size_t c = 0; c < fout; ++c) gwr[c] += xf * gp[c];
                            }
                        }
                        if (gx) {
                            auto kr = w.row(row);
                            double s = 0.0;
                            for (std::size_t c = 0; c < fout; ++c) s += kr[c] * gp[c];
                            (*gx)(node, f) += s;
                        }
                    }
                }
            }
        });
}

Var layer_apply(Var features, Var kernel, Var bias, const LayerPlan& plan, Activation act) {
    return activate(add_row(candidate_conv(features, kernel, plan), bias), act);
}

FeatureGraph layer_forward(const Matrix& features, const BinaryMatrix& adjacency, const LayerConfig& cfg,
                           const LayerParams& params, std::string_view layer_name) {
    if (params.k != cfg.k || params.in_dim != features.cols() || params.out_dim != cfg.out_dim) {
        throw ContractError(std::string(layer_name) + ": parameters do not match the layer configuration");
    }
    const LayerPlan plan = plan_layer(adjacency, cfg, layer_name);
    Tape tape;
    Var x = tape.constant(features);
    Var w = tape.constant(params.kernel);
    Var b = tape.constant(Matrix::row_vector(params.bias));
    FeatureGraph out;
    out.node_features = layer_apply(x, w, b, plan, params.activation).value();
    out.adjacency = plan.out_adjacency;
    out.provenance = plan.kept;
    return out;
}

LayerCounters& layer_counters() {
    thread_local LayerCounters counters;
    return counters;
}

void reset_layer_counters() { layer_counters() = LayerCounters{}; }

}  // namespace sgcnn
