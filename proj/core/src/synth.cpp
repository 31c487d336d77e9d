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

#include "sgcnn/synth.hpp"

#include "sgcnn/errors.hpp"
#include "sgcnn/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <map>
#include <memory>

namespace sgcnn {

namespace {

constexpr std::array<std::string_view, 6> kMotifNames = {
    "star", "chain-of-stars", "ring-with-pendants", "bipartite-fan", "tree", "clique-with-tail"};

constexpr std::array<std::string_view, 4> kTypeCycle = {"part", "tag", "author", "comment"};

constexpr std::array<std::string_view, 32> kSharedWords = {
    "design",  "model",  "assembly", "render",  "steel",   "aluminum", "bolt",    "cad",
    "version", "draft",  "mesh",     "print",   "surface", "sketch",   "project", "final",
    "test",    "update", "detail",   "concept", "plate",   "bracket",  "shaft",   "housing",
    "cover",   "frame",  "mount",    "joint",   "spring",  "nut",      "washer",  "pin"};

constexpr std::array<std::array<std::string_view, 4>, 6> kClassWords = {{
    {"sedan", "chassis", "coupe", "bumper"},
    {"piston", "crankshaft", "cylinder", "turbo"},
    {"gripper", "servo", "actuator", "kinematic"},
    {"fuselage", "aileron", "propeller", "airfoil"},
    {"spur", "helical", "pinion", "gearbox"},
    {"rim", "spoke", "tire", "hub"},
}};

std::string_view pick(std::span<const std::string_view> words, Rng& rng) {
    return words[rng.index(words.size())];
}

}  // namespace

std::string to_string(Motif motif) { return std::string(kMotifNames[static_cast<std::size_t>(motif)]); }

Motif motif_for_class(std::size_t label) {
    if (label >= kMotifCount) throw ConfigError("no motif for class " + std::to_string(label));
    return static_cast<Motif>(label);
}

std::vector<std::pair<std::size_t, std::size_t>> motif_edges(Motif motif, std::size_t n) {
    if (n < kMinMotifNodes) {
        throw ConfigError("motif " + to_string(motif) + " needs at least " + std::to_string(kMinMotifNodes) +
                          " nodes, got " + std::to_string(n));
    }
    std::vector<std::pair<std::size_t, std::size_t>> e;
    switch (motif) {
        case Motif::Star:
            for (std::size_t i = 1; i < n; ++i) e.emplace_back(0, i);
            break;
        case Motif::ChainOfStars: {
            const std::size_t hubs = std::max<std::size_t>(2, n / 4);
            for (std::size_t h = 0; h + 1 < hubs; ++h) e.emplace_back(h, h + 1);
            for (std::size_t leaf = hubs; leaf < n; ++leaf) e.emplace_back((leaf - hubs) % hubs, leaf);
            break;
        }
        case Motif::RingWithPendants: {
            const std::size_t ring = (n + 1) / 2;
            for (std::size_t i = 0; i < ring; ++i) e.emplace_back(std::min(i, (i + 1) % ring), std::max(i, (i + 1) % ring));
            for (std::size_t p = ring; p < n; ++p) e.emplace_back(p - ring, p);
            break;
        }
        case Motif::BipartiteFan:
            for (std::size_t i = 2; i < n; ++i) {
                e.emplace_back(0, i);
                e.emplace_back(1, i);
            }
            break;
        case Motif::Tree:
            for (std::size_t i = 1; i < n; ++i) e.emplace_back((i - 1) / 2, i);
            break;
        case Motif::CliqueWithTail: {
            const std::size_t clique = std::max<std::size_t>(4, n / 3);
            for (std::size_t i = 0; i < clique; ++i)
                for (std::size_t j = i + 1; j < clique; ++j) e.emplace_back(i, j);
            for (std::size_t t = clique; t < n; ++t) e.emplace_back(t - 1, t);
            break;
        }
    }
    return e;
}

void validate(const SynthConfig& cfg) {
    if (cfg.num_classes < 2) throw ConfigError("synth: num_classes must be >= 2");
    if (cfg.num_classes > kMotifCount) {
        throw ConfigError("synth: at most " + std::to_string(kMotifCount) + " classes are available");
    }
    if (cfg.subgraph_size < kMinMotifNodes) {
        throw ConfigError("synth: subgraph_size " + std::to_string(cfg.subgraph_size) +
                          " is too small to host a motif (minimum " + std::to_string(kMinMotifNodes) + ")");
    }
    if (!(cfg.noise_rate >= 0.0 && cfg.noise_rate <= 1.0)) throw ConfigError("synth: noise_rate must be in [0, 1]");
    if (!(cfg.class_token_bias >= 0.0 && cfg.class_token_bias <= 1.0)) {
        throw ConfigError("synth: class_token_bias must be in [0, 1]");
    }
    if (cfg.context_min > cfg.context_max) throw ConfigError("synth: context_min exceeds context_max");
}

std::string node_type_at(std::size_t position) {
    if (position == 0) return "model";
    return std::string(kTypeCycle[(position - 1) % kTypeCycle.size()]);
}

namespace {

// Breadth-first order from node 0 with the neighbours of every node visited
// in shuffled order. Returns order[position] = local motif node.
std::vector<std::size_t> shuffled_bfs(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                      Rng& rng) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<std::uint8_t> seen(n, 0);
    std::vector<std::size_t> order;
    std::deque<std::size_t> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        order.push_back(u);
        auto next = adj[u];
        std::sort(next.begin(), next.end());
        rng.shuffle(std::span<std::size_t>(next));
        for (std::size_t v : next) {
            if (!seen[v]) {
                seen[v] = 1;
                queue.push_back(v);
            }
        }
    }
    return order;
}

std::string describe(std::size_t label, const SynthConfig& cfg, Rng& rng) {
    std::string words;
    for (int w = 0; w < 2; ++w) {
        std::string_view word = rng.bernoulli(cfg.class_token_bias)
                                    ? pick(kClassWords[label], rng)
                                    : pick(kSharedWords, rng);
        if (!words.empty()) words += ' ';
        words += word;
    }
    return words;
}

}  // namespace

Dataset generate(const SynthConfig& cfg) {
    validate(cfg);
    Rng rng(derive_seed(cfg.seed, "synth"));
    const std::size_t n = cfg.subgraph_size;
    Dataset out;
    out.reserve(cfg.num_classes * cfg.samples_per_class);
    for (std::size_t label = 0; label < cfg.num_classes; ++label) {
        const auto edges = motif_edges(motif_for_class(label), n);
        for (std::size_t s = 0; s < cfg.samples_per_class; ++s) {
            const std::string prefix = "c" + std::to_string(label) + "s" + std::to_string(s) + "-";
            const auto order = shuffled_bfs(n, edges, rng);
            std::vector<std::size_t> position(n);
            for (std::size_t p = 0; p < n; ++p) position[order[p]] = p;

            auto host = std::make_shared<AttributedGraph>();
            for (std::size_t p = 0; p < n; ++p) {
                NodeRecord rec;
                rec.id = prefix + std::to_string(p);
                rec.type = node_type_at(p);
                rec.attributes["kind"] = rec.type;
                rec.attributes["title"] = describe(label, cfg, rng);
                host->add_node(std::move(rec));
            }
            for (auto [a, b] : edges) host->add_edge(position[a], position[b]);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (host->has_edge(i, j)) continue;
                    if (rng.bernoulli(cfg.noise_rate)) host->add_edge(i, j);
                }
            }
            const std::size_t context =
                cfg.context_min + rng.index(cfg.context_max - cfg.context_min + 1);
            for (std::size_t c = 0; c < context; ++c) {
                NodeRecord rec;
                rec.id = prefix + "ctx" + std::to_string(c);
                rec.type = "user";
                rec.attributes["kind"] = "user";
                rec.attributes["title"] = describe(label, cfg, rng);
                const std::size_t v = host->add_node(std::move(rec));
                // Attach to a target node or extend an earlier context chain.
                const std::size_t anchor = (c > 0 && rng.bernoulli(0.5)) ? n + rng.index(c) : rng.index(n);
                host->add_edge(anchor, v);
            }
            std::vector<std::size_t> targets(n);
            for (std::size_t p = 0; p < n; ++p) targets[p] = p;
            out.emplace_back(std::shared_ptr<const AttributedGraph>(std::move(host)), std::move(targets),
                             static_cast<int>(label));
        }
    }
    return out;
}

SplitIndices split(const Dataset& dataset, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie strictly between 0 and 1");
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto label = dataset[i].label();
        if (!label) throw ConfigError("split: sample " + std::to_string(i) + " has no label");
        by_class[*label].push_back(i);
    }
    for (const auto& [label, members] : by_class) {
        if (members.size() < 2) {
            throw ConfigError("split: class " + std::to_string(label) + " has fewer than 2 samples");
        }
    }
    const auto total_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(dataset.size())));
    std::vector<int> labels;
    std::vector<std::size_t> quota;
    std::vector<double> remainder;
    std::size_t assigned = 0;
    for (const auto& [label, members] : by_class) {
        const double exact = ratio * static_cast<double>(members.size());
        const auto base = static_cast<std::size_t>(std::floor(exact));
        labels.push_back(label);
        quota.push_back(base);
        remainder.push_back(exact - static_cast<double>(base));
        assigned += base;
    }
    std::vector<std::size_t> by_remainder(labels.size());
    for (std::size_t i = 0; i < by_remainder.size(); ++i) by_remainder[i] = i;
    std::stable_sort(by_remainder.begin(), by_remainder.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < total_train && i < by_remainder.size(); ++i, ++assigned) {
        ++quota[by_remainder[i]];
    }
    Rng rng(seed);
    SplitIndices out;
    std::size_t c = 0;
    for (auto& [label, members] : by_class) {
        const std::size_t q = std::clamp<std::size_t>(quota[c++], 1, members.size() - 1);
        rng.shuffle(std::span<std::size_t>(members));
        out.train.insert(out.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(q));
        out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(q), members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices) {
    Dataset out;
    out.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= dataset.size()) throw ContractError("subset: index " + std::to_string(i) + " out of range");
        out.push_back(dataset[i]);
    }
    return out;
}

}  // namespace sgcnn
