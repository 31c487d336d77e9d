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

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace oracle {

std::set<std::vector<std::size_t>> paths(const sgcnn::AttributedGraph& g, const std::vector<std::size_t>& targets,
                                         std::size_t anchor, std::size_t d) {
    const std::size_t n = g.node_count();
    std::set<std::vector<std::size_t>> out;
    std::vector<std::size_t> tuple(d, 0);
    tuple[0] = anchor;
    // Odometer over positions 1..d-1.
    std::size_t combos = 1;
    for (std::size_t t = 1; t < d; ++t) combos *= n;
    for (std::size_t code = 0; code < combos; ++code) {
        std::size_t rest = code;
        for (std::size_t t = 1; t < d; ++t) {
            tuple[t] = rest % n;
            rest /= n;
        }
        bool ok = true;
        for (std::size_t t = 1; t < d && ok; ++t) {
            if (!g.has_edge(tuple[t - 1], tuple[t])) ok = false;
            if (std::find(targets.begin(), targets.end(), tuple[t]) != targets.end()) ok = false;
            for (std::size_t u = 0; u < t; ++u)
                if (tuple[u] == tuple[t]) ok = false;
        }
        if (ok) out.insert(tuple);
    }
    return out;
}

std::vector<std::vector<Vec>> masked_attributes(const std::vector<Vec>& features, const BinaryMatrix& a) {
    const std::size_t n = features.size();
    std::vector<std::vector<Vec>> x(n, features);  // X: feature list repeated per row
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double mask = (a(i, j) ? 1.0 : 0.0) + (i == j ? 1.0 : 0.0);
            for (double& v : x[i][j]) v *= mask;
        }
    }
    return x;
}

std::size_t score(const BinaryMatrix& a, const std::vector<std::size_t>& c,
                  const std::vector<std::vector<std::size_t>>& all) {
    const std::size_t n = a.size();
    std::size_t total = 0;
    for (std::size_t v : c)
        for (std::size_t u = 0; u < n; ++u) total += a(v, u) ? 1 : 0;
    for (const auto& other : all) {
        if (other == c) continue;
        bool connected = false;
        for (std::size_t u : c)
            for (std::size_t v : other) connected = connected || a(u, v);
        if (connected) ++total;
    }
    return total;
}

std::vector<std::vector<std::size_t>> pool(const BinaryMatrix& a, std::size_t k, std::size_t s) {
    const std::size_t n = a.size();
    std::vector<std::vector<std::size_t>> all;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
        std::vector<std::size_t> c;
        for (std::size_t v = 0; v < n; ++v)
            if (mask & (1u << v)) c.push_back(v);
        all.push_back(c);
    }
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> scored;
    for (const auto& c : all) scored.emplace_back(score(a, c, all), c);
    std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first > y.first;
        return x.second < y.second;
    });
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < s; ++i) out.push_back(scored[i % scored.size()].second);
    return out;
}

Vec convolve(const std::vector<Vec>& features, const BinaryMatrix& a, const std::vector<std::size_t>& subset,
             const std::vector<std::vector<std::vector<Vec>>>& kernel, const Vec& bias,
             const std::function<double(double)>& act) {
    const std::size_t k = subset.size();
    Vec out(kernel.size(), 0.0);
    for (std::size_t c = 0; c < kernel.size(); ++c) {
        double z = bias[c];
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t r = subset[i];
                const std::size_t q = subset[j];
                if (r != q && !a(r, q)) continue;
                for (std::size_t f = 0; f < features[q].size(); ++f) z += kernel[c][i][j][f] * features[q][f];
            }
        }
        out[c] = act(z);
    }
    return out;
}

Vec aggregate_depth(const std::vector<std::vector<Vec>>& rows, const Vec& w, const Vec& b, bool max_pool,
                    const std::function<double(double)>& act) {
    const std::size_t f = b.size();
    std::vector<Vec> weighted;
    for (const auto& row : rows) {
        Vec z(f, 0.0);
        for (std::size_t t = 0; t < w.size(); ++t)
            for (std::size_t x = 0; x < f; ++x) z[x] += w[t] * row[t][x];
        weighted.push_back(z);
    }
    Vec out(f, 0.0);
    for (std::size_t x = 0; x < f; ++x) {
        double acc = max_pool ? -INFINITY : 0.0;
        for (const auto& z : weighted) acc = max_pool ? std::max(acc, z[x]) : acc + z[x];
        if (!max_pool) acc /= static_cast<double>(weighted.size());
        out[x] = act(acc + b[x]);
    }
    return out;
}

namespace {

bool extend(const BinaryMatrix& g, const BinaryMatrix& h, const std::vector<std::size_t>& order,
            const std::vector<std::size_t>& deg_g, const std::vector<std::size_t>& deg_h, std::size_t pos,
            std::vector<std::size_t>& map, std::vector<bool>& used, bool exact) {
    if (pos == order.size()) return true;
    const std::size_t u = order[pos];
    for (std::size_t v = 0; v < h.size(); ++v) {
        if (used[v] || (exact ? deg_g[u] != deg_h[v] : deg_g[u] > deg_h[v])) continue;
        bool ok = true;
        for (std::size_t p = 0; p < pos && ok; ++p) {
            const std::size_t w = order[p];
            ok = exact ? g(u, w) == h(v, map[w]) : !g(u, w) || h(v, map[w]);
        }
        if (!ok) continue;
        map[u] = v;
        used[v] = true;
        if (extend(g, h, order, deg_g, deg_h, pos + 1, map, used, exact)) return true;
        used[v] = false;
    }
    return false;
}

std::optional<std::vector<std::size_t>> match(const BinaryMatrix& g, const BinaryMatrix& h, bool exact) {
    const std::size_t n = g.size();
    if (h.size() != n) return std::nullopt;
    std::vector<std::size_t> deg_g(n), deg_h(n);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t u = 0; u < n; ++u) {
            deg_g[v] += g(v, u) ? 1 : 0;
            deg_h[v] += h(v, u) ? 1 : 0;
        }
    }
    auto sg = deg_g, sh = deg_h;
    std::sort(sg.begin(), sg.end());
    std::sort(sh.begin(), sh.end());
    if (exact && sg != sh) return std::nullopt;
    if (!exact) {
        for (std::size_t i = 0; i < n; ++i)
            if (sg[i] > sh[i]) return std::nullopt;
    }
    // Visit g in BFS order from its highest-degree node so every new node is
    // constrained by an already mapped neighbour.
    std::vector<std::size_t> order;
    std::vector<bool> seen(n, false);
    while (order.size() < n) {
        std::size_t start = n;
        for (std::size_t v = 0; v < n; ++v)
            if (!seen[v] && (start == n || deg_g[v] > deg_g[start])) start = v;
        std::vector<std::size_t> queue{start};
        seen[start] = true;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            order.push_back(queue[qi]);
            for (std::size_t u = 0; u < n; ++u) {
                if (g(queue[qi], u) && !seen[u]) {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    std::vector<std::size_t> map(n, 0);
    std::vector<bool> used(n, false);
    if (!extend(g, h, order, deg_g, deg_h, 0, map, used, exact)) return std::nullopt;
    return map;
}

}  // namespace

std::optional<std::vector<std::size_t>> isomorphism(const BinaryMatrix& g, const BinaryMatrix& h) {
    return match(g, h, true);
}

std::optional<std::vector<std::size_t>> spanning_embedding(const BinaryMatrix& pattern, const BinaryMatrix& host) {
    return match(pattern, host, false);
}

double linear_probe(const std::vector<Vec>& train_x, const std::vector<int>& train_y, const std::vector<Vec>& test_x,
                    const std::vector<int>& test_y, std::size_t classes, std::size_t iterations, double lr) {
    const std::size_t dim = train_x.front().size();
    // Standardize with training statistics.
    Vec mean(dim, 0.0), scale(dim, 0.0);
    for (const auto& x : train_x)
        for (std::size_t f = 0; f < dim; ++f) mean[f] += x[f] / static_cast<double>(train_x.size());
    for (const auto& x : train_x)
        for (std::size_t f = 0; f < dim; ++f) scale[f] += (x[f] - mean[f]) * (x[f] - mean[f]);
    for (double& v : scale) v = std::sqrt(v / static_cast<double>(train_x.size())) + 1e-12;
    auto standardize = [&](const Vec& x) {
        Vec z(dim);
        for (std::size_t f = 0; f < dim; ++f) z[f] = (x[f] - mean[f]) / scale[f];
        return z;
    };
    std::vector<Vec> w(classes, Vec(dim + 1, 0.0));
    auto logits = [&](const Vec& z) {
        Vec out(classes);
        for (std::size_t c = 0; c < classes; ++c) {
            out[c] = w[c][dim];
            for (std::size_t f = 0; f < dim; ++f) out[c] += w[c][f] * z[f];
        }
        return out;
    };
    std::vector<Vec> zs;
    for (const auto& x : train_x) zs.push_back(standardize(x));
    for (std::size_t it = 0; it < iterations; ++it) {
        std::vector<Vec> grad(classes, Vec(dim + 1, 0.0));
        for (std::size_t i = 0; i < zs.size(); ++i) {
            Vec p = logits(zs[i]);
            const double m = *std::max_element(p.begin(), p.end());
            double sum = 0.0;
            for (double& v : p) sum += (v = std::exp(v - m));
            for (std::size_t c = 0; c < classes; ++c) {
                const double g = p[c] / sum - (static_cast<int>(c) == train_y[i] ? 1.0 : 0.0);
                for (std::size_t f = 0; f < dim; ++f) grad[c][f] += g * zs[i][f];
                grad[c][dim] += g;
            }
        }
        for (std::size_t c = 0; c < classes; ++c)
            for (std::size_t f = 0; f <= dim; ++f) w[c][f] -= lr * grad[c][f] / static_cast<double>(zs.size());
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test_x.size(); ++i) {
        const Vec p = logits(standardize(test_x[i]));
        const auto pred = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
        if (pred == test_y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_x.size());
}

}  // namespace oracle
