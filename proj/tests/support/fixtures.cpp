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

#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fx {

std::shared_ptr<AttributedGraph> random_graph(std::size_t n, double p, std::size_t dim, Rng& rng,
                                              const std::string& type) {
    auto g = std::make_shared<AttributedGraph>();
    for (std::size_t i = 0; i < n; ++i) {
        NodeRecord rec{"v" + std::to_string(i), type, {}, {}};
        for (std::size_t f = 0; f < dim; ++f) rec.features.push_back(rng.uniform(-1.0, 1.0));
        g->add_node(std::move(rec));
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) g->add_edge(i, j);
    return g;
}

BinaryMatrix random_adjacency(std::size_t n, double p, Rng& rng) {
    BinaryMatrix a(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) a.set_symmetric(i, j);
    return a;
}

std::shared_ptr<AttributedGraph> permuted(const AttributedGraph& g, const std::vector<std::size_t>& perm) {
    std::vector<std::size_t> inverse(perm.size());
    for (std::size_t v = 0; v < perm.size(); ++v) inverse[perm[v]] = v;
    auto out = std::make_shared<AttributedGraph>();
    for (std::size_t i = 0; i < perm.size(); ++i) out->add_node(g.node(inverse[i]));
    for (auto [a, b] : g.edges()) out->add_edge(perm[a], perm[b]);
    return out;
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    return perm;
}

TargetSubgraph first_nodes(std::shared_ptr<const AttributedGraph> host, std::size_t n, std::optional<int> label) {
    std::vector<std::size_t> nodes(n);
    std::iota(nodes.begin(), nodes.end(), std::size_t{0});
    return TargetSubgraph(std::move(host), std::move(nodes), label);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
    Matrix m(rows, cols);
    for (double& x : m.values()) x = rng.uniform(lo, hi);
    return m;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        out.emplace_back(row.begin(), row.end());
    }
    return out;
}

std::vector<double> flat(const Matrix& m) { return {m.values().begin(), m.values().end()}; }

double relative_error(double a, double b, double floor) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

std::vector<double> central_differences(const std::function<double()>& loss, const std::vector<double*>& params,
                                        double step) {
    std::vector<double> out;
    out.reserve(params.size());
    for (double* p : params) {
        const double saved = *p;
        *p = saved + step;
        const double up = loss();
        *p = saved - step;
        const double down = loss();
        *p = saved;
        out.push_back((up - down) / (2.0 * step));
    }
    return out;
}

}  // namespace fx
