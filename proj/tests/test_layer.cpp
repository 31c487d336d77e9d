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

#include "sgcnn/errors.hpp"
#include "sgcnn/layer.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace sgcnn;

namespace {

std::uint64_t factorial_binomial(std::size_t n, std::size_t k) {
    // Product formula in long double; exact for n <= 20.
    long double r = 1;
    for (std::size_t i = 1; i <= n; ++i) r *= i;
    for (std::size_t i = 1; i <= k; ++i) r /= i;
    for (std::size_t i = 1; i <= n - k; ++i) r /= i;
    return static_cast<std::uint64_t>(std::llround(r));
}

BinaryMatrix edges(std::size_t n, std::initializer_list<std::pair<std::size_t, std::size_t>> list) {
    BinaryMatrix a(n);
    for (auto [u, v] : list) a.set_symmetric(u, v);
    return a;
}

std::vector<std::vector<std::vector<oracle::Vec>>> oracle_kernel(const LayerParams& p) {
    std::vector<std::vector<std::vector<oracle::Vec>>> kernel(
        p.out_dim, std::vector<std::vector<oracle::Vec>>(p.k, std::vector<oracle::Vec>(p.k, oracle::Vec(p.in_dim))));
    for (std::size_t c = 0; c < p.out_dim; ++c)
        for (std::size_t i = 0; i < p.k; ++i)
            for (std::size_t j = 0; j < p.k; ++j)
                for (std::size_t f = 0; f < p.in_dim; ++f) kernel[c][i][j][f] = p.kernel((i * p.k + j) * p.in_dim + f, c);
    return kernel;
}

LayerParams random_params(std::size_t k, std::size_t fin, std::size_t fout, Rng& rng, ActivationKind act) {
    LayerParams p{k, fin, fout, fx::random_matrix(k * k * fin, fout, rng), {}, Activation{act}};
    for (std::size_t c = 0; c < fout; ++c) p.bias.push_back(rng.uniform(-1, 1));
    return p;
}

std::set<std::vector<std::size_t>> as_set(const std::vector<Candidate>& c) { return {c.begin(), c.end()}; }

}  // namespace

TEST(AttributeMatrixTest, PathOfThree) {
    Matrix x(3, 2);
    for (std::size_t i = 0; i < 3; ++i) x(i, 0) = 1.0 + i, x(i, 1) = 10.0 + i;
    const auto ar = attribute_matrix(x, edges(3, {{0, 1}, {1, 2}}));
    auto v = [&](std::size_t i, std::size_t j) { return std::vector<double>(ar.at(i, j).begin(), ar.at(i, j).end()); };
    const std::vector<double> f0{1, 10}, f1{2, 11}, f2{3, 12}, z{0, 0};
    EXPECT_EQ(v(0, 0), f0);
    EXPECT_EQ(v(0, 1), f1);
    EXPECT_EQ(v(0, 2), z);
    EXPECT_EQ(v(1, 0), f0);
    EXPECT_EQ(v(1, 1), f1);
    EXPECT_EQ(v(1, 2), f2);
    EXPECT_EQ(v(2, 0), z);
    EXPECT_EQ(v(2, 1), f1);
    EXPECT_EQ(v(2, 2), f2);
}

TEST(AttributeMatrixTest, EdgelessGraphKeepsDiagonalOnly) {
    Rng rng(1);
    const Matrix x = fx::random_matrix(5, 3, rng, 0.5, 1.0);
    const auto ar = attribute_matrix(x, BinaryMatrix(5));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            for (std::size_t f = 0; f < 3; ++f) EXPECT_EQ(ar.at(i, j)[f], i == j ? x(j, f) : 0.0);
}

TEST(AttributeMatrixTest, FourNodeExampleNonzeroPattern) {
    const auto a = edges(4, {{0, 1}, {1, 2}, {1, 3}, {2, 3}});
    Rng rng(2);
    const auto ar = attribute_matrix(fx::random_matrix(4, 2, rng, 0.5, 1.0), a);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const bool nonzero = std::any_of(ar.at(i, j).begin(), ar.at(i, j).end(), [](double x) { return x != 0; });
            EXPECT_EQ(nonzero, i == j || a(i, j));
        }
}

TEST(AttributeMatrixTest, MatchesMaskingOracle) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + rng.index(9);
        const auto a = fx::random_adjacency(n, 0.4, rng);
        const Matrix x = fx::random_matrix(n, 3, rng);
        const auto ar = attribute_matrix(x, a);
        const auto want = oracle::masked_attributes(fx::rows_of(x), a);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                EXPECT_EQ(std::vector<double>(ar.at(i, j).begin(), ar.at(i, j).end()), want[i][j]);
    }
}

TEST(AttributeMatrixTest, DimensionMismatchThrows) {
    EXPECT_THROW(attribute_matrix(Matrix(3, 2), BinaryMatrix(4)), ContractError);
}

TEST(Candidates, SeventeenChooseFourteenAndFourChooseThree) {
    EXPECT_EQ(enumerate_candidates(17, 14).size(), 680u);
    EXPECT_EQ(enumerate_candidates(4, 3).size(), 4u);
    EXPECT_EQ(enumerate_candidates(6, 6), (std::vector<Candidate>{{0, 1, 2, 3, 4, 5}}));
}

TEST(Candidates, CountsAndOrderUpToTwenty) {
    for (std::size_t n = 1; n <= 20; ++n) {
        for (std::size_t k = 1; k <= n; ++k) {
            const std::uint64_t want = factorial_binomial(n, k);
            EXPECT_EQ(binomial(n, k), want);
            if (want > 200000) continue;
            const auto all = enumerate_candidates(n, k);
            ASSERT_EQ(all.size(), want) << n << " choose " << k;
            EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
            EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());
            for (const auto& c : all) EXPECT_TRUE(std::is_sorted(c.begin(), c.end()) && c.back() < n);
        }
    }
}

TEST(Candidates, UnrankMatchesEnumeration) {
    for (std::size_t n : {5u, 9u, 12u}) {
        for (std::size_t k = 1; k <= n; ++k) {
            const auto all = enumerate_candidates(n, k);
            for (std::size_t r = 0; r < all.size(); ++r) EXPECT_EQ(unrank_candidate(n, k, r), all[r]);
            EXPECT_THROW(unrank_candidate(n, k, all.size()), ContractError);
        }
    }
}

TEST(Candidates, InvalidKThrows) {
    EXPECT_THROW(enumerate_candidates(3, 4), ContractError);
    EXPECT_THROW(enumerate_candidates(3, 0), ContractError);
}

TEST(GraphPool, EdgelessKeepsLexicographicPrefix) {
    const auto cands = enumerate_candidates(6, 3);
    const auto kept = graph_pool(BinaryMatrix(6), cands, 4, 0, 11);
    EXPECT_EQ(kept, std::vector<Candidate>(cands.begin(), cands.begin() + 4));
}

TEST(GraphPool, StarKeepsHubPairs) {
    const auto a = edges(4, {{0, 1}, {0, 2}, {0, 3}});
    const auto cands = enumerate_candidates(4, 2);
    const auto scores = candidate_scores(a, cands);
    for (std::size_t i = 0; i < cands.size(); ++i)
        EXPECT_EQ(scores[i], oracle::score(a, cands[i], cands)) << i;
    const auto kept = graph_pool(a, cands, 2, 0, 0);
    ASSERT_EQ(kept.size(), 2u);
    for (const auto& c : kept) EXPECT_EQ(c[0], 0u);
    std::uint64_t worst_hub = ~0ull, best_leaf = 0;
    for (std::size_t i = 0; i < cands.size(); ++i)
        (cands[i][0] == 0 ? worst_hub = std::min(worst_hub, scores[i]) : best_leaf = std::max(best_leaf, scores[i]));
    EXPECT_GT(worst_hub, best_leaf);
}

TEST(GraphPool, PreDropoutSizes) {
    Rng rng(4);
    const auto a = fx::random_adjacency(17, 0.2, rng);
    const auto cands = enumerate_candidates(17, 14);
    for (std::size_t s : {25u, 35u}) {
        const auto kept = graph_pool(a, cands, s, 50, 9);
        EXPECT_EQ(kept.size(), s);
        EXPECT_EQ(as_set(kept).size(), s);
        for (const auto& c : kept) EXPECT_TRUE(std::binary_search(cands.begin(), cands.end(), c));
    }
}

TEST(GraphPool, PadsByCyclingWhenShort) {
    const auto a = edges(3, {{0, 1}});
    const auto cands = enumerate_candidates(3, 2);
    const auto kept = graph_pool(a, cands, 7, 0, 0);
    ASSERT_EQ(kept.size(), 7u);
    for (std::size_t i = 3; i < 7; ++i) EXPECT_EQ(kept[i], kept[i % 3]);
}

TEST(GraphPool, MatchesBruteForceUpToEightNodes) {
    Rng rng(5);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng.index(7);
        const std::size_t k = 1 + rng.index(n);
        const std::size_t s = 1 + rng.index(binomial(n, k) + 2);
        const auto a = fx::random_adjacency(n, rng.uniform(0.1, 0.8), rng);
        EXPECT_EQ(graph_pool(a, enumerate_candidates(n, k), s, 0, trial), oracle::pool(a, k, s))
            << "n=" << n << " k=" << k << " s=" << s;
    }
}

TEST(GraphPool, SeedIndependentWhenPreDropoutCoversAll) {
    Rng rng(6);
    const auto a = fx::random_adjacency(8, 0.3, rng);
    const auto cands = enumerate_candidates(8, 5);
    const auto base = graph_pool(a, cands, 10, cands.size(), 1);
    for (std::uint64_t seed = 2; seed < 20; ++seed) EXPECT_EQ(graph_pool(a, cands, 10, cands.size() + seed, seed), base);
    EXPECT_EQ(graph_pool(a, cands, 10, 0, 77), base);
}

TEST(GraphPool, SelectCandidatesEqualsPoolOverEnumeration) {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 6 + rng.index(8);
        const std::size_t k = 1 + rng.index(n);
        const auto a = fx::random_adjacency(n, 0.3, rng);
        const auto cands = enumerate_candidates(n, k);
        const std::size_t pre = std::min<std::size_t>(cands.size(), 1 + rng.index(40));
        const std::size_t s = 1 + rng.index(pre);
        EXPECT_EQ(select_candidates(a, k, s, pre, PoolingMode::DegreeRanked, trial), graph_pool(a, cands, s, pre, trial));
    }
}

TEST(GraphPool, RandomModeIsSeededAndDistinct) {
    Rng rng(8);
    const auto a = fx::random_adjacency(17, 0.2, rng);
    const auto x = select_candidates(a, 14, 25, 50, PoolingMode::Random, 3);
    EXPECT_EQ(x, select_candidates(a, 14, 25, 50, PoolingMode::Random, 3));
    EXPECT_NE(x, select_candidates(a, 14, 25, 50, PoolingMode::Random, 4));
    EXPECT_EQ(as_set(x).size(), 25u);
}

TEST(GraphPool, RejectsSAbovePreDropout) {
    const auto cands = enumerate_candidates(5, 2);
    EXPECT_THROW(graph_pool(BinaryMatrix(5), cands, 6, 5, 0), ContractError);
    LayerConfig cfg;
    cfg.s = 6;
    cfg.pre_dropout = 5;
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(Convolve, ZeroKernelGivesActivatedBias) {
    Rng rng(9);
    const auto a = fx::random_adjacency(5, 0.5, rng);
    const auto ar = attribute_matrix(fx::random_matrix(5, 2, rng), a);
    LayerParams p{3, 2, 3, Matrix(18, 3), {-0.5, 0.25, 1.0}, Activation{ActivationKind::Relu}};
    const std::vector<std::size_t> subset{0, 2, 4};
    EXPECT_EQ(convolve_candidate(ar, subset, p), (std::vector<double>{0.0, 0.25, 1.0}));
}

TEST(Convolve, OneByOneKernelReadsFirstFeature) {
    Rng rng(10);
    const Matrix x = fx::random_matrix(4, 3, rng);
    const auto ar = attribute_matrix(x, BinaryMatrix(4));
    LayerParams p{1, 3, 1, Matrix(3, 1), {0.3}, Activation{ActivationKind::Tanh}};
    p.kernel(0, 0) = 1.0;
    const std::vector<std::size_t> subset{2};
    EXPECT_EQ(convolve_candidate(ar, subset, p), (std::vector<double>{std::tanh(x(2, 0) + 0.3)}));
}

TEST(Convolve, MatchesNestedLoopOracle) {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = fx::random_adjacency(6, 0.5, rng);
        const Matrix x = fx::random_matrix(6, 2, rng);
        const auto p = random_params(3, 2, 2, rng, ActivationKind::LeakyRelu);
        const auto ar = attribute_matrix(x, a);
        for (const auto& c : enumerate_candidates(6, 3)) {
            const auto got = convolve_candidate(ar, c, p);
            const auto want = oracle::convolve(fx::rows_of(x), a, c, oracle_kernel(p), p.bias,
                                               [&](double v) { return p.activation.apply(v); });
            for (std::size_t ch = 0; ch < 2; ++ch) EXPECT_NEAR(got[ch], want[ch], 1e-14);
        }
    }
}

TEST(NewAdjacency, ExampleCases) {
    const auto two_parts = edges(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}});
    const std::vector<Candidate> apart{{0, 1}, {4, 5}};
    EXPECT_FALSE(new_adjacency(apart, two_parts)(0, 1));
    const std::vector<Candidate> shared{{0, 1}, {1, 5}};
    EXPECT_TRUE(new_adjacency(shared, BinaryMatrix(6))(0, 1));
    const std::vector<Candidate> linked{{0, 1}, {2, 3}};
    EXPECT_TRUE(new_adjacency(linked, two_parts)(0, 1));

    const auto connected = edges(4, {{0, 1}, {1, 2}, {2, 3}});
    const auto kept = graph_pool(connected, enumerate_candidates(4, 3), 4, 0, 0);
    const auto complete = new_adjacency(kept, connected);
    for (std::size_t p = 0; p < 4; ++p)
        for (std::size_t q = 0; q < 4; ++q) EXPECT_EQ(complete(p, q), p != q);
}

TEST(NewAdjacency, SymmetricZeroDiagonalAndLiteralRule) {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + rng.index(8);
        const std::size_t k = 1 + rng.index(n);
        const auto a = fx::random_adjacency(n, 0.25, rng);
        const auto kept = select_candidates(a, k, 1 + rng.index(8), 0, PoolingMode::Random, trial);
        const auto out = new_adjacency(kept, a);
        EXPECT_TRUE(out.is_symmetric());
        EXPECT_TRUE(out.has_zero_diagonal());
        for (std::size_t p = 0; p < kept.size(); ++p)
            for (std::size_t q = 0; q < kept.size(); ++q) {
                if (p == q) continue;
                bool want = false;
                for (auto u : kept[p])
                    for (auto v : kept[q]) want = want || u == v || a(u, v);
                EXPECT_EQ(out(p, q), want);
            }
    }
    EXPECT_THROW(new_adjacency({}, BinaryMatrix(3)), ContractError);
}

TEST(LayerForward, WholeGraphWhenKEqualsN) {
    Rng rng(13);
    const auto a = fx::random_adjacency(5, 0.5, rng);
    LayerConfig cfg{5, 1, 0, PoolingMode::DegreeRanked, 2, Activation{ActivationKind::Relu}, 0};
    const auto p = random_params(5, 3, 2, rng, ActivationKind::Relu);
    const auto out = layer_forward(fx::random_matrix(5, 3, rng), a, cfg, p);
    EXPECT_EQ(out.node_features.rows(), 1u);
    EXPECT_EQ(out.adjacency, BinaryMatrix(1));
    EXPECT_EQ(out.provenance, (std::vector<Candidate>{{0, 1, 2, 3, 4}}));
}

TEST(LayerForward, FourNodesThreeKernelGivesFourOutputs) {
    Rng rng(14);
    const auto a = edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    LayerConfig cfg{3, 4, 0, PoolingMode::DegreeRanked, 2, Activation{ActivationKind::Relu}, 0};
    const auto out = layer_forward(fx::random_matrix(4, 2, rng), a, cfg, random_params(3, 2, 2, rng, ActivationKind::Relu));
    EXPECT_EQ(out.node_features.rows(), 4u);
    EXPECT_EQ(as_set(out.provenance), as_set(enumerate_candidates(4, 3)));
}

TEST(LayerForward, EqualsComposedOperationOracles) {
    Rng rng(15);
    const auto a = fx::random_adjacency(17, 0.2, rng);
    const Matrix x = fx::random_matrix(17, 3, rng);
    LayerConfig cfg{14, 25, 50, PoolingMode::DegreeRanked, 4, Activation{ActivationKind::Relu}, 1234};
    const auto p = random_params(14, 3, 4, rng, ActivationKind::Relu);
    reset_layer_counters();
    const auto out = layer_forward(x, a, cfg, p, "layer 0");
    EXPECT_EQ(layer_counters().convolutions, 25u);
    EXPECT_EQ(layer_counters().scored_candidates, 50u);

    const auto kept = graph_pool(a, enumerate_candidates(17, 14), 25, 50, cfg.seed);
    EXPECT_EQ(out.provenance, kept);
    const auto kernel = oracle_kernel(p);
    ASSERT_EQ(out.node_features.rows(), 25u);
    for (std::size_t r = 0; r < kept.size(); ++r) {
        const auto want = oracle::convolve(fx::rows_of(x), a, kept[r], kernel, p.bias,
                                           [](double v) { return std::max(v, 0.0); });
        for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(out.node_features(r, c), want[c], 1e-12);
    }
    EXPECT_EQ(out.adjacency, new_adjacency(kept, a));
}

TEST(LayerForward, ConvolutionCountFollowsS) {
    Rng rng(16);
    const auto a = fx::random_adjacency(17, 0.2, rng);
    const Matrix x = fx::random_matrix(17, 2, rng);
    for (std::size_t s : {1u, 5u, 25u, 35u}) {
        LayerConfig cfg{14, s, 50, PoolingMode::DegreeRanked, 2, Activation{ActivationKind::Relu}, 5};
        reset_layer_counters();
        layer_forward(x, a, cfg, random_params(14, 2, 2, rng, ActivationKind::Relu));
        EXPECT_EQ(layer_counters().convolutions, s);
    }
}

TEST(LayerForward, DeterministicGivenSeed) {
    Rng rng(17);
    const auto a = fx::random_adjacency(12, 0.3, rng);
    const Matrix x = fx::random_matrix(12, 2, rng);
    const auto p = random_params(6, 2, 3, rng, ActivationKind::Relu);
    LayerConfig cfg{6, 10, 40, PoolingMode::DegreeRanked, 3, Activation{ActivationKind::Relu}, 99};
    const auto first = layer_forward(x, a, cfg, p);
    const auto second = layer_forward(x, a, cfg, p);
    EXPECT_EQ(first.provenance, second.provenance);
    EXPECT_EQ(fx::flat(first.node_features), fx::flat(second.node_features));
}

TEST(LayerForward, TooFewNodesNamesTheLayer) {
    LayerConfig cfg{5, 1, 0, PoolingMode::DegreeRanked, 2, Activation{}, 0};
    Rng rng(18);
    try {
        layer_forward(Matrix(4, 2), BinaryMatrix(4), cfg, random_params(5, 2, 2, rng, ActivationKind::Relu), "layer 2");
        FAIL() << "expected ContractError";
    } catch (const ContractError& e) {
        EXPECT_NE(std::string(e.what()).find("layer 2"), std::string::npos) << e.what();
    }
}

TEST(LayerGradients, KernelAndBiasMatchFiniteDifferences) {
    Rng rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 5 + rng.index(3);
        const auto a = fx::random_adjacency(n, 0.4, rng);
        const Matrix x = fx::random_matrix(n, 2, rng);
        LayerConfig cfg{3, 4, 0, PoolingMode::DegreeRanked, 3, Activation{ActivationKind::Tanh}, 0};
        const auto plan = plan_layer(a, cfg);
        ParameterStore store;
        store.add("kernel", {9 * 2, 3}, fx::random_matrix(18, 3, rng));
        store.add("bias", {3}, fx::random_matrix(1, 3, rng));
        const Matrix probe = fx::random_matrix(3, 1, rng);
        auto loss_of = [&](Tape& tape) {
            const Var y = layer_apply(tape.constant(x), tape.parameter(store, 0), tape.parameter(store, 1), plan,
                                      cfg.activation);
            return matmul(reduce_rows(y, Pool::Mean), tape.constant(probe));
        };
        auto grads = store.zero_gradients();
        {
            Tape tape;
            tape.backward(loss_of(tape), grads);
        }
        std::vector<double*> ptrs;
        std::vector<double> analytic;
        for (std::size_t p = 0; p < store.size(); ++p)
            for (std::size_t i = 0; i < store.at(p).value.size(); ++i) {
                ptrs.push_back(&store.at(p).value[i]);
                analytic.push_back(grads[p][i]);
            }
        const auto numeric = fx::central_differences(
            [&] {
                Tape t;
                return loss_of(t).value()[0];
            },
            ptrs, 1e-6);
        for (std::size_t i = 0; i < numeric.size(); ++i)
            EXPECT_LT(fx::relative_error(analytic[i], numeric[i], 1e-4), 1e-5) << i;
    }
}
