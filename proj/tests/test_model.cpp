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
#include "sgcnn/model.hpp"
#include "sgcnn/synth.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace sgcnn;

namespace {

std::size_t pooled_paths(const TargetSubgraph& sub, std::size_t d) {
    std::size_t total = 0;
    for (auto a : sub.node_indices()) total += enumerate_paths(sub, a, d).size();
    return total;
}

ModelConfig toy_config(const TargetSubgraph& sub) {
    ModelConfig cfg;
    cfg.aggregation.depths = {1, 2};
    cfg.aggregation.samples = {sub.size(), std::max<std::size_t>(1, pooled_paths(sub, 2))};
    cfg.aggregation.activation = Activation{ActivationKind::Tanh};
    cfg.layers = {{.k = 3, .s = 20, .pre_dropout = 0, .out_dim = 4, .activation = Activation{ActivationKind::Tanh}},
                  {.k = 2, .s = 1, .pre_dropout = 0, .out_dim = 3,
                   .activation = Activation{ActivationKind::LeakyRelu, 0.2}}};
    cfg.classifier.num_classes = 3;
    cfg.seed = 42;
    return cfg;
}

std::vector<std::vector<std::vector<oracle::Vec>>> kernel_of(const Matrix& w, std::size_t k, std::size_t fin) {
    const std::size_t fout = w.cols();
    std::vector<std::vector<std::vector<oracle::Vec>>> kernel(
        fout, std::vector<std::vector<oracle::Vec>>(k, std::vector<oracle::Vec>(k, oracle::Vec(fin))));
    for (std::size_t c = 0; c < fout; ++c)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                for (std::size_t f = 0; f < fin; ++f) kernel[c][i][j][f] = w((i * k + j) * fin + f, c);
    return kernel;
}

BinaryMatrix literal_adjacency(const std::vector<std::vector<std::size_t>>& kept, const BinaryMatrix& a) {
    BinaryMatrix out(kept.size());
    for (std::size_t p = 0; p < kept.size(); ++p)
        for (std::size_t q = 0; q < kept.size(); ++q) {
            if (p == q) continue;
            for (auto u : kept[p])
                for (auto v : kept[q])
                    if (u == v || a(u, v)) out.set(p, q);
        }
    return out;
}

Dataset small_dataset(std::size_t per_class, std::uint64_t seed, std::size_t classes = 3) {
    SynthConfig s;
    s.num_classes = classes;
    s.samples_per_class = per_class;
    s.subgraph_size = 8;
    s.seed = seed;
    return embed_dataset(generate(s), EmbedderConfig{});
}

ModelConfig small_config(std::size_t classes = 3) {
    ModelConfig cfg;
    cfg.aggregation.depths = {1};
    cfg.aggregation.samples = {8};
    cfg.layers = {{.k = 5, .s = 6, .pre_dropout = 20, .out_dim = 8},
                  {.k = 3, .s = 1, .pre_dropout = 0, .out_dim = 8, .activation = Activation{ActivationKind::LeakyRelu, 0.2}}};
    cfg.classifier.num_classes = classes;
    cfg.seed = 3;
    return cfg;
}

}  // namespace

TEST(ModelForward, SixLogitsForDefaultSample) {
    SynthConfig s;
    s.samples_per_class = 1;
    const auto data = embed_dataset(generate(s), EmbedderConfig{});
    Model model(default_model_config(3), 16);
    for (const auto& sample : data) {
        ASSERT_EQ(sample.size(), 17u);
        const auto z = model.logits(sample);
        EXPECT_EQ(z.size(), 6u);
        for (double v : z) EXPECT_TRUE(std::isfinite(v));
        EXPECT_EQ(model.embedding(sample).size(), 16u);
    }
}

TEST(ModelForward, ZeroClassifierWeightGivesBias) {
    Rng rng(1);
    auto g = fx::random_graph(12, 0.3, 4, rng);
    auto sub = fx::first_nodes(g, 8);
    auto cfg = small_config();
    Model model(cfg, 4);
    auto& params = model.params();
    for (double& x : params.at(params.index("classifier/weight")).value.values()) x = 0.0;
    auto& bias = params.at(params.index("classifier/bias")).value;
    bias(0, 0) = 0.5, bias(0, 1) = -1.0, bias(0, 2) = 2.0;
    EXPECT_EQ(model.logits(sub), (std::vector<double>{0.5, -1.0, 2.0}));
}

TEST(ModelForward, EqualsComposedModuleOracles) {
    Rng rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        auto g = fx::random_graph(10, 0.35, 3, rng);
        auto sub = fx::first_nodes(g, 6);
        const auto cfg = toy_config(sub);
        Model model(cfg, 3);
        const auto& ps = model.params();
        for (std::size_t i = 0; i < ps.size(); ++i)
            if (ps.at(i).name.ends_with("bias") || ps.at(i).name.ends_with("/b"))
                for (double& x : model.params().at(i).value.values()) x = rng.uniform(-0.5, 0.5);

        // Aggregation: exhaustive path sets, mean over paths and depths.
        std::vector<std::size_t> targets(sub.node_indices().begin(), sub.node_indices().end());
        oracle::Vec xn(3, 0.0);
        for (std::size_t d : cfg.aggregation.depths) {
            const auto& w = ps.at(ps.index("aggregation/d" + std::to_string(d) + "/w")).value;
            const auto& b = ps.at(ps.index("aggregation/d" + std::to_string(d) + "/b")).value;
            std::vector<std::vector<oracle::Vec>> rows;
            for (auto a : targets)
                for (const auto& path : oracle::paths(*g, targets, a, d)) {
                    std::vector<oracle::Vec> r;
                    for (auto v : path) r.push_back(g->node(v).features);
                    rows.push_back(r);
                }
            if (rows.empty()) rows.assign(1, std::vector<oracle::Vec>(d, oracle::Vec(3, 0.0)));
            const auto x = oracle::aggregate_depth(rows, fx::flat(w), fx::flat(b), false,
                                                   [](double v) { return std::tanh(v); });
            for (int f = 0; f < 3; ++f) xn[f] += x[f] / 2.0;
        }
        std::vector<oracle::Vec> features;
        for (auto v : targets) {
            auto row = g->node(v).features;
            row.insert(row.end(), xn.begin(), xn.end());
            features.push_back(row);
        }
        BinaryMatrix a = adjacency_matrix(sub);

        std::size_t fin = 6;
        for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
            const auto& layer = cfg.layers[i];
            const auto kernel = kernel_of(ps.at(ps.index("layer" + std::to_string(i) + "/kernel")).value, layer.k, fin);
            const auto bias = fx::flat(ps.at(ps.index("layer" + std::to_string(i) + "/bias")).value);
            const auto kept = oracle::pool(a, layer.k, layer.s);
            std::vector<oracle::Vec> next;
            for (const auto& c : kept)
                next.push_back(oracle::convolve(features, a, c, kernel, bias,
                                                [&](double v) { return layer.activation.apply(v); }));
            a = literal_adjacency(kept, a);
            features = next;
            fin = layer.out_dim;
        }
        ASSERT_EQ(features.size(), 1u);
        const auto& w = ps.at(ps.index("classifier/weight")).value;
        const auto& b = ps.at(ps.index("classifier/bias")).value;
        const auto got = model.logits(sub);
        for (std::size_t c = 0; c < 3; ++c) {
            double z = b(0, c);
            for (std::size_t f = 0; f < fin; ++f) z += features[0][f] * w(f, c);
            EXPECT_NEAR(got[c], z, 1e-12);
        }
        EXPECT_EQ(model.embedding(sub).size(), 3u);
    }
}

TEST(ModelForward, GradientsMatchFiniteDifferences) {
    Rng rng(3);
    for (int trial = 0; trial < 3; ++trial) {
        auto g = fx::random_graph(10, 0.35, 2, rng);
        auto sub = fx::first_nodes(g, 6);
        auto cfg = toy_config(sub);
        cfg.layers[1].activation = Activation{ActivationKind::Softplus};
        cfg.seed = trial;
        Model model(cfg, 2);
        const auto plan = model.plan(sub);
        auto loss_of = [&] {
            Tape tape;
            return softmax_cross_entropy(model.forward(tape, plan).logits, 1).value()[0];
        };
        auto grads = model.params().zero_gradients();
        {
            Tape tape;
            tape.backward(softmax_cross_entropy(model.forward(tape, plan).logits, 1), grads);
        }
        std::vector<double*> ptrs;
        std::vector<double> analytic;
        for (std::size_t p = 0; p < model.params().size(); ++p)
            for (std::size_t i = 0; i < model.params().at(p).value.size(); ++i) {
                ptrs.push_back(&model.params().at(p).value[i]);
                analytic.push_back(grads[p][i]);
            }
        const auto numeric = fx::central_differences(loss_of, ptrs, 1e-6);
        for (std::size_t i = 0; i < numeric.size(); ++i)
            EXPECT_LT(fx::relative_error(analytic[i], numeric[i], 1e-4), 1e-5) << i;
    }
}

TEST(ModelConfigTest, LayerChainingRejectedAtBuild) {
    auto cfg = small_config();
    cfg.layers[0].s = 2;
    try {
        Model model(cfg, 4);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
    }
    cfg = small_config();
    cfg.layers.clear();
    EXPECT_THROW(Model(cfg, 4), ConfigError);
    cfg = small_config();
    cfg.classifier.num_classes = 1;
    EXPECT_THROW(Model(cfg, 4), ConfigError);
    EXPECT_THROW(default_model_config(5), ConfigError);
}

TEST(ModelConfigTest, SampleSmallerThanFirstKernel) {
    Rng rng(4);
    auto g = fx::random_graph(6, 0.5, 4, rng);
    Model model(small_config(), 4);
    try {
        model.logits(fx::first_nodes(g, 4));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos) << e.what();
    }
}

TEST(ModelConfigTest, DefaultArchitectures) {
    const auto three = default_model_config(3);
    ASSERT_EQ(three.layers.size(), 2u);
    EXPECT_EQ(three.aggregation.depths, (std::vector<std::size_t>{1}));
    EXPECT_EQ(three.layers[0].k, 14u);
    EXPECT_EQ(three.layers[0].s, 25u);
    EXPECT_EQ(three.layers[0].pre_dropout, 50u);
    EXPECT_EQ(three.layers[1].k, 5u);
    EXPECT_EQ(three.layers[1].s, 1u);
    EXPECT_EQ(three.layers[1].activation.kind, ActivationKind::LeakyRelu);
    EXPECT_EQ(three.layers[0].activation.kind, ActivationKind::Relu);
    const auto four = default_model_config(4);
    ASSERT_EQ(four.layers.size(), 3u);
    EXPECT_EQ(four.layers[1].k, 2u);
}

TEST(Training, HistoryHasOneRowPerEpoch) {
    const auto data = small_dataset(10, 1);
    const auto idx = split(data, 0.8, 5);
    Model model(small_config(), 16);
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 8;
    std::size_t calls = 0;
    const auto result = train(model, subset(data, idx.train), subset(data, idx.test), tc,
                              [&](const EpochMetrics& m) { EXPECT_EQ(m.epoch, ++calls); });
    ASSERT_EQ(result.history.size(), 3u);
    EXPECT_EQ(calls, 3u);
    for (const auto& m : result.history) {
        EXPECT_TRUE(std::isfinite(m.train_loss));
        EXPECT_GE(m.test_accuracy, 0.0);
        EXPECT_LE(m.test_accuracy, 1.0);
    }
    EXPECT_EQ(result.optimizer.steps(), 3u * 3u);
}

TEST(Training, EmptySplitIsConfigError) {
    const auto data = small_dataset(2, 1);
    Model model(small_config(), 16);
    EXPECT_THROW(train(model, {}, data, TrainConfig{}), ConfigError);
    EXPECT_THROW(train(model, data, {}, TrainConfig{}), ConfigError);
    TrainConfig bad;
    bad.batch_size = 0;
    EXPECT_THROW(train(model, data, data, bad), ConfigError);
}

TEST(Training, DeterministicAcrossRunsAndThreadCounts) {
    const auto data = small_dataset(8, 2);
    const auto idx = split(data, 0.8, 1);
    const auto tr = subset(data, idx.train), te = subset(data, idx.test);
    auto run = [&](std::size_t threads) {
        Model model(small_config(), 16);
        TrainConfig tc;
        tc.epochs = 3;
        tc.batch_size = 5;
        tc.threads = threads;
        std::vector<double> losses;
        for (const auto& m : train(model, tr, te, tc).history) losses.push_back(m.train_loss);
        losses.push_back(model.logits(te[0])[0]);
        return losses;
    };
    const auto base = run(1);
    EXPECT_EQ(run(1), base);
    EXPECT_EQ(run(3), base);
}

TEST(Training, LossDecreasesOnSmallSet) {
    const auto data = small_dataset(6, 3);
    Model model(small_config(), 16);
    TrainConfig tc;
    tc.epochs = 25;
    tc.batch_size = 6;
    const auto h = train(model, data, data, tc).history;
    EXPECT_LT(h.back().train_loss, h.front().train_loss);
}

TEST(Evaluation, ConstantPredictorScoresOneOverC) {
    const auto data = small_dataset(5, 4);
    Model model(small_config(), 16);
    for (double& x : model.params().at(model.params().index("classifier/weight")).value.values()) x = 0.0;
    model.params().at(model.params().index("classifier/bias")).value(0, 2) = 1.0;
    const auto r = evaluate(model, data);
    EXPECT_DOUBLE_EQ(r.accuracy, 1.0 / 3.0);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(r.confusion[t], (std::vector<std::size_t>{0, 0, 5}));
}

TEST(Evaluation, AccuracyMatchesPredictionRecount) {
    const auto data = small_dataset(10, 5);
    Model model(small_config(), 16);
    TrainConfig tc;
    tc.epochs = 4;
    train(model, data, data, tc);
    const auto r = evaluate(model, data, 2);
    ASSERT_EQ(r.predictions.size(), data.size());
    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < r.predictions.size(); ++i) {
        const auto& p = r.predictions[i];
        EXPECT_EQ(p.sample_index, i);
        EXPECT_EQ(p.label, *data[i].label());
        EXPECT_EQ(p.predicted, argmax(p.logits));
        correct += static_cast<int>(p.predicted) == p.label;
    }
    for (const auto& row : r.confusion)
        for (auto c : row) total += c;
    EXPECT_EQ(total, data.size());
    EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(correct) / data.size());
    EXPECT_EQ(evaluate(model, data, 1).predictions.back().logits, r.predictions.back().logits);
}

TEST(Evaluation, LabelOutOfRangeIsConfigError) {
    auto data = small_dataset(2, 6, 4);
    Model model(small_config(3), 16);
    EXPECT_THROW(evaluate(model, data), ConfigError);
}

TEST(Embedding, NoNeighboursWhenKIsZero) {
    const auto data = small_dataset(3, 7);
    Model model(small_config(), 16);
    const auto r = embed(model, data, 0);
    ASSERT_EQ(r.embeddings.size(), data.size());
    for (const auto& n : r.neighbors) EXPECT_TRUE(n.empty());
    for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(r.embeddings[i], model.embedding(data[i]));
}

TEST(Embedding, DuplicateIsNearestAtDistanceZero) {
    auto data = small_dataset(3, 8);
    data.push_back(data[4]);
    Model model(small_config(), 16);
    const auto r = embed(model, data, 3);
    ASSERT_EQ(r.neighbors[4].size(), 3u);
    EXPECT_EQ(r.neighbors[4][0].index, data.size() - 1);
    EXPECT_EQ(r.neighbors[4][0].distance, 0.0);
    EXPECT_EQ(r.neighbors.back()[0].index, 4u);
    for (const auto& list : r.neighbors)
        for (std::size_t j = 1; j < list.size(); ++j) {
            EXPECT_LE(list[j - 1].distance, list[j].distance);
            if (list[j - 1].distance == list[j].distance) {
                EXPECT_LT(list[j - 1].index, list[j].index);
            }
        }
}

TEST(Embedding, IsomorphicSamplesEmbedIdentically) {
    SynthConfig s;
    s.samples_per_class = 2;
    const auto data = embed_dataset(generate(s), EmbedderConfig{});
    Model model(default_model_config(3), 16);
    Rng rng(9);
    for (std::size_t i = 0; i < data.size(); i += 3) {
        const auto& sample = data[i];
        const auto perm = fx::random_permutation(sample.host().node_count(), rng);
        auto host = fx::permuted(sample.host(), perm);
        std::vector<std::size_t> targets;
        for (auto v : sample.node_indices()) targets.push_back(perm[v]);
        const TargetSubgraph twin(host, targets, sample.label());
        EXPECT_EQ(model.embedding(twin), model.embedding(sample)) << i;
    }
}
