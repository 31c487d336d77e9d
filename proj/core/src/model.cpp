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

#include "sgcnn/model.hpp"

#include "sgcnn/errors.hpp"
#include "sgcnn/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

namespace sgcnn {

Readout parse_readout(std::string_view text) {
    if (text == "mean") return Readout::Mean;
    if (text == "max") return Readout::Max;
    if (text == "concat-flatten") return Readout::ConcatFlatten;
    throw ConfigError("unknown readout '" + std::string(text) + "'");
}

std::string to_string(Readout readout) {
    switch (readout) {
        case Readout::Mean:
            return "mean";
        case Readout::Max:
            return "max";
        case Readout::ConcatFlatten:
            return "concat-flatten";
    }
    return "mean";
}

void validate(const ModelConfig& cfg) {
    validate(cfg.aggregation);
    if (cfg.layers.empty()) throw ConfigError("model: at least one SGCNN layer is required");
    if (cfg.classifier.num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
        try {
            validate(cfg.layers[i]);
        } catch (const ConfigError& e) {
            throw ConfigError("layer " + std::to_string(i) + ": " + e.what());
        }
        if (i > 0 && cfg.layers[i].k > cfg.layers[i - 1].s) {
            throw ConfigError("layer " + std::to_string(i) + ": k=" + std::to_string(cfg.layers[i].k) +
                              " exceeds the " + std::to_string(cfg.layers[i - 1].s) +
                              " nodes produced by layer " + std::to_string(i - 1));
        }
    }
}

void validate_for_input(const ModelConfig& cfg, std::size_t input_nodes) {
    validate(cfg);
    if (cfg.layers.front().k > input_nodes) {
        throw ConfigError("layer 0: k=" + std::to_string(cfg.layers.front().k) + " exceeds the " +
                          std::to_string(input_nodes) + " nodes of the input subgraph");
    }
}

ModelConfig default_model_config(std::size_t layers, std::size_t num_classes) {
    if (layers != 3 && layers != 4) throw ConfigError("default architecture exists for 3 or 4 layers only");
    ModelConfig cfg;
    cfg.aggregation.depths = {1};
    cfg.aggregation.samples = {17};
    cfg.aggregation.activation = {ActivationKind::Relu};
    const Activation relu{ActivationKind::Relu};
    const Activation leaky{ActivationKind::LeakyRelu, 0.2};
    cfg.layers.push_back({.k = 14, .s = 25, .pre_dropout = 50, .pooling = PoolingMode::DegreeRanked,
                          .out_dim = 16, .activation = relu, .seed = 0});
    if (layers == 4) {
        cfg.layers.push_back({.k = 2, .s = 25, .pre_dropout = 50, .pooling = PoolingMode::DegreeRanked,
                              .out_dim = 16, .activation = relu, .seed = 0});
    }
    cfg.layers.push_back({.k = 5, .s = 1, .pre_dropout = 50, .pooling = PoolingMode::DegreeRanked,
                          .out_dim = 16, .activation = leaky, .seed = 0});
    cfg.classifier.num_classes = num_classes;
    return cfg;
}

namespace {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.values()) x = rng.uniform(-bound, bound);
    return m;
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i, std::size_t{0});
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < count; i += threads) fn(i, t);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

std::size_t resolve_threads(std::size_t threads) {
    return threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
}

}  // namespace

Model::Model(ModelConfig cfg, std::size_t feature_dim) : cfg_(std::move(cfg)), feature_dim_(feature_dim) {
    validate(cfg_);
    if (feature_dim_ == 0) throw ConfigError("model: feature dimension must be >= 1");
    cfg_.aggregation.seed = derive_seed(cfg_.seed, "aggregation");
    for (std::size_t i = 0; i < cfg_.layers.size(); ++i) {
        cfg_.layers[i].seed = derive_seed(cfg_.seed, "layer/" + std::to_string(i));
    }
    Rng rng(derive_seed(cfg_.seed, "init"));

    for (std::size_t d : cfg_.aggregation.depths) {
        const std::string prefix = "aggregation/d" + std::to_string(d);
        Matrix w(1, d);
        for (double& x : w.values()) x = rng.uniform(0.5, 1.5) / static_cast<double>(d);
        const auto wi = params_.add(prefix + "/w", {d}, std::move(w));
        const auto bi = params_.add(prefix + "/b", {feature_dim_}, Matrix(1, feature_dim_));
        depth_params_.emplace_back(wi, bi);
    }

    std::size_t in_dim = 2 * feature_dim_;
    for (std::size_t i = 0; i < cfg_.layers.size(); ++i) {
        const auto& layer = cfg_.layers[i];
        const std::string prefix = "layer" + std::to_string(i);
        const std::size_t fan_in = layer.k * layer.k * in_dim;
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + layer.out_dim));
        const auto ki = params_.add(prefix + "/kernel", {layer.k, layer.k, in_dim, layer.out_dim},
                                    uniform_matrix(fan_in, layer.out_dim, bound, rng));
        const auto bi = params_.add(prefix + "/bias", {layer.out_dim}, Matrix(1, layer.out_dim));
        layer_params_.emplace_back(ki, bi);
        in_dim = layer.out_dim;
    }

    const std::size_t emb = embedding_dim();
    const std::size_t classes = cfg_.classifier.num_classes;
    const double bound = std::sqrt(6.0 / static_cast<double>(emb + classes));
    classifier_weight_ = params_.add("classifier/weight", {emb, classes}, uniform_matrix(emb, classes, bound, rng));
    classifier_bias_ = params_.add("classifier/bias", {classes}, Matrix(1, classes));
}

std::size_t Model::embedding_dim() const {
    const auto& last = cfg_.layers.back();
    if (cfg_.classifier.readout == Readout::ConcatFlatten) return last.s * last.out_dim;
    return last.out_dim;
}

SamplePlan Model::plan(const TargetSubgraph& sample) const {
    validate_for_input(cfg_, sample.size());
    if (sample.host().feature_dim() != feature_dim_) {
        throw ContractError("sample features have dimension " + std::to_string(sample.host().feature_dim()) +
                            ", model expects " + std::to_string(feature_dim_));
    }
    SamplePlan plan;
    plan.aggregation = plan_aggregation(sample, cfg_.aggregation);
    BinaryMatrix adjacency = adjacency_matrix(sample);
    for (std::size_t i = 0; i < cfg_.layers.size(); ++i) {
        plan.layers.push_back(plan_layer(adjacency, cfg_.layers[i], "layer " + std::to_string(i)));
        adjacency = plan.layers.back().out_adjacency;
    }
    return plan;
}

Model::Output Model::forward(Tape& tape, const SamplePlan& plan) const {
    std::vector<DepthVars> depth_vars;
    depth_vars.reserve(depth_params_.size());
    for (auto [w, b] : depth_params_) depth_vars.push_back({tape.parameter(params_, w), tape.parameter(params_, b)});
    Var x = augment(tape, plan.aggregation, neighbor_feature(plan.aggregation, depth_vars, cfg_.aggregation));
    for (std::size_t i = 0; i < cfg_.layers.size(); ++i) {
        const auto [k, b] = layer_params_[i];
        x = layer_apply(x, tape.parameter(params_, k), tape.parameter(params_, b), plan.layers[i],
                        cfg_.layers[i].activation);
    }
    Var emb = x;
    if (x.value().rows() != 1 || cfg_.classifier.readout == Readout::ConcatFlatten) {
        switch (cfg_.classifier.readout) {
            case Readout::Mean:
                emb = reduce_rows(x, Pool::Mean);
                break;
            case Readout::Max:
                emb = reduce_rows(x, Pool::Max);
                break;
            case Readout::ConcatFlatten:
                emb = flatten(x);
                break;
        }
    }
    Var logits = add(matmul(emb, tape.parameter(params_, classifier_weight_)),
                     tape.parameter(params_, classifier_bias_));
    return {logits, emb};
}

std::vector<double> Model::logits(const TargetSubgraph& sample) const {
    const SamplePlan p = plan(sample);
    Tape tape;
    const Matrix& z = forward(tape, p).logits.value();
    return {z.values().begin(), z.values().end()};
}

std::vector<double> Model::embedding(const TargetSubgraph& sample) const {
    const SamplePlan p = plan(sample);
    Tape tape;
    const Matrix& e = forward(tape, p).embedding.value();
    return {e.values().begin(), e.values().end()};
}

Dataset embed_dataset(const Dataset& dataset, const EmbedderConfig& cfg) {
    std::map<const AttributedGraph*, std::shared_ptr<const AttributedGraph>> done;
    Dataset out;
    out.reserve(dataset.size());
    for (const auto& sample : dataset) {
        auto& slot = done[&sample.host()];
        if (!slot) slot = std::make_shared<const AttributedGraph>(embed_graph(sample.host(), cfg));
        out.push_back(sample.rehosted(slot));
    }
    return out;
}

void validate(const TrainConfig& cfg) {
    validate(cfg.optimizer);
    if (cfg.batch_size == 0) throw ConfigError("batch size must be >= 1");
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

namespace {

std::size_t checked_label(const TargetSubgraph& sample, std::size_t classes, std::size_t index) {
    if (!sample.label() || *sample.label() < 0 || static_cast<std::size_t>(*sample.label()) >= classes) {
        throw ConfigError("sample " + std::to_string(index) + " has a missing or out-of-range label for " +
                          std::to_string(classes) + " classes");
    }
    return static_cast<std::size_t>(*sample.label());
}

std::vector<SamplePlan> plan_all(const Model& model, const Dataset& data) {
    std::vector<SamplePlan> plans;
    plans.reserve(data.size());
    for (const auto& s : data) plans.push_back(model.plan(s));
    return plans;
}

std::vector<std::vector<double>> all_logits(const Model& model, std::span<const SamplePlan> plans,
                                            std::size_t threads) {
    std::vector<std::vector<double>> out(plans.size());
    parallel_for(plans.size(), threads, [&](std::size_t i, std::size_t) {
        Tape tape;
        const Matrix& z = model.forward(tape, plans[i]).logits.value();
        out[i].assign(z.values().begin(), z.values().end());
    });
    return out;
}

double accuracy_of(const Model& model, std::span<const SamplePlan> plans, std::span<const std::size_t> labels,
                   std::size_t threads) {
    const auto logits = all_logits(model, plans, threads);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) correct += argmax(logits[i]) == labels[i] ? 1 : 0;
    return logits.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(logits.size());
}

}  // namespace

TrainResult train(Model& model, const Dataset& train_set, const Dataset& test_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    validate(cfg);
    if (train_set.empty()) throw ConfigError("training split is empty");
    if (test_set.empty()) throw ConfigError("test split is empty");
    const std::size_t classes = model.config().classifier.num_classes;
    std::vector<std::size_t> train_labels;
    std::vector<std::size_t> test_labels;
    for (std::size_t i = 0; i < train_set.size(); ++i) train_labels.push_back(checked_label(train_set[i], classes, i));
    for (std::size_t i = 0; i < test_set.size(); ++i) test_labels.push_back(checked_label(test_set[i], classes, i));

    const auto train_plans = plan_all(model, train_set);
    const auto test_plans = plan_all(model, test_set);
    const std::size_t threads = resolve_threads(cfg.threads);

    TrainResult result{{}, Optimizer(cfg.optimizer, model.params())};
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    GradientSet batch_grad = model.params().zero_gradients();
    std::vector<GradientSet> sample_grads(std::min(threads, cfg.batch_size), model.params().zero_gradients());
    std::vector<double> losses(train_set.size());
    std::vector<std::uint8_t> hits(train_set.size());

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
            const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
            for (auto& g : batch_grad) g.fill(0.0);
            for (std::size_t c0 = b0; c0 < b1; c0 += sample_grads.size()) {
                const std::size_t c1 = std::min(b1, c0 + sample_grads.size());
                parallel_for(c1 - c0, threads, [&](std::size_t j, std::size_t) {
                    const std::size_t idx = order[c0 + j];
                    GradientSet& g = sample_grads[j];
                    for (auto& m : g) m.fill(0.0);
                    Tape tape;
                    const auto out = model.forward(tape, train_plans[idx]);
                    const Var loss = softmax_cross_entropy(out.logits, train_labels[idx]);
                    losses[idx] = loss.value()[0];
                    hits[idx] = argmax(out.logits.value().values()) == train_labels[idx] ? 1 : 0;
                    tape.backward(loss, g);
                });
                for (std::size_t j = 0; j < c1 - c0; ++j) add_into(batch_grad, sample_grads[j]);
            }
            const double inv = 1.0 / static_cast<double>(b1 - b0);
            for (auto& g : batch_grad) {
                for (double& x : g.values()) x *= inv;
            }
            result.optimizer.step(model.params(), batch_grad);
        }
        EpochMetrics m;
        m.epoch = epoch;
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < losses.size(); ++i) {
            loss_sum += losses[i];
            correct += hits[i];
        }
        m.train_loss = loss_sum / static_cast<double>(losses.size());
        m.train_accuracy = static_cast<double>(correct) / static_cast<double>(losses.size());
        m.test_accuracy = accuracy_of(model, test_plans, test_labels, threads);
        m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.history.push_back(m);
        if (on_epoch) on_epoch(m);
    }
    return result;
}

EvalResult evaluate(const Model& model, const Dataset& dataset, std::size_t threads) {
    const std::size_t classes = model.config().classifier.num_classes;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < dataset.size(); ++i) labels.push_back(checked_label(dataset[i], classes, i));
    const auto plans = plan_all(model, dataset);
    auto logits = all_logits(model, plans, resolve_threads(threads));
    EvalResult r;
    r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        Prediction p;
        p.sample_index = i;
        p.label = static_cast<int>(labels[i]);
        p.predicted = argmax(logits[i]);
        p.logits = std::move(logits[i]);
        ++r.confusion[labels[i]][p.predicted];
        correct += p.predicted == labels[i] ? 1 : 0;
        r.predictions.push_back(std::move(p));
    }
    r.accuracy = dataset.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(dataset.size());
    return r;
}

EmbedResult embed(const Model& model, const Dataset& dataset, std::size_t k_neighbors, std::size_t threads) {
    const auto plans = plan_all(model, dataset);
    EmbedResult r;
    r.embeddings.resize(dataset.size());
    parallel_for(plans.size(), resolve_threads(threads), [&](std::size_t i, std::size_t) {
        Tape tape;
        const Matrix& e = model.forward(tape, plans[i]).embedding.value();
        r.embeddings[i].assign(e.values().begin(), e.values().end());
    });
    r.neighbors.resize(dataset.size());
    if (k_neighbors == 0) return r;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        std::vector<Neighbor> all;
        all.reserve(dataset.size());
        for (std::size_t j = 0; j < dataset.size(); ++j) {
            if (j == i) continue;
            double sq = 0.0;
            for (std::size_t f = 0; f < r.embeddings[i].size(); ++f) {
                const double d = r.embeddings[i][f] - r.embeddings[j][f];
                sq += d * d;
            }
            all.push_back({j, std::sqrt(sq)});
        }
        const std::size_t keep = std::min(k_neighbors, all.size());
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                          [](const Neighbor& a, const Neighbor& b) {
                              return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
                          });
        all.resize(keep);
        r.neighbors[i] = std::move(all);
    }
    return r;
}

}  // namespace sgcnn
