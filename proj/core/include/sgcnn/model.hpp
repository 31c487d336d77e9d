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

#include "sgcnn/aggregation.hpp"
#include "sgcnn/autodiff.hpp"
#include "sgcnn/embedding.hpp"
#include "sgcnn/graph_io.hpp"
#include "sgcnn/layer.hpp"
#include "sgcnn/optim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgcnn {

enum class Readout { Mean, Max, ConcatFlatten };

Readout parse_readout(std::string_view text);
std::string to_string(Readout readout);

struct ClassifierConfig {
    std::size_t num_classes = 6;
    Readout readout = Readout::Mean;
};

/// Aggregation, then the SGCNN layers in order, then a readout of the last
/// feature graph and a linear classifier. Seeds for every stochastic
/// structural step derive from `seed` (see Model).
struct ModelConfig {
    AggregationConfig aggregation;
    std::vector<LayerConfig> layers;
    ClassifierConfig classifier;
    std::uint64_t seed = 0;
};

/// Checks everything that does not depend on the sample: at least one
/// layer, num_classes >= 2, and k of layer i <= s of layer i-1.
void validate(const ModelConfig& cfg);

/// Additionally checks that the first layer fits an n-node sample.
void validate_for_input(const ModelConfig& cfg, std::size_t input_nodes);

/// Aggregation (path length 1) -> SGCNN(k=14, 50 pre-sampled, keep 25, relu)
/// -> SGCNN(k=5, keep 1, leaky-relu 0.2). With `layers == 4` a k=2 relu layer
/// keeping 25 candidates is inserted before the output layer. `layers`
/// counts the aggregation layer.
ModelConfig default_model_config(std::size_t layers = 3, std::size_t num_classes = 6);

struct SamplePlan {
    AggregationPlan aggregation;
    std::vector<LayerPlan> layers;
};

class Model {
public:
    /// Registers and initializes every parameter. Sub-seeds are derived
    /// from cfg.seed: "aggregation", "layer/<i>" and "init".
    Model(ModelConfig cfg, std::size_t feature_dim);

    const ModelConfig& config() const { return cfg_; }
    std::size_t feature_dim() const { return feature_dim_; }
    std::size_t embedding_dim() const;

    ParameterStore& params() { return params_; }
    const ParameterStore& params() const { return params_; }

    /// Structure-only work for one sample (paths, candidate selection,
    /// adjacency chain). Independent of the parameters.
    SamplePlan plan(const TargetSubgraph& sample) const;

    struct Output {
        Var logits;     // 1 x C
        Var embedding;  // 1 x embedding_dim()
    };

    /// Records the forward pass on `tape`. The plan must outlive the tape.
    Output forward(Tape& tape, const SamplePlan& plan) const;

    std::vector<double> logits(const TargetSubgraph& sample) const;
    std::vector<double> embedding(const TargetSubgraph& sample) const;

private:
    ModelConfig cfg_;
    std::size_t feature_dim_;
    ParameterStore params_;
    std::vector<std::pair<std::size_t, std::size_t>> depth_params_;   // w, b
    std::vector<std::pair<std::size_t, std::size_t>> layer_params_;  // kernel, bias
    std::size_t classifier_weight_ = 0;
    std::size_t classifier_bias_ = 0;
};

/// Returns a copy whose hosts carry features; each distinct host graph is
/// embedded once.
Dataset embed_dataset(const Dataset& dataset, const EmbedderConfig& cfg);

struct TrainConfig {
    OptimizerConfig optimizer;
    std::size_t batch_size = 64;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;
    std::size_t threads = 1;  // 0: hardware concurrency
};

void validate(const TrainConfig& cfg);

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double seconds = 0.0;
};

struct TrainResult {
    std::vector<EpochMetrics> history;
    Optimizer optimizer;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Mini-batch training with mean batch loss. The sample order is reshuffled
/// every epoch from derive_seed(cfg.seed, "shuffle"); per-sample gradients
/// are reduced in sample order, so results do not depend on `threads`.
TrainResult train(Model& model, const Dataset& train_set, const Dataset& test_set, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

struct Prediction {
    std::size_t sample_index = 0;
    int label = -1;
    std::vector<double> logits;
    std::size_t predicted = 0;
};

struct EvalResult {
    double accuracy = 0.0;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
    std::vector<Prediction> predictions;
};

EvalResult evaluate(const Model& model, const Dataset& dataset, std::size_t threads = 1);

/// Index of the largest logit; the first one on ties.
std::size_t argmax(std::span<const double> values);

struct Neighbor {
    std::size_t index;
    double distance;
};

struct EmbedResult {
    std::vector<std::vector<double>> embeddings;
    std::vector<std::vector<Neighbor>> neighbors;  // empty lists when K == 0
};

/// Pre-classifier vectors and, per sample, its K nearest other samples by
/// Euclidean distance (ties broken by sample index).
EmbedResult embed(const Model& model, const Dataset& dataset, std::size_t k_neighbors,
                  std::size_t threads = 1);

}  // namespace sgcnn
