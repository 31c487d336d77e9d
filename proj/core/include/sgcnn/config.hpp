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

// Experiment configuration documents and their JSON form.
#pragma once

#include "sgcnn/embedding.hpp"
#include "sgcnn/model.hpp"
#include "sgcnn/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace sgcnn {

/// Everything one run needs. A single root seed drives every random choice;
/// the per-stage seeds are derived from it by label (see the *_for helpers).
///
/// {
///   "seed": 0, "split_ratio": 0.8,
///   "synth":     {"num_classes", "samples_per_class", "subgraph_size", "noise_rate",
///                 "context_min", "context_max", "class_token_bias"},
///   "embedding": {"dimension", "mode": "hashed"|"table", "normalization": "none"|"unit-l2",
///                 "table": "path/to/table.json"},
///   "model":     {"aggregation": {"depths", "samples", "path_pool", "depth_pool", "activation"},
///                 "layers": [{"k", "s", "pre_dropout", "pooling", "out_dim", "activation"}],
///                 "classifier": {"num_classes", "readout"}},
///   "train":     {"optimizer": {"kind", "learning_rate", "beta1", "beta2", "epsilon"},
///                 "batch_size", "epochs", "threads"}
/// }
///
/// Every key is optional when parsing; missing keys keep their defaults.
/// Unknown keys are rejected so that typos do not pass silently.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    double split_ratio = 0.8;
    SynthConfig synth;
    EmbedderConfig embedding;
    std::string embedding_table;  // path, used in table mode
    ModelConfig model = default_model_config();
    TrainConfig train;
};

ExperimentConfig default_experiment(std::size_t layers = 3);

/// Throws ConfigError on any invalid section.
void validate(const ExperimentConfig& cfg);

SynthConfig synth_config_for(const ExperimentConfig& cfg);
ModelConfig model_config_for(const ExperimentConfig& cfg);
TrainConfig train_config_for(const ExperimentConfig& cfg);
std::uint64_t split_seed_for(const ExperimentConfig& cfg);

/// Loads the pretrained table when the mode asks for one. Relative table
/// paths resolve against `base_dir`.
EmbedderConfig embedder_config_for(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {});

std::string to_json_text(const ExperimentConfig& cfg);
ExperimentConfig experiment_from_json(std::string_view text);
ExperimentConfig read_experiment_file(const std::filesystem::path& path);

/// Model section alone; used by checkpoints.
std::string model_config_to_json_text(const ModelConfig& cfg);
ModelConfig model_config_from_json(std::string_view text);

}  // namespace sgcnn
