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

// Model checkpoints: configuration, parameters and optimizer state in one
// JSON document. Doubles are written with 17 significant digits, so a
// save/load round trip reproduces every parameter bit for bit.
#pragma once

#include "sgcnn/embedding.hpp"
#include "sgcnn/model.hpp"
#include "sgcnn/optim.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace sgcnn {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    Model model;
    EmbedderConfig embedding;     // table not loaded; see embedding_table
    std::string embedding_table;  // path recorded at save time, may be empty
    std::optional<Optimizer> optimizer;
};

std::string checkpoint_to_json_text(const Model& model, const EmbedderConfig& embedding,
                                    const std::string& embedding_table, const Optimizer* optimizer = nullptr);

/// Throws IoError on malformed documents, MismatchError when the stored
/// tensors do not fit the stored configuration.
Checkpoint checkpoint_from_json(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const EmbedderConfig& embedding,
                     const std::string& embedding_table, const Optimizer* optimizer = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sgcnn
