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

#include "sgcnn/autodiff.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace sgcnn {

enum class OptimizerKind { Sgd, Adam };

OptimizerKind parse_optimizer(std::string_view text);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void validate(const OptimizerConfig& cfg);

/// SGD: p -= lr * g.
/// Adam: m = b1 m + (1-b1) g; v = b2 v + (1-b2) g^2;
///       p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
class Optimizer {
public:
    Optimizer(OptimizerConfig cfg, const ParameterStore& store);

    void step(ParameterStore& store, const GradientSet& grads);

    const OptimizerConfig& config() const { return cfg_; }
    std::uint64_t steps() const { return t_; }

    // Adam moments, exposed for checkpointing.
    const GradientSet& first_moment() const { return m_; }
    const GradientSet& second_moment() const { return v_; }
    void restore(std::uint64_t steps, GradientSet m, GradientSet v);

private:
    OptimizerConfig cfg_;
    std::uint64_t t_ = 0;
    GradientSet m_;
    GradientSet v_;
};

}  // namespace sgcnn
