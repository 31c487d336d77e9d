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

#include "sgcnn/optim.hpp"

#include "sgcnn/errors.hpp"

#include <cmath>

namespace sgcnn {

OptimizerKind parse_optimizer(std::string_view text) {
    if (text == "sgd") return OptimizerKind::Sgd;
    if (text == "adam") return OptimizerKind::Adam;
    throw ConfigError("unknown optimizer '" + std::string(text) + "'");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

void validate(const OptimizerConfig& cfg) {
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (cfg.kind == OptimizerKind::Adam) {
        if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
            throw ConfigError("adam betas must lie in [0, 1)");
        }
        if (!(cfg.epsilon > 0.0)) throw ConfigError("adam epsilon must be > 0");
    }
}

Optimizer::Optimizer(OptimizerConfig cfg, const ParameterStore& store)
    : cfg_(cfg), m_(store.zero_gradients()), v_(store.zero_gradients()) {
    validate(cfg_);
}

void Optimizer::restore(std::uint64_t steps, GradientSet m, GradientSet v) {
    if (m.size() != m_.size() || v.size() != v_.size()) {
        throw ContractError("optimizer state does not match the parameter store");
    }
    for (std::size_t p = 0; p < m.size(); ++p) {
        if (!m[p].same_shape(m_[p]) || !v[p].same_shape(v_[p])) {
            throw ContractError("optimizer moment shape mismatch at parameter " + std::to_string(p));
        }
    }
    t_ = steps;
    m_ = std::move(m);
    v_ = std::move(v);
}

void Optimizer::step(ParameterStore& store, const GradientSet& grads) {
    if (grads.size() != store.size()) throw ContractError("gradient set does not match parameter store");
    ++t_;
    const double lr = cfg_.learning_rate;
    if (cfg_.kind == OptimizerKind::Sgd) {
        for (std::size_t p = 0; p < store.size(); ++p) {
            auto w = store.at(p).value.values();
            auto g = grads[p].values();
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
        }
        return;
    }
    const double t = static_cast<double>(t_);
    const double c1 = 1.0 - std::pow(cfg_.beta1, t);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t);
    for (std::size_t p = 0; p < store.size(); ++p) {
        auto w = store.at(p).value.values();
        auto g = grads[p].values();
        auto m = m_[p].values();
        auto v = v_[p].values();
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

}  // namespace sgcnn
