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

#include "sgcnn/tensor.hpp"

#include "sgcnn/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace sgcnn {

std::string Matrix::shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

double Activation::apply(double x) const {
    switch (kind) {
        case ActivationKind::Identity:
            return x;
        case ActivationKind::Sigmoid:
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            return std::exp(x) / (1.0 + std::exp(x));
        case ActivationKind::Softplus:
            return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        case ActivationKind::Tanh:
            return std::tanh(x);
        case ActivationKind::Relu:
            return x > 0.0 ? x : 0.0;
        case ActivationKind::LeakyRelu:
            return x >= 0.0 ? x : alpha * x;
    }
    return x;
}

double Activation::derivative(double x, double y) const {
    switch (kind) {
        case ActivationKind::Identity:
            return 1.0;
        case ActivationKind::Sigmoid:
            return y * (1.0 - y);
        case ActivationKind::Softplus:
            return Activation{ActivationKind::Sigmoid}.apply(x);
        case ActivationKind::Tanh:
            return 1.0 - y * y;
        case ActivationKind::Relu:
            return x > 0.0 ? 1.0 : 0.0;
        case ActivationKind::LeakyRelu:
            return x >= 0.0 ? 1.0 : alpha;
    }
    return 1.0;
}

Activation parse_activation(std::string_view text) {
    if (text == "identity") return {ActivationKind::Identity};
    if (text == "sigmoid") return {ActivationKind::Sigmoid};
    if (text == "softplus") return {ActivationKind::Softplus};
    if (text == "tanh") return {ActivationKind::Tanh};
    if (text == "relu") return {ActivationKind::Relu};
    if (text == "leaky-relu") return {ActivationKind::LeakyRelu, 0.2};
    constexpr std::string_view prefix = "leaky-relu(";
    if (text.starts_with(prefix) && text.ends_with(")")) {
        const std::string inner(text.substr(prefix.size(), text.size() - prefix.size() - 1));
        char* end = nullptr;
        const double alpha = std::strtod(inner.c_str(), &end);
        if (end == inner.c_str() || *end != '\0' || !(alpha > 0.0 && alpha < 1.0)) {
            throw ConfigError("leaky-relu alpha must be a number in (0, 1), got '" + inner + "'");
        }
        return {ActivationKind::LeakyRelu, alpha};
    }
    throw ConfigError("unknown activation '" + std::string(text) + "'");
}

std::string to_string(const Activation& act) {
    switch (act.kind) {
        case ActivationKind::Identity:
            return "identity";
        case ActivationKind::Sigmoid:
            return "sigmoid";
        case ActivationKind::Softplus:
            return "softplus";
        case ActivationKind::Tanh:
            return "tanh";
        case ActivationKind::Relu:
            return "relu";
        case ActivationKind::LeakyRelu: {
            // Shortest form that parses back to the same alpha.
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, act.alpha);
            return "leaky-relu(" + std::string(buf, res.ptr) + ")";
        }
    }
    return "identity";
}

Pool parse_pool(std::string_view text) {
    if (text == "mean") return Pool::Mean;
    if (text == "max") return Pool::Max;
    throw ConfigError("unknown pooling '" + std::string(text) + "' (expected mean or max)");
}

std::string to_string(Pool pool) { return pool == Pool::Mean ? "mean" : "max"; }

}  // namespace sgcnn
