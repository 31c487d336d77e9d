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

#include "sgcnn/tensor.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sgcnn {

/// A named trainable tensor. `shape` is the logical shape; `value` stores it
/// as a matrix whose columns are the last logical dimension.
struct Parameter {
    std::string name;
    std::vector<std::size_t> shape;
    Matrix value;
};

/// One gradient buffer per parameter, index-aligned with a ParameterStore.
using GradientSet = std::vector<Matrix>;

class ParameterStore {
public:
    /// Registers a parameter; names must be unique. Returns its index.
    std::size_t add(std::string name, std::vector<std::size_t> shape, Matrix init);

    std::size_t size() const { return params_.size(); }
    const Parameter& at(std::size_t i) const { return params_[i]; }
    Parameter& at(std::size_t i) { return params_[i]; }
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t index(std::string_view name) const;

    std::size_t scalar_count() const;

    /// Zero-filled buffers shaped like every parameter.
    GradientSet zero_gradients() const;

    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

private:
    std::vector<Parameter> params_;
    std::unordered_map<std::string, std::size_t> by_name_;
};

void add_into(GradientSet& acc, const GradientSet& g, double scale = 1.0);

class Tape;

/// Handle to a value recorded on a Tape.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Matrix& value() const;
};

/// Reverse-mode tape. Each recorded node keeps its value and a closure that
/// pushes its output gradient to its inputs. Parameter leaves send their
/// gradient to the GradientSet handed to backward().
class Tape {
public:
    using BackwardFn =
        std::function<void(Tape&, const Matrix& out_value, const Matrix& out_grad)>;

    Var constant(Matrix value);

    /// Leaf that reads store.at(index).value without copying. The store must
    /// outlive the tape and stay unmodified until backward() returns.
    Var parameter(const ParameterStore& store, std::size_t index);

    /// Records an op result. `inputs` are the Vars the closure may send
    /// gradient to; the node needs a gradient iff any input does.
    Var record(Matrix value, std::span<const Var> inputs, BackwardFn backward);

    const Matrix& value(Var v) const;
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

    /// Gradient buffer of `v`, allocated on first use; nullptr when v does
    /// not lead to any parameter.
    Matrix* grad(Var v);

    /// Seeds d(loss)/d(loss) = seed and propagates to every parameter leaf,
    /// adding into `grads` (shaped like the store). Unreached parameters keep
    /// whatever `grads` held. Throws UsageError if nothing was recorded or
    /// loss is not a 1x1 value of this tape.
    void backward(Var loss, GradientSet& grads, double seed = 1.0);

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    struct Node {
        Matrix value;
        const Matrix* external = nullptr;
        Matrix grad;
        BackwardFn backward;
        std::optional<std::size_t> param_index;
        bool requires_grad = false;
    };
    std::vector<Node> nodes_;
};

// Differentiable ops. All inputs must live on the same tape.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
/// a (r x c) + b (1 x c) broadcast over rows.
Var add_row(Var a, Var b);
Var scale(Var a, double factor);
Var activate(Var a, Activation act);
/// Column-wise mean or max over rows: r x c -> 1 x c. Both results do not
/// depend on row order. Max routes gradient to the first maximal row.
Var reduce_rows(Var a, Pool pool);
/// Stacks 1 x c rows into an r x c matrix.
Var stack_rows(std::span<const Var> rows);
/// [a | b]; a 1-row b is broadcast to a's rows.
Var concat_cols(Var a, Var b);
/// r x c -> 1 x (r * c), row-major.
Var flatten(Var a);

/// Loss and d(loss)/d(logits) of -log softmax(logits)[label], evaluated with
/// max subtraction. Non-finite logits throw NumericError.
struct CrossEntropyResult {
    double loss;
    std::vector<double> grad;
};
CrossEntropyResult softmax_cross_entropy(std::span<const double> logits, std::size_t label);

/// 1 x C logits -> 1 x 1 loss.
Var softmax_cross_entropy(Var logits, std::size_t label);

}  // namespace sgcnn
