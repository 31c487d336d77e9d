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

#include "sgcnn/autodiff.hpp"

#include "sgcnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgcnn {

std::size_t ParameterStore::add(std::string name, std::vector<std::size_t> shape, Matrix init) {
    if (by_name_.contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;
    if (count != init.size()) {
        throw ContractError("parameter '" + name + "': shape does not match initial value " +
                            init.shape_string());
    }
    by_name_.emplace(name, params_.size());
    params_.push_back({std::move(name), std::move(shape), std::move(init)});
    return params_.size() - 1;
}

std::optional<std::size_t> ParameterStore::find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t ParameterStore::index(std::string_view name) const {
    auto i = find(name);
    if (!i) throw ContractError("unknown parameter '" + std::string(name) + "'");
    return *i;
}

std::size_t ParameterStore::scalar_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.value.size();
    return total;
}

GradientSet ParameterStore::zero_gradients() const {
    GradientSet g;
    g.reserve(params_.size());
    for (const auto& p : params_) g.emplace_back(p.value.rows(), p.value.cols());
    return g;
}

void add_into(GradientSet& acc, const GradientSet& g, double scale) {
    for (std::size_t p = 0; p < acc.size(); ++p) {
        auto dst = acc[p].values();
        auto src = g[p].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
    }
}

const Matrix& Var::value() const { return tape->value(*this); }

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::parameter(const ParameterStore& store, std::size_t index) {
    Node n;
    n.external = &store.at(index).value;
    n.param_index = index;
    n.requires_grad = true;
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::span<const Var> inputs, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    for (const Var& in : inputs) {
        if (in.tape != this) throw UsageError("op input recorded on a different tape");
        n.requires_grad = n.requires_grad || nodes_[in.id].requires_grad;
    }
    if (n.requires_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {this, nodes_.size() - 1};
}

const Matrix& Tape::value(Var v) const {
    const Node& n = nodes_[v.id];
    return n.external ? *n.external : n.value;
}

Matrix* Tape::grad(Var v) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return nullptr;
    if (n.grad.empty()) {
        const Matrix& val = n.external ? *n.external : n.value;
        n.grad = Matrix(val.rows(), val.cols());
    }
    return &n.grad;
}

void Tape::backward(Var loss, GradientSet& grads, double seed) {
    if (nodes_.empty()) throw UsageError("backward() called before any forward pass was recorded");
    if (loss.tape != this || loss.id >= nodes_.size()) throw UsageError("backward(): loss is not on this tape");
    if (value(loss).size() != 1) {
        throw UsageError("backward(): loss must be 1x1, got " + value(loss).shape_string());
    }
    for (auto& n : nodes_) n.grad = Matrix();
    Matrix* g = grad(loss);
    if (!g) return;  // loss does not depend on any parameter
    (*g)[0] = seed;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.empty()) continue;
        if (n.param_index) {
            Matrix& dst = grads.at(*n.param_index);
            auto src = n.grad.values();
            auto out = dst.values();
            for (std::size_t k = 0; k < out.size(); ++k) out[k] += src[k];
        } else if (n.backward) {
            n.backward(*this, n.value, n.grad);
        }
    }
}

namespace {

void require_same_tape(Var a, Var b) {
    if (a.tape != b.tape) throw UsageError("op inputs live on different tapes");
}

}  // namespace

Var matmul(Var a, Var b) {
    require_same_tape(a, b);
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    if (A.cols() != B.rows()) {
        throw ContractError("matmul: " + A.shape_string() + " times " + B.shape_string());
    }
    Matrix out(A.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t k = 0; k < A.cols(); ++k) {
            const double aik = A(i, k);
            for (std::size_t j = 0; j < B.cols(); ++j) out(i, j) += aik * B(k, j);
        }
    }
    const Var inputs[] = {a, b};
    return a.tape->record(std::move(out), inputs, [a, b](Tape& t, const Matrix&, const Matrix& g) {
        const Matrix& A = t.value(a);
        const Matrix& B = t.value(b);
        if (Matrix* ga = t.grad(a)) {
            for (std::size_t i = 0; i < A.rows(); ++i)
                for (std::size_t k = 0; k < A.cols(); ++k) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < B.cols(); ++j) s += g(i, j) * B(k, j);
                    (*ga)(i, k) += s;
                }
        }
        if (Matrix* gb = t.grad(b)) {
            for (std::size_t i = 0; i < A.rows(); ++i)
                for (std::size_t k = 0; k < A.cols(); ++k) {
                    const double aik = A(i, k);
                    for (std::size_t j = 0; j < B.cols(); ++j) (*gb)(k, j) += aik * g(i, j);
                }
        }
    });
}

Var add(Var a, Var b) {
    require_same_tape(a, b);
    if (!a.value().same_shape(b.value())) {
        throw ContractError("add: " + a.value().shape_string() + " vs " + b.value().shape_string());
    }
    Matrix out = a.value();
    auto o = out.values();
    auto bv = b.value().values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
    const Var inputs[] = {a, b};
    return a.tape->record(std::move(out), inputs, [a, b](Tape& t, const Matrix&, const Matrix& g) {
        for (Var v : {a, b}) {
            if (Matrix* gv = t.grad(v)) {
                for (std::size_t i = 0; i < g.size(); ++i) (*gv)[i] += g[i];
            }
        }
    });
}

Var add_row(Var a, Var b) {
    require_same_tape(a, b);
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    if (B.rows() != 1 || B.cols() != A.cols()) {
        throw ContractError("add_row: " + A.shape_string() + " + " + B.shape_string());
    }
    Matrix out = A;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += B[c];
    const Var inputs[] = {a, b};
    return a.tape->record(std::move(out), inputs, [a, b](Tape& t, const Matrix&, const Matrix& g) {
        if (Matrix* ga = t.grad(a)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        }
        if (Matrix* gb = t.grad(b)) {
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < g.cols(); ++c) (*gb)[c] += g(r, c);
        }
    });
}

Var scale(Var a, double factor) {
    Matrix out = a.value();
    for (double& x : out.values()) x *= factor;
    const Var inputs[] = {a};
    return a.tape->record(std::move(out), inputs, [a, factor](Tape& t, const Matrix&, const Matrix& g) {
        if (Matrix* ga = t.grad(a)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += factor * g[i];
        }
    });
}

Var activate(Var a, Activation act) {
    Matrix out = a.value();
    for (double& x : out.values()) x = act.apply(x);
    const Var inputs[] = {a};
    return a.tape->record(std::move(out), inputs, [a, act](Tape& t, const Matrix& y, const Matrix& g) {
        if (Matrix* ga = t.grad(a)) {
            const Matrix& x = t.value(a);
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * act.derivative(x[i], y[i]);
        }
    });
}

Var reduce_rows(Var a, Pool pool) {
    const Matrix& A = a.value();
    if (A.rows() == 0) throw ContractError("reduce_rows: empty input");
    Matrix out(1, A.cols());
    std::vector<std::size_t> argmax;
    if (pool == Pool::Mean) {
        // Summing each column in sorted order makes the mean independent of
        // row order bit for bit.
        std::vector<double> column(A.rows());
        const double inv = 1.0 / static_cast<double>(A.rows());
        for (std::size_t c = 0; c < A.cols(); ++c) {
            for (std::size_t r = 0; r < A.rows(); ++r) column[r] = A(r, c);
            std::sort(column.begin(), column.end());
            double sum = 0.0;
            for (double x : column) sum += x;
            out[c] = sum * inv;
        }
    } else {
        argmax.assign(A.cols(), 0);
        for (std::size_t c = 0; c < A.cols(); ++c) out[c] = A(0, c);
        for (std::size_t r = 1; r < A.rows(); ++r)
            for (std::size_t c = 0; c < A.cols(); ++c)
                if (A(r, c) > out[c]) {
                    out[c] = A(r, c);
                    argmax[c] = r;
                }
    }
    const Var inputs[] = {a};
    return a.tape->record(std::move(out), inputs,
                          [a, pool, argmax = std::move(argmax)](Tape& t, const Matrix&, const Matrix& g) {
                              Matrix* ga = t.grad(a);
                              if (!ga) return;
                              if (pool == Pool::Mean) {
                                  const double inv = 1.0 / static_cast<double>(ga->rows());
                                  for (std::size_t r = 0; r < ga->rows(); ++r)
                                      for (std::size_t c = 0; c < ga->cols(); ++c) (*ga)(r, c) += g[c] * inv;
                              } else {
                                  for (std::size_t c = 0; c < ga->cols(); ++c) (*ga)(argmax[c], c) += g[c];
                              }
                          });
}

Var stack_rows(std::span<const Var> rows) {
    if (rows.empty()) throw ContractError("stack_rows: no rows");
    Tape* tape = rows.front().tape;
    const std::size_t cols = rows.front().value().cols();
    Matrix out(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Matrix& v = rows[r].value();
        if (rows[r].tape != tape) throw UsageError("stack_rows: inputs live on different tapes");
        if (v.rows() != 1 || v.cols() != cols) {
            throw ContractError("stack_rows: row " + std::to_string(r) + " is " + v.shape_string());
        }
        std::copy(v.values().begin(), v.values().end(), out.row(r).begin());
    }
    std::vector<Var> inputs(rows.begin(), rows.end());
    return tape->record(std::move(out), inputs, [inputs](Tape& t, const Matrix&, const Matrix& g) {
        for (std::size_t r = 0; r < inputs.size(); ++r) {
            if (Matrix* gr = t.grad(inputs[r])) {
                for (std::size_t c = 0; c < g.cols(); ++c) (*gr)[c] += g(r, c);
            }
        }
    });
}

Var concat_cols(Var a, Var b) {
    require_same_tape(a, b);
    const Matrix& A = a.value();
    const Matrix& B = b.value();
    const bool broadcast = B.rows() == 1 && A.rows() != 1;
    if (!broadcast && B.rows() != A.rows()) {
        throw ContractError("concat_cols: " + A.shape_string() + " | " + B.shape_string());
    }
    Matrix out(A.rows(), A.cols() + B.cols());
    for (std::size_t r = 0; r < A.rows(); ++r) {
        for (std::size_t c = 0; c < A.cols(); ++c) out(r, c) = A(r, c);
        const std::size_t br = broadcast ? 0 : r;
        for (std::size_t c = 0; c < B.cols(); ++c) out(r, A.cols() + c) = B(br, c);
    }
    const Var inputs[] = {a, b};
    return a.tape->record(std::move(out), inputs, [a, b, broadcast](Tape& t, const Matrix&, const Matrix& g) {
        const std::size_t ac = t.value(a).cols();
        if (Matrix* ga = t.grad(a)) {
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t c = 0; c < ac; ++c) (*ga)(r, c) += g(r, c);
        }
        if (Matrix* gb = t.grad(b)) {
            for (std::size_t r = 0; r < g.rows(); ++r) {
                const std::size_t br = broadcast ? 0 : r;
                for (std::size_t c = 0; c < gb->cols(); ++c) (*gb)(br, c) += g(r, ac + c);
            }
        }
    });
}

Var flatten(Var a) {
    const Matrix& A = a.value();
    Matrix out(1, A.size());
    std::copy(A.values().begin(), A.values().end(), out.values().begin());
    const Var inputs[] = {a};
    return a.tape->record(std::move(out), inputs, [a](Tape& t, const Matrix&, const Matrix& g) {
        if (Matrix* ga = t.grad(a)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        }
    });
}

CrossEntropyResult softmax_cross_entropy(std::span<const double> logits, std::size_t label) {
    if (logits.size() < 2) throw ContractError("softmax_cross_entropy: need at least 2 classes");
    if (label >= logits.size()) {
        throw ContractError("softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                            std::to_string(logits.size()) + " classes");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (double z : logits) {
        if (!std::isfinite(z)) throw NumericError("softmax_cross_entropy: non-finite logit");
        mx = std::max(mx, z);
    }
    double denom = 0.0;
    std::vector<double> p(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) {
        p[c] = std::exp(logits[c] - mx);
        denom += p[c];
    }
    const double log_denom = std::log(denom);
    CrossEntropyResult r;
    r.loss = -(logits[label] - mx - log_denom);
    r.grad.resize(logits.size());
    for (std::size_t c = 0; c < logits.size(); ++c) r.grad[c] = p[c] / denom - (c == label ? 1.0 : 0.0);
    return r;
}

Var softmax_cross_entropy(Var logits, std::size_t label) {
    const Matrix& z = logits.value();
    if (z.rows() != 1) throw ContractError("softmax_cross_entropy: logits must be a row vector");
    auto result = softmax_cross_entropy(z.values(), label);
    Matrix out(1, 1, result.loss);
    const Var inputs[] = {logits};
    return logits.tape->record(std::move(out), inputs,
                               [logits, grad = std::move(result.grad)](Tape& t, const Matrix&, const Matrix& g) {
                                   if (Matrix* gz = t.grad(logits)) {
                                       for (std::size_t c = 0; c < grad.size(); ++c) (*gz)[c] += g[0] * grad[c];
                                   }
                               });
}

}  // namespace sgcnn
