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

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgcnn {

/// Dense row-major matrix of doubles. Vectors are 1 x n matrices.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix row_vector(std::vector<double> values) {
        Matrix m;
        m.rows_ = 1;
        m.cols_ = values.size();
        m.data_ = std::move(values);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_string() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class ActivationKind { Identity, Sigmoid, Softplus, Tanh, Relu, LeakyRelu };

/// Element-wise non-linearity. alpha is the negative-side slope of leaky-relu.
struct Activation {
    ActivationKind kind = ActivationKind::Relu;
    double alpha = 0.2;

    double apply(double x) const;
    /// d act / dx given the input x and the output y = apply(x).
    double derivative(double x, double y) const;

    friend bool operator==(const Activation&, const Activation&) = default;
};

/// Accepts identity, sigmoid, softplus, tanh, relu, leaky-relu and
/// leaky-relu(<alpha>) with 0 < alpha < 1.
Activation parse_activation(std::string_view text);
std::string to_string(const Activation& act);

/// Order-invariant reduction over rows.
enum class Pool { Mean, Max };

Pool parse_pool(std::string_view text);
std::string to_string(Pool pool);

}  // namespace sgcnn
