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

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace sgcnn {

/// Seeded generator with distribution helpers whose output is identical on
/// every standard library (std::uniform_*_distribution is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t index(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// 64-bit FNV-1a over the bytes of `text`.
std::uint64_t fnv1a64(std::string_view text);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Child seed for a named subsystem: mix64(root ^ fnv1a64(label)).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

/// `count` distinct values drawn uniformly from [0, population), returned in
/// ascending order (Floyd's algorithm). count is clamped to population.
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t population,
                                                      std::uint64_t count, Rng& rng);

}  // namespace sgcnn
