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

#include "sgcnn/aggregation.hpp"
#include "sgcnn/layer.hpp"
#include "sgcnn/model.hpp"
#include "sgcnn/random.hpp"
#include "sgcnn/synth.hpp"

#include <benchmark/benchmark.h>

using namespace sgcnn;

namespace {

const Dataset& samples() {
    static const Dataset data = [] {
        SynthConfig cfg;
        cfg.samples_per_class = 4;
        return embed_dataset(generate(cfg), EmbedderConfig{});
    }();
    return data;
}

BinaryMatrix random_adjacency(std::size_t n, double p, Rng& rng) {
    BinaryMatrix a(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) a.set_symmetric(u, v);
    return a;
}

void BM_EnumerateCandidates(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_candidates(n, k));
}
BENCHMARK(BM_EnumerateCandidates)->Args({17, 14})->Args({20, 10});

void BM_SelectCandidates(benchmark::State& state) {
    Rng rng(1);
    const auto a = random_adjacency(25, 0.2, rng);
    const auto pre = static_cast<std::size_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(select_candidates(a, 5, 25, pre, PoolingMode::DegreeRanked, ++seed));
}
BENCHMARK(BM_SelectCandidates)->Arg(50)->Arg(500);

void BM_EnumeratePaths(benchmark::State& state) {
    const auto& sample = samples().front();
    const auto d = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        for (auto anchor : sample.node_indices()) benchmark::DoNotOptimize(enumerate_paths(sample, anchor, d));
}
BENCHMARK(BM_EnumeratePaths)->Arg(1)->Arg(2)->Arg(3);

void BM_LayerForward(benchmark::State& state) {
    Rng rng(2);
    const auto a = random_adjacency(17, 0.15, rng);
    Matrix x(17, 32);
    for (double& v : x.values()) v = rng.uniform(-1, 1);
    LayerConfig cfg{14, static_cast<std::size_t>(state.range(0)), 50, PoolingMode::DegreeRanked, 16,
                    Activation{ActivationKind::Relu}, 3};
    LayerParams p{14, 32, 16, Matrix(14 * 14 * 32, 16), std::vector<double>(16, 0.0), cfg.activation};
    for (double& v : p.kernel.values()) v = rng.uniform(-0.1, 0.1);
    for (auto _ : state) benchmark::DoNotOptimize(layer_forward(x, a, cfg, p));
}
BENCHMARK(BM_LayerForward)->Arg(25)->Arg(35);

void BM_SamplePlan(benchmark::State& state) {
    Model model(default_model_config(3), 16);
    for (auto _ : state)
        for (const auto& s : samples()) benchmark::DoNotOptimize(model.plan(s));
}
BENCHMARK(BM_SamplePlan);

void BM_TrainStep(benchmark::State& state) {
    Model model(default_model_config(3), 16);
    std::vector<SamplePlan> plans;
    for (const auto& s : samples()) plans.push_back(model.plan(s));
    Optimizer opt(OptimizerConfig{}, model.params());
    for (auto _ : state) {
        auto grads = model.params().zero_gradients();
        for (std::size_t i = 0; i < plans.size(); ++i) {
            Tape tape;
            const auto out = model.forward(tape, plans[i]);
            tape.backward(softmax_cross_entropy(out.logits, static_cast<std::size_t>(*samples()[i].label())), grads);
        }
        opt.step(model.params(), grads);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(plans.size()));
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
