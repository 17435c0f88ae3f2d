// SPDX-License-Identifier: Apache-2.0
//
// Microbenchmarks for the hot paths: bulk fault injection, the attention
// forward pass, a full lifecycle trace, and the retention-interval solve.

#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "shield/attention.hpp"
#include "shield/config.hpp"
#include "shield/fault.hpp"
#include "shield/retention.hpp"
#include "shield/rng.hpp"
#include "shield/workload.hpp"

namespace {

void BM_inject_tensor(benchmark::State& state) {
    const auto count = static_cast<size_t>(state.range(0));
    std::vector<shield::Bf16Word> words(count);
    const shield::RandomStream fill = shield::make_stream(1, 1);
    for (size_t i = 0; i < words.size(); ++i) {
        words[i].bits = static_cast<std::uint16_t>(shield::draw_u64(fill, i));
    }
    const shield::RandomStream faults = shield::make_stream(42, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            shield::inject_tensor(words, 0.25, shield::kMantissaSegment, faults));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(count));
}
BENCHMARK(BM_inject_tensor)->Arg(1 << 16)->Arg(1 << 20);

void BM_attention_forward(benchmark::State& state) {
    const shield::AttentionDims dims{64, 64, 4};
    const shield::AttentionWeights weights = shield::random_weights(dims, 42);
    const std::vector<shield::Bf16Word> input = shield::random_input(dims, 43);
    for (auto _ : state) {
        benchmark::DoNotOptimize(shield::attention_forward(dims, weights, input));
    }
}
BENCHMARK(BM_attention_forward);

void BM_run_trace_lifecycle(benchmark::State& state) {
    const shield::SimConfig cfg = shield::default_config();
    const shield::DerivedParameters d = shield::derive_parameters(cfg);
    const shield::ModelConfig& model = shield::find_model(cfg, cfg.default_model);
    const shield::Scenario& scenario = shield::find_scenario(cfg, "lifecycle");
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            shield::run_trace(model, scenario, d.constants, d.policies, d.trace_options));
    }
}
BENCHMARK(BM_run_trace_lifecycle);

void BM_interval_for_ber(benchmark::State& state) {
    const shield::RetentionCurve curve =
        shield::calibrate_retention({1216.0, 1e-4}, {1500.0, 4e-4});
    for (auto _ : state) {
        benchmark::DoNotOptimize(shield::interval_for_ber(curve, 2e-3));
    }
}
BENCHMARK(BM_interval_for_ber);

}  // namespace

BENCHMARK_MAIN();
