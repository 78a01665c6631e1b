#include <benchmark/benchmark.h>

#include <cstddef>
#include <span>
#include <vector>

#include "uitf/attention.hpp"
#include "uitf/oracle.hpp"
#include "uitf/rng.hpp"
#include "uitf/rope.hpp"
#include "uitf/tensor.hpp"

namespace {

using namespace uitf;

template <typename T>
Tensor<T> normal_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
    Tensor<T> t = Tensor<T>::zeros(std::move(shape));
    SplitMix64 rng(seed);
    for (T& x : t.values) {
        x = static_cast<T>(rng.next_normal());
    }
    return t;
}

attn::AttentionInputs<float> make_inputs(std::size_t heads, std::size_t n, std::size_t dim) {
    return {normal_tensor<float>({heads, n, dim}, 1),
            normal_tensor<float>({heads, n, dim}, 2),
            normal_tensor<float>({heads, n, dim}, 3)};
}

void BM_EntropyPass(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto inputs = make_inputs(1, n, 64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(attn::entropy_pass(inputs, {}, 1));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_EntropyPass)->RangeMultiplier(2)->Range(512, 4096)->Complexity();

void BM_AttentionForward(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto inputs = make_inputs(1, n, 64);
    const attn::FocusMap focus{{1.15}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(attn::attention_forward(inputs, focus, {}, 1));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AttentionForward)->RangeMultiplier(2)->Range(512, 4096)->Complexity();

void BM_AttentionForwardThreads(benchmark::State& state) {
    const auto workers = static_cast<std::size_t>(state.range(0));
    const auto inputs = make_inputs(4, 2048, 64);
    const attn::FocusMap focus{{1.0, 1.1, 1.2, 1.3}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(attn::attention_forward(inputs, focus, {}, workers));
    }
}
BENCHMARK(BM_AttentionForwardThreads)->RangeMultiplier(2)->Range(1, 8);

void BM_NaiveAttention(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto inputs = make_inputs(1, n, 64);
    const std::vector<double> lambdas{1.15};
    for (auto _ : state) {
        benchmark::DoNotOptimize(oracle::naive_attention(inputs, lambdas));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NaiveAttention)->RangeMultiplier(2)->Range(512, 2048)->Complexity();

void BM_RopeApply2d(benchmark::State& state) {
    const auto side = static_cast<std::size_t>(state.range(0));
    const rope::FrequencySchedule sched = rope::build_schedule({10000.0, 32, 1});
    std::vector<double> vec(64);
    SplitMix64 rng(7);
    for (double& x : vec) {
        x = rng.next_normal();
    }
    for (auto _ : state) {
        for (std::size_t h = 0; h < side; ++h) {
            for (std::size_t w = 0; w < side; ++w) {
                auto copy = vec;
                rope::apply_rope_2d_inplace(std::span<double>(copy), static_cast<double>(h),
                                            static_cast<double>(w), sched, sched);
                benchmark::DoNotOptimize(copy.data());
            }
        }
    }
}
BENCHMARK(BM_RopeApply2d)->Arg(32)->Arg(64);

} // namespace

BENCHMARK_MAIN();
