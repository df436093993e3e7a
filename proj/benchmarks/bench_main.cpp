#include <benchmark/benchmark.h>

#include <vector>

#include "persona/clustering.hpp"
#include "persona/providers.hpp"
#include "persona/rng.hpp"
#include "persona/stats.hpp"

using namespace persona;

namespace {

clustering::FeatureMatrix blob_matrix(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    clustering::FeatureMatrix data;
    for (std::size_t i = 0; i < n; ++i) {
        const double base = static_cast<double>(i % 3) * 4.0;
        data.add("u" + std::to_string(i),
                 {rng.normal(base, 0.3), rng.normal(base, 0.3), rng.normal(1 + base, 0.3),
                  rng.normal(2, 0.3), rng.normal(3, 0.3)});
    }
    return data;
}

void BM_kmeans(benchmark::State& state) {
    const auto data = blob_matrix(static_cast<std::size_t>(state.range(0)), 71);
    for (auto _ : state) {
        auto result = clustering::kmeans(data, 3, 17);
        benchmark::DoNotOptimize(result.centroids);
    }
}
BENCHMARK(BM_kmeans)->Arg(100)->Arg(1000);

void BM_silhouette(benchmark::State& state) {
    const auto data = blob_matrix(static_cast<std::size_t>(state.range(0)), 72);
    const auto result = clustering::kmeans(data, 3, 17);
    for (auto _ : state) {
        auto sil = clustering::silhouette(data, result.assignments);
        benchmark::DoNotOptimize(sil.mean);
    }
}
BENCHMARK(BM_silhouette)->Arg(100)->Arg(500);

void BM_select_k(benchmark::State& state) {
    const auto data = blob_matrix(100, 73);
    for (auto _ : state) {
        auto selection = clustering::select_k(data, 2, static_cast<int>(state.range(0)), 3, 5);
        benchmark::DoNotOptimize(selection.best_k);
    }
}
BENCHMARK(BM_select_k)->Arg(6)->Arg(10);

void BM_ks_two_sample(benchmark::State& state) {
    Rng rng(99);
    std::vector<double> a, b;
    for (int i = 0; i < state.range(0); ++i) {
        a.push_back(rng.uniform(1, 5));
        b.push_back(rng.uniform(1.2, 5));
    }
    for (auto _ : state) {
        auto result = stats::ks_two_sample(a, b);
        benchmark::DoNotOptimize(result.d_statistic);
    }
}
BENCHMARK(BM_ks_two_sample)->Arg(100)->Arg(10000);

void BM_mock_personality_score(benchmark::State& state) {
    providers::MockPersonalityProvider provider(11);
    int run = 0;
    for (auto _ : state) {
        const double score = provider.score_personality("benchmark corpus text", 1 + run % 5, run);
        benchmark::DoNotOptimize(score);
        ++run;
    }
}
BENCHMARK(BM_mock_personality_score);

} // namespace

BENCHMARK_MAIN();
