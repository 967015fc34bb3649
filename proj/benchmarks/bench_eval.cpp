#include "trace/eval.hpp"
#include "trace/stats.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

std::vector<trace::CodeArtifactId> random_files(std::mt19937& rng, int pool, int n) {
    std::vector<trace::CodeArtifactId> out;
    for (int i = 0; i < n; ++i)
        out.push_back(trace::file_id("f" + std::to_string(rng() % static_cast<unsigned>(pool)) +
                                     ".go"));
    return out;
}

}  // namespace

static void BM_ScoreLinks(benchmark::State& state) {
    std::mt19937 rng(1);
    auto p = random_files(rng, 200, static_cast<int>(state.range(0)));
    auto g = random_files(rng, 200, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto s = trace::score_links(p, g);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_ScoreLinks)->Arg(10)->Arg(100);

static void BM_SpearmanRho(benchmark::State& state) {
    std::mt19937 rng(2);
    std::vector<double> x, y;
    for (int i = 0; i < state.range(0); ++i) {
        x.push_back(static_cast<double>(rng() % 500));
        y.push_back(static_cast<double>(rng() % 500));
    }
    for (auto _ : state) {
        auto r = trace::spearman_rho(x, y);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_SpearmanRho)->Arg(100)->Arg(1000);

static void BM_CohenKappa(benchmark::State& state) {
    std::mt19937 rng(3);
    const char* labels[] = {"directory", "file", "function"};
    std::vector<std::string> a, b;
    for (int i = 0; i < state.range(0); ++i) {
        a.push_back(labels[rng() % 3]);
        b.push_back(labels[rng() % 3]);
    }
    for (auto _ : state) {
        double kappa = trace::cohen_kappa(a, b);
        benchmark::DoNotOptimize(kappa);
    }
}
BENCHMARK(BM_CohenKappa)->Arg(341);

BENCHMARK_MAIN();
