#include "trace/baseline.hpp"
#include "trace/text_prep.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <string>

namespace {

trace::RepoSnapshot vocabulary_snapshot(int files) {
    std::mt19937 rng(99);
    const char* words[] = {"server",  "buffer",   "proposal", "timeout", "socket",
                           "decode",  "encoding", "schedule", "channel", "context",
                           "reverse", "iterate",  "compress", "observe", "metric"};
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 0; i < files; ++i) {
        std::string body = "package p\n// ";
        for (int w = 0; w < 60; ++w) {
            body += words[rng() % 15];
            body += ' ';
        }
        body += "\nfunc F" + std::to_string(i) + "() {}\n";
        entries.emplace_back("d" + std::to_string(i % 9) + "/f" + std::to_string(i) + ".go",
                             std::move(body));
    }
    return trace::RepoSnapshot::from_files("bench", std::move(entries));
}

}  // namespace

static void BM_Preprocess(benchmark::State& state) {
    std::string text =
        "The HTTPServer proposal removes NopCloser wrappers; see "
        "https://example.org/design and <b>the codefence</b> ```go\nfunc X() {}\n``` body";
    for (auto _ : state) {
        auto tokens = trace::preprocess_text(text);
        benchmark::DoNotOptimize(tokens);
    }
}
BENCHMARK(BM_Preprocess);

static void BM_BuildIndex(benchmark::State& state) {
    auto snap = vocabulary_snapshot(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto index = trace::build_index(snap, trace::GranularityLabel::File,
                                        trace::Weighting::TfIdf);
        benchmark::DoNotOptimize(index);
    }
}
BENCHMARK(BM_BuildIndex)->Arg(100)->Arg(500);

static void BM_RetrieveTopK(benchmark::State& state) {
    auto snap = vocabulary_snapshot(static_cast<int>(state.range(0)));
    auto index = trace::build_index(snap, trace::GranularityLabel::File,
                                    trace::Weighting::TfIdf);
    auto query = trace::preprocess_text("server timeout scheduling proposal for the decoder");
    for (auto _ : state) {
        auto hits = trace::retrieve_topk(index, query, 20);
        benchmark::DoNotOptimize(hits);
    }
}
BENCHMARK(BM_RetrieveTopK)->Arg(100)->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
