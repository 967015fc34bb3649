#include "trace/go_scan.hpp"
#include "trace/render.hpp"

#include <benchmark/benchmark.h>

#include <string>

namespace {

std::string synthetic_go_file(int functions) {
    std::string src = "package bench\n\nimport \"fmt\"\n\n";
    for (int i = 0; i < functions; ++i) {
        src += "func Handler" + std::to_string(i) + "(w io.Writer, n int) error {\n";
        src += "\tif n < 0 {\n\t\treturn fmt.Errorf(\"bad { input }\")\n\t}\n";
        src += "\tfor i := 0; i < n; i++ {\n\t\t_ = `raw { string }`\n\t}\n";
        src += "\treturn nil\n}\n\n";
        src += "func (h *Holder" + std::to_string(i) + ") Close() error { return nil }\n\n";
    }
    return src;
}

trace::RepoSnapshot synthetic_snapshot(int files, int functions_per_file) {
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 0; i < files; ++i) {
        std::string dir = "pkg" + std::to_string(i % 12);
        entries.emplace_back(dir + "/file" + std::to_string(i) + ".go",
                             synthetic_go_file(functions_per_file));
    }
    return trace::RepoSnapshot::from_files("bench", std::move(entries));
}

}  // namespace

static void BM_ExtractSignatures(benchmark::State& state) {
    std::string src = synthetic_go_file(static_cast<int>(state.range(0)));
    auto file = trace::file_id("bench.go");
    for (auto _ : state) {
        auto sigs = trace::extract_function_signatures(src, file);
        benchmark::DoNotOptimize(sigs);
    }
    state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                            static_cast<int64_t>(src.size()));
}
BENCHMARK(BM_ExtractSignatures)->Arg(10)->Arg(100)->Arg(1000);

static void BM_SnapshotFromFiles(benchmark::State& state) {
    int files = static_cast<int>(state.range(0));
    for (auto _ : state) {
        auto snap = synthetic_snapshot(files, 20);
        benchmark::DoNotOptimize(snap);
    }
}
BENCHMARK(BM_SnapshotFromFiles)->Arg(50)->Arg(200);

static void BM_RenderTreeMap(benchmark::State& state) {
    auto snap = synthetic_snapshot(static_cast<int>(state.range(0)), 5);
    for (auto _ : state) {
        auto map = trace::render_tree_map(snap);
        benchmark::DoNotOptimize(map);
    }
}
BENCHMARK(BM_RenderTreeMap)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
