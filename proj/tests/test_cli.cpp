#include "test_support.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef TRACE_CLI_BIN
#define TRACE_CLI_BIN "trace-decline"
#endif

namespace {

using testsupport::ScratchDir;
using testsupport::fixtures_dir;
using testsupport::read_file;
using testsupport::templates_dir;
using testsupport::write_file;

struct CommandResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

CommandResult run_cli(const std::string& args) {
    ScratchDir scratch("cli_out");
    auto out_file = scratch.path() / "out.txt";
    std::string cmd = std::string(TRACE_CLI_BIN) + " " + args + " > " + out_file.string() +
                      " 2>&1";
    int status = std::system(cmd.c_str());
    int code = status == -1 ? -1 : WEXITSTATUS(status);
    return {code, read_file(out_file)};
}

// Minimal config pointing at the committed fixtures.
std::string write_config(const ScratchDir& scratch) {
    auto out_dir = scratch.path() / "out";
    std::ostringstream cfg;
    cfg << "{\n"
        << "  \"repo\": {\"root\": \"" << (fixtures_dir() / "toy_repo").string() << "\"},\n"
        << "  \"snapshot\": \"" << (scratch.path() / "snapshot.json").string() << "\",\n"
        << "  \"dataset_dir\": \"" << (fixtures_dir() / "toy_dataset").string() << "\",\n"
        << "  \"output_dir\": \"" << out_dir.string() << "\",\n"
        << "  \"gateway\": {\"mode\": \"replay\", \"store_path\": \""
        << (scratch.path() / "store.jsonl").string() << "\"},\n"
        << "  \"pipeline\": {\"templates_dir\": \"" << templates_dir().string() << "\"}\n"
        << "}\n";
    auto path = scratch.path() / "config.json";
    write_file(path, cfg.str());
    return path.string();
}

}  // namespace

TEST_CASE("scan prints the fixture counts and exits 0") {
    ScratchDir scratch("cli_scan");
    auto result = run_cli("scan --repo " + (fixtures_dir() / "tiny_repo").string() + " --out " +
                          (scratch.path() / "snap.json").string());
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("directories=3 files=2 functions=3") != std::string::npos);
    CHECK(std::filesystem::exists(scratch.path() / "snap.json"));
}

TEST_CASE("help exits 0 on the top level and every subcommand") {
    CHECK(run_cli("--help").exit_code == 0);
    for (const char* sub :
         {"scan", "dataset", "link", "baseline", "eval", "report"}) {
        auto result = run_cli(std::string(sub) + " --help");
        CHECK_MESSAGE(result.exit_code == 0, sub);
        CHECK_MESSAGE(result.output.find("--help") != std::string::npos, sub);
    }
}

TEST_CASE("unknown subcommands and flags exit 2 with usage text") {
    CHECK(run_cli("frobnicate").exit_code == 2);
    CHECK(run_cli("scan --no-such-flag").exit_code == 2);
    auto result = run_cli("");
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("Usage") != std::string::npos);
}

TEST_CASE("link in replay mode over an empty store exits 3 and names the fingerprint") {
    ScratchDir scratch("cli_replay");
    std::string config = write_config(scratch);
    auto scan = run_cli("--config " + config + " scan");
    REQUIRE(scan.exit_code == 0);
    auto result = run_cli("--config " + config + " link --mode replay");
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("cache miss") != std::string::npos);
    CHECK(result.output.find("fingerprint") != std::string::npos);
    // the batch still writes a row per proposal, all failed
    auto links = read_file(scratch.path() / "out" / "links.jsonl");
    CHECK(std::count(links.begin(), links.end(), '\n') == 4);
    CHECK(links.find("\"status\":\"failed\"") != std::string::npos);
}

TEST_CASE("dataset validate reports findings and honors --lenient") {
    ScratchDir scratch("cli_validate");
    std::string config = write_config(scratch);
    REQUIRE(run_cli("--config " + config + " scan").exit_code == 0);
    // fixture proposal 123 has no ground truth -> one finding class
    auto strict = run_cli("--config " + config + " dataset validate");
    CHECK(strict.exit_code == 1);
    CHECK(strict.output.find("missing_ground_truth=1") != std::string::npos);
    auto lenient = run_cli("--config " + config + " dataset validate --lenient");
    CHECK(lenient.exit_code == 0);
}

TEST_CASE("gerrit extraction subcommand writes truths and skips") {
    ScratchDir scratch("cli_gerrit");
    std::string config = write_config(scratch);
    REQUIRE(run_cli("--config " + config + " scan").exit_code == 0);
    auto out_path = scratch.path() / "gerrit_truth.jsonl";
    auto result = run_cli("--config " + config + " dataset extract-gerrit --changes " +
                          (fixtures_dir() / "toy_dataset" / "gerrit_changes.jsonl").string() +
                          " --out " + out_path.string());
    CHECK(result.exit_code == 0);
    std::string truths = read_file(out_path);
    // proposal 123: file truth for pkg/http/server.go plus derived directory truth
    CHECK(truths.find("\"proposal_id\":123") != std::string::npos);
    CHECK(truths.find("pkg/http/server.go") != std::string::npos);
    CHECK(truths.find("pkg/http/") != std::string::npos);
    CHECK(std::count(truths.begin(), truths.end(), '\n') == 2);
}

TEST_CASE("eval scores a hand-written links file and emits reports") {
    ScratchDir scratch("cli_eval");
    std::string config = write_config(scratch);
    auto links_path = scratch.path() / "links.jsonl";
    write_file(links_path,
               R"({"proposal_id":101,"granularity":"directory","links":["pkg/store/"],"status":"ok","failure_phase":null})"
               "\n"
               R"({"proposal_id":102,"granularity":"file","links":["pkg/http/server.go"],"status":"ok","failure_phase":null})"
               "\n"
               R"({"proposal_id":103,"granularity":"file","links":[],"status":"ok","failure_phase":null})"
               "\n");
    auto result = run_cli("--config " + config + " eval --links " + links_path.string() +
                          " --group-by explicitness --correlate-length");
    CHECK(result.exit_code == 0);
    std::string report = read_file(scratch.path() / "out" / "report.csv");
    CHECK(report.find("group,n,ga,precision,recall,f1") == 0);
    // 101 and 102 are exact: ga=1 p=1; 103 predicted file vs truth function: all zeros
    CHECK(report.find("directory,1,1.000000,1.000000,1.000000,1.000000") != std::string::npos);
    CHECK(report.find("function,1,0.000000,0.000000,0.000000,0.000000") != std::string::npos);
    CHECK(std::filesystem::exists(scratch.path() / "out" / "scores.jsonl"));
    CHECK(std::filesystem::exists(scratch.path() / "out" / "grouped_report.csv"));
    CHECK(std::filesystem::exists(scratch.path() / "out" / "correlations.json"));
    CHECK(std::filesystem::exists(scratch.path() / "out" / "run_manifest.json"));

    auto report_cmd = run_cli("report --scores " +
                              (scratch.path() / "out" / "scores.jsonl").string() +
                              " --format json");
    CHECK(report_cmd.exit_code == 0);
    CHECK(report_cmd.output.find("\"group\": \"overall\"") != std::string::npos);
}

TEST_CASE("baseline localization-only runs offline and writes candidates") {
    ScratchDir scratch("cli_baseline");
    std::string config = write_config(scratch);
    REQUIRE(run_cli("--config " + config + " scan").exit_code == 0);
    auto result = run_cli("--config " + config + " baseline --truth-granularity --sweep");
    CHECK(result.exit_code == 0);
    std::string candidates = read_file(scratch.path() / "out" / "candidates.jsonl");
    // 3 proposals with truths x 7 sweep values
    CHECK(std::count(candidates.begin(), candidates.end(), '\n') == 3 * 7);
    CHECK(candidates.find("\"k\":20") != std::string::npos);
    CHECK(candidates.find("\"granularity\":\"directory\"") != std::string::npos);
    // scores carry a fixed 6 decimal places
    CHECK(candidates.find("\"score\":0.000000}") != std::string::npos);
}

TEST_CASE("config errors exit 2") {
    CHECK(run_cli("--config /no/such/config.json scan").exit_code == 2);
    ScratchDir scratch("cli_badcfg");
    auto bad = scratch.path() / "bad.json";
    write_file(bad, "{not json");
    CHECK(run_cli("--config " + bad.string() + " scan").exit_code == 2);
}
