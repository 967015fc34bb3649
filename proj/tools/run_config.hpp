#pragma once

#include "trace/baseline.hpp"
#include "trace/gateway.hpp"
#include "trace/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace trace::cli {

// One JSON config file drives every subcommand; flags override single fields
// and the environment supplies only the API key.
struct RunConfig {
    std::filesystem::path repo_root = ".";
    std::vector<std::string> exclude_globs;
    std::optional<std::string> repo_commit;

    std::filesystem::path snapshot_path = "out/snapshot.json";
    std::filesystem::path dataset_dir = "dataset";
    std::filesystem::path output_dir = "out";

    GatewayConfig gateway;
    std::filesystem::path store_path = "out/transcript.jsonl";

    std::filesystem::path templates_dir = "templates";
    std::string system_prompt;  // empty keeps the library default
    std::string model_name = "default";
    double temperature = 0.0;
    int max_output_tokens = 1024;
    int parse_retries = 2;

    Weighting baseline_weighting = Weighting::TfIdf;
    int baseline_k = 20;
    std::vector<int> baseline_k_sweep = {1, 5, 10, 20, 30, 40, 50};
    std::string embedding_endpoint;
    std::string embedding_model;

    // Hash of the loaded config file text (or "defaults" when none given).
    std::string config_hash = "defaults";

    static RunConfig load(const std::filesystem::path& path);  // throws ConfigError

    PipelineConfig pipeline_config() const;  // loads and validates templates
};

void write_run_manifest(const std::filesystem::path& output_dir, const RunConfig& config,
                        const std::optional<std::string>& snapshot_commit);

}  // namespace trace::cli
