#include "run_config.hpp"

#include "trace/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace trace::cli {

using nlohmann::json;

namespace {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }

    RunConfig cfg;
    cfg.config_hash = hex64(fnv1a64(text));
    try {
        if (doc.contains("repo")) {
            const auto& repo = doc["repo"];
            if (repo.contains("root")) cfg.repo_root = repo["root"].get<std::string>();
            if (repo.contains("exclude_globs"))
                cfg.exclude_globs = repo["exclude_globs"].get<std::vector<std::string>>();
            if (repo.contains("commit") && !repo["commit"].is_null())
                cfg.repo_commit = repo["commit"].get<std::string>();
        }
        if (doc.contains("snapshot")) cfg.snapshot_path = doc["snapshot"].get<std::string>();
        if (doc.contains("dataset_dir")) cfg.dataset_dir = doc["dataset_dir"].get<std::string>();
        if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();

        if (doc.contains("gateway")) {
            const auto& gw = doc["gateway"];
            if (gw.contains("endpoint")) cfg.gateway.endpoint = gw["endpoint"].get<std::string>();
            if (gw.contains("mode")) {
                auto mode = gateway_mode_from_string(gw["mode"].get<std::string>());
                if (!mode) throw ConfigError("unknown gateway mode in config");
                cfg.gateway.mode = *mode;
            }
            if (gw.contains("max_retries")) cfg.gateway.max_retries = gw["max_retries"].get<int>();
            if (gw.contains("backoff_ms"))
                cfg.gateway.backoff_base_ms = gw["backoff_ms"].get<int>();
            if (gw.contains("max_in_flight"))
                cfg.gateway.max_in_flight = gw["max_in_flight"].get<int>();
            if (gw.contains("prompt_token_budget"))
                cfg.gateway.prompt_token_budget = gw["prompt_token_budget"].get<long>();
            if (gw.contains("store_path")) cfg.store_path = gw["store_path"].get<std::string>();
            if (gw.contains("model_name")) cfg.model_name = gw["model_name"].get<std::string>();
            if (gw.contains("temperature")) cfg.temperature = gw["temperature"].get<double>();
            if (gw.contains("max_output_tokens"))
                cfg.max_output_tokens = gw["max_output_tokens"].get<int>();
        }
        if (doc.contains("pipeline")) {
            const auto& pl = doc["pipeline"];
            if (pl.contains("templates_dir"))
                cfg.templates_dir = pl["templates_dir"].get<std::string>();
            if (pl.contains("parse_retries")) cfg.parse_retries = pl["parse_retries"].get<int>();
            if (pl.contains("system_prompt"))
                cfg.system_prompt = pl["system_prompt"].get<std::string>();
        }
        if (doc.contains("baseline")) {
            const auto& bl = doc["baseline"];
            if (bl.contains("weighting")) {
                auto w = weighting_from_string(bl["weighting"].get<std::string>());
                if (!w) throw ConfigError("unknown baseline weighting in config");
                cfg.baseline_weighting = *w;
            }
            if (bl.contains("k")) cfg.baseline_k = bl["k"].get<int>();
            if (bl.contains("k_sweep")) cfg.baseline_k_sweep = bl["k_sweep"].get<std::vector<int>>();
            if (bl.contains("embedding_endpoint"))
                cfg.embedding_endpoint = bl["embedding_endpoint"].get<std::string>();
            if (bl.contains("embedding_model"))
                cfg.embedding_model = bl["embedding_model"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    if (cfg.temperature < 0.0 || cfg.temperature > 2.0)
        throw ConfigError("temperature must lie in [0, 2]");
    if (cfg.parse_retries < 0) throw ConfigError("parse_retries must be >= 0");
    return cfg;
}

PipelineConfig RunConfig::pipeline_config() const {
    PipelineConfig pc;
    pc.templates = PromptTemplates::load(TemplatePaths::in_directory(templates_dir));
    if (!system_prompt.empty()) pc.system_prompt = system_prompt;
    pc.model_name = model_name;
    pc.temperature = temperature;
    pc.max_output_tokens = max_output_tokens;
    pc.parse_retries = parse_retries;
    return pc;
}

void write_run_manifest(const std::filesystem::path& output_dir, const RunConfig& config,
                        const std::optional<std::string>& snapshot_commit) {
    // The only output carrying a timestamp, so everything else stays
    // byte-comparable across runs.
    std::filesystem::create_directories(output_dir);
    nlohmann::ordered_json doc;
    doc["config_hash"] = config.config_hash;
    doc["snapshot_commit"] =
        snapshot_commit ? nlohmann::ordered_json(*snapshot_commit) : nlohmann::ordered_json(nullptr);
    doc["gateway_mode"] = std::string(to_string(config.gateway.mode));
    doc["created_at"] = rfc3339_now();
    std::ofstream out(output_dir / "run_manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write run manifest");
    out << doc.dump(2) << "\n";
}

}  // namespace trace::cli
