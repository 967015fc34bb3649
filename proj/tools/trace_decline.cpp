#include "run_config.hpp"

#include "trace/baseline.hpp"
#include "trace/corpus.hpp"
#include "trace/errors.hpp"
#include "trace/eval.hpp"
#include "trace/gateway.hpp"
#include "trace/go_scan.hpp"
#include "trace/pipeline.hpp"
#include "trace/run_io.hpp"
#include "trace/snapshot_io.hpp"
#include "trace/stats.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

namespace {

using namespace trace;
using cli::RunConfig;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitConfig = 2;
constexpr int kExitGateway = 3;

struct CommonOpts {
    std::string config_path;
    RunConfig load() const {
        return config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    }
};

RepoSnapshot load_snapshot_or_die(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("snapshot not found: " + path.string() + " (run `scan` first)");
    return load_snapshot(path);
}

// ---------------------------------------------------------------- scan ----

int cmd_scan(const RunConfig& cfg) {
    RepoSnapshot snapshot = scan_repository(cfg.repo_root, cfg.exclude_globs, cfg.repo_commit);
    std::filesystem::create_directories(cfg.snapshot_path.parent_path().empty()
                                            ? "."
                                            : cfg.snapshot_path.parent_path());
    save_snapshot(snapshot, cfg.snapshot_path);
    std::cout << "directories=" << snapshot.directories().size()
              << " files=" << snapshot.files().size()
              << " functions=" << snapshot.function_count() << "\n";
    if (!snapshot.scan_errors().empty()) {
        std::cerr << snapshot.scan_errors().size() << " files failed signature extraction:\n";
        for (const auto& e : snapshot.scan_errors())
            std::cerr << "  " << e.file << ": " << e.message << "\n";
    }
    std::cout << "snapshot written to " << cfg.snapshot_path.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------- dataset validate ----

int cmd_dataset_validate(const RunConfig& cfg, bool lenient) {
    Dataset dataset = load_dataset(cfg.dataset_dir);
    RepoSnapshot snapshot = load_snapshot_or_die(cfg.snapshot_path);
    ValidationReport report = validate_dataset(dataset, snapshot);
    std::cout << "proposals=" << dataset.proposals.size()
              << " ground_truths=" << dataset.ground_truths.size() << "\n";
    for (const auto& [issue, count] : report.counts)
        std::cout << issue << "=" << count << "\n";
    for (const auto& f : report.findings)
        std::cout << "  [" << f.issue << "] proposal " << f.proposal_id << ": " << f.detail
                  << "\n";
    if (report.clean()) {
        std::cout << "dataset clean\n";
        return kExitOk;
    }
    return lenient ? kExitOk : kExitFindings;
}

int cmd_dataset_extract_gerrit(const RunConfig& cfg, const std::string& changes_path,
                               const std::string& out_path) {
    Dataset dataset = load_dataset(cfg.dataset_dir);
    RepoSnapshot snapshot = load_snapshot_or_die(cfg.snapshot_path);
    auto changes = load_gerrit_changes(changes_path);
    GroundTruthExtraction extraction =
        extract_ground_truth(changes, dataset.proposals, snapshot);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    for (const auto& gt : extraction.truths) {
        ordered_json doc;
        doc["proposal_id"] = gt.proposal_id;
        doc["granularity"] = std::string(to_string(gt.granularity));
        auto& links = doc["links"] = ordered_json::array();
        for (const auto& link : gt.links) links.push_back(link.canonical);
        doc["source"] = "gerrit";
        out << doc.dump() << "\n";
    }
    std::cout << "ground truths written: " << extraction.truths.size() << " (to " << out_path
              << ")\n";
    std::cout << "changes skipped: " << extraction.skipped.size() << "\n";
    for (const auto& skip : extraction.skipped)
        std::cerr << "  " << skip.change_key << ": " << skip.reason << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- link ----

struct LinkOutcome {
    LinkRow row;
    Provenance provenance;
    bool gateway_error = false;
    std::string error_message;
};

int cmd_link(const RunConfig& cfg, const std::vector<long>& only_ids,
             const std::string& status_filter) {
    Dataset dataset = load_dataset(cfg.dataset_dir);
    RepoSnapshot snapshot = load_snapshot_or_die(cfg.snapshot_path);
    PipelineConfig pipeline_cfg = cfg.pipeline_config();

    if (!cfg.store_path.parent_path().empty())
        std::filesystem::create_directories(cfg.store_path.parent_path());
    TranscriptStore store = TranscriptStore::open(cfg.store_path);
    GatewayConfig gw_cfg = GatewayConfig::from_env(cfg.gateway);
    LlmGateway gateway(gw_cfg, store);

    std::vector<const Proposal*> selected;
    for (const auto& p : dataset.proposals) {
        if (!only_ids.empty() &&
            std::find(only_ids.begin(), only_ids.end(), p.id) == only_ids.end())
            continue;
        if (status_filter == "accepted" && p.status != ProposalStatus::Accepted) continue;
        if (status_filter == "declined" && p.status != ProposalStatus::Declined) continue;
        selected.push_back(&p);
    }

    std::vector<LinkOutcome> outcomes(selected.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= selected.size()) return;
            const Proposal& proposal = *selected[i];
            LinkOutcome& out = outcomes[i];
            try {
                LinkSet set = run_pipeline(proposal, snapshot, pipeline_cfg, gateway);
                out.row = LinkRow::from_link_set(set);
                out.provenance = std::move(set.provenance);
            } catch (const PipelineError& e) {
                out.row.proposal_id = proposal.id;
                out.row.status = "failed";
                out.row.failure_phase = e.phase;
                out.gateway_error = e.kind == PipelineError::Kind::Gateway;
                out.error_message = e.what();
            } catch (const std::exception& e) {
                out.row.proposal_id = proposal.id;
                out.row.status = "failed";
                out.row.failure_phase = "unknown";
                out.error_message = e.what();
            }
        }
    };
    int threads = std::max(1, gw_cfg.max_in_flight);
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // Single writer, rows ordered by proposal id.
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream links_out(cfg.output_dir / "links.jsonl", std::ios::binary);
    std::ofstream prov_out(cfg.output_dir / "provenance.jsonl", std::ios::binary);
    if (!links_out || !prov_out) throw IoError("cannot write outputs under " +
                                               cfg.output_dir.string());
    std::size_t failed = 0;
    bool gateway_error = false;
    std::string first_error;
    for (const auto& out : outcomes) {
        links_out << link_row_to_jsonl(out.row) << "\n";
        write_provenance_jsonl(prov_out, out.row.proposal_id, out.provenance);
        if (out.row.status == "failed") {
            ++failed;
            if (first_error.empty()) first_error = out.error_message;
            if (out.gateway_error) gateway_error = true;
        }
    }
    cli::write_run_manifest(cfg.output_dir, cfg, snapshot.commit_id());
    std::cout << "proposals=" << selected.size() << " failed=" << failed << "\n";
    std::cout << "links written to " << (cfg.output_dir / "links.jsonl").string() << "\n";
    if (gateway_error) {
        std::cerr << "gateway error: " << first_error << "\n";
        return kExitGateway;
    }
    return kExitOk;
}

// ------------------------------------------------------------- baseline ----

int cmd_baseline(const RunConfig& cfg, const std::string& granularity_flag,
                 bool truth_granularity, int k_flag, bool sweep, bool with_link_decision,
                 const std::string& status_filter) {
    Dataset dataset = load_dataset(cfg.dataset_dir);
    RepoSnapshot snapshot = load_snapshot_or_die(cfg.snapshot_path);

    std::unique_ptr<EmbeddingClient> embeddings;
    if (cfg.baseline_weighting == Weighting::External) {
        if (cfg.embedding_endpoint.empty())
            throw ConfigError("external weighting requires baseline.embedding_endpoint");
        embeddings = make_http_embedding_client(
            cfg.embedding_endpoint, cfg.embedding_model,
            GatewayConfig::from_env(cfg.gateway).api_key);
    }

    std::optional<GranularityLabel> fixed;
    if (!granularity_flag.empty()) {
        fixed = granularity_from_string(granularity_flag);
        if (!fixed) throw ConfigError("unknown granularity: " + granularity_flag);
    }
    if (!fixed && !truth_granularity)
        throw ConfigError("baseline needs --granularity or --truth-granularity");

    std::map<GranularityLabel, VectorIndex> indexes;
    auto index_for = [&](GranularityLabel g) -> const VectorIndex& {
        auto it = indexes.find(g);
        if (it == indexes.end())
            it = indexes
                     .emplace(g, build_index(snapshot, g, cfg.baseline_weighting,
                                             embeddings.get()))
                     .first;
        return it->second;
    };

    std::vector<int> ks = sweep ? cfg.baseline_k_sweep
                                : std::vector<int>{k_flag > 0 ? k_flag : cfg.baseline_k};
    if (with_link_decision && ks.size() != 1)
        throw ConfigError("--with-link-decision needs a single k, not a sweep");

    PipelineConfig pipeline_cfg;
    TranscriptStore store;
    std::unique_ptr<LlmGateway> gateway;
    ScriptedClient no_calls;  // localization-only mode never consults it
    if (with_link_decision) {
        pipeline_cfg = cfg.pipeline_config();
        store = TranscriptStore::open(cfg.store_path);
        gateway = std::make_unique<LlmGateway>(GatewayConfig::from_env(cfg.gateway), store);
    }
    CompletionClient& client =
        with_link_decision ? static_cast<CompletionClient&>(*gateway) : no_calls;

    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream cand_out(cfg.output_dir / "candidates.jsonl", std::ios::binary);
    std::ofstream links_out;
    if (with_link_decision)
        links_out.open(cfg.output_dir / "baseline_links.jsonl", std::ios::binary);

    bool gateway_error = false;
    std::string first_error;
    for (const auto& proposal : dataset.proposals) {
        if (status_filter == "accepted" && proposal.status != ProposalStatus::Accepted) continue;
        if (status_filter == "declined" && proposal.status != ProposalStatus::Declined) continue;
        GranularityLabel g;
        if (fixed) {
            g = *fixed;
        } else {
            auto truths = dataset.truths_for(proposal.id);
            if (truths.empty()) continue;  // no truth granularity to evaluate at
            g = truths.front()->granularity;
        }
        for (int k : ks) {
            try {
                BaselineResult result =
                    run_baseline(proposal, snapshot, g, k, with_link_decision, pipeline_cfg,
                                 client, &index_for(g), embeddings.get());
                // Scores are printed at a fixed 6 decimal places for stable
                // diffs, so the line is assembled by hand.
                std::string line = "{\"proposal_id\":" + std::to_string(proposal.id) +
                                   ",\"k\":" + std::to_string(k) + ",\"granularity\":\"" +
                                   std::string(to_string(g)) + "\",\"ranked\":[";
                bool first = true;
                for (const auto& hit : result.candidates) {
                    char score[32];
                    std::snprintf(score, sizeof score, "%.6f", hit.score);
                    if (!first) line += ',';
                    first = false;
                    line += "{\"id\":" + ordered_json(hit.id).dump() + ",\"score\":" + score + "}";
                }
                line += "]}";
                cand_out << line << "\n";
                if (result.links)
                    links_out << link_row_to_jsonl(LinkRow::from_link_set(*result.links)) << "\n";
            } catch (const CacheMiss& e) {
                gateway_error = true;
                if (first_error.empty()) first_error = e.what();
            } catch (const TransportError& e) {
                gateway_error = true;
                if (first_error.empty()) first_error = e.what();
            }
        }
    }
    cli::write_run_manifest(cfg.output_dir, cfg, snapshot.commit_id());
    std::cout << "candidates written to " << (cfg.output_dir / "candidates.jsonl").string()
              << "\n";
    if (gateway_error) {
        std::cerr << "gateway error: " << first_error << "\n";
        return kExitGateway;
    }
    return kExitOk;
}

// ----------------------------------------------------------------- eval ----

std::optional<const GroundTruth*> unique_truth_for(const Dataset& dataset, long id,
                                                   const std::optional<GranularityLabel>& at) {
    auto truths = dataset.truths_for(id);
    if (at) {
        for (const auto* gt : truths)
            if (gt->granularity == *at) return gt;
        return std::nullopt;
    }
    if (truths.empty()) return std::nullopt;
    if (truths.size() == 1) return truths.front();
    std::vector<const GroundTruth*> manual;
    for (const auto* gt : truths)
        if (gt->source == LabelSource::Manual) manual.push_back(gt);
    if (manual.size() == 1) return manual.front();
    throw ValidationError("proposal " + std::to_string(id) +
                          " has ground truths at several granularities; pass --at");
}

int cmd_eval(const RunConfig& cfg, const std::string& links_path, const std::string& at_flag,
             const std::string& group_by, bool correlate_length, bool strict) {
    Dataset dataset = load_dataset(cfg.dataset_dir);
    std::vector<LinkRow> rows = load_links_jsonl(links_path);

    std::optional<GranularityLabel> at;
    if (!at_flag.empty()) {
        at = granularity_from_string(at_flag);
        if (!at) throw ConfigError("unknown granularity: " + at_flag);
    }

    std::vector<PerProposalScores> scores;
    std::size_t failed_rows = 0, unmatched = 0;
    for (const auto& row : rows) {
        if (row.status != "ok") {
            ++failed_rows;
            continue;
        }
        auto truth = unique_truth_for(dataset, row.proposal_id, at);
        if (!truth) {
            ++unmatched;
            continue;
        }
        scores.push_back(score_proposal(row.to_link_set(), **truth));
    }
    if (scores.empty()) throw EmptyInput("no scorable (links, truth) pairs");

    std::filesystem::create_directories(cfg.output_dir);
    {
        std::ofstream out(cfg.output_dir / "scores.jsonl", std::ios::binary);
        for (const auto& s : scores) {
            ordered_json doc;
            doc["proposal_id"] = s.proposal_id;
            doc["ga"] = s.ga;
            doc["tp"] = s.tp;
            doc["fp"] = s.fp;
            doc["fn"] = s.fn;
            doc["precision"] = s.precision;
            doc["recall"] = s.recall;
            doc["f1"] = s.f1;
            doc["predicted_granularity"] = std::string(to_string(s.predicted_granularity));
            doc["truth_granularity"] = std::string(to_string(s.truth_granularity));
            out << doc.dump() << "\n";
        }
    }

    AggregateReport report = macro_aggregate(scores);
    auto rows_out = report_rows(report);
    {
        std::ofstream csv(cfg.output_dir / "report.csv", std::ios::binary);
        csv << emit_report(rows_out, ReportFormat::Csv);
        std::ofstream json(cfg.output_dir / "report.json", std::ios::binary);
        json << emit_report(rows_out, ReportFormat::Json);
    }
    std::cout << emit_report(rows_out, ReportFormat::Csv);

    if (!group_by.empty()) {
        std::map<long, std::string> labels;
        for (const auto& s : scores) {
            auto it = dataset.aux_labels.find(s.proposal_id);
            if (it != dataset.aux_labels.end()) {
                auto lt = it->second.find(group_by);
                if (lt != it->second.end()) labels[s.proposal_id] = lt->second;
            }
        }
        auto grouped = group_by_label(scores, labels);
        auto grouped_rows = report_rows(grouped);
        std::ofstream csv(cfg.output_dir / "grouped_report.csv", std::ios::binary);
        csv << emit_report(grouped_rows, ReportFormat::Csv);
        std::ofstream json(cfg.output_dir / "grouped_report.json", std::ios::binary);
        json << emit_report(grouped_rows, ReportFormat::Json);
        std::cout << "grouped by " << group_by << ":\n"
                  << emit_report(grouped_rows, ReportFormat::Csv);
    }

    if (correlate_length) {
        std::vector<double> lengths;
        std::vector<double> precision, recall, f1;
        for (const auto& s : scores) {
            const Proposal* p = dataset.find_proposal(s.proposal_id);
            if (!p) continue;
            lengths.push_back(static_cast<double>(concat_discussion(*p).length));
            precision.push_back(s.precision);
            recall.push_back(s.recall);
            f1.push_back(s.f1);
        }
        ordered_json doc;
        auto put = [&](const char* name, const std::vector<double>& metric) {
            try {
                SpearmanResult r = spearman_rho(lengths, metric);
                doc[name] = ordered_json{{"rho", r.rho}, {"p_two_sided", r.p_two_sided}};
            } catch (const Error& e) {
                doc[name] = ordered_json{{"error", e.what()}};
            }
        };
        put("precision", precision);
        put("recall", recall);
        put("f1", f1);
        std::ofstream out(cfg.output_dir / "correlations.json", std::ios::binary);
        out << doc.dump(2) << "\n";
        std::cout << "discussion-length correlations:\n" << doc.dump(2) << "\n";
    }

    cli::write_run_manifest(cfg.output_dir, cfg, dataset.repo_commit);
    std::cout << "scored=" << scores.size() << " failed_rows=" << failed_rows
              << " without_truth=" << unmatched << "\n";
    if (strict && (failed_rows > 0 || unmatched > 0)) return kExitFindings;
    return kExitOk;
}

// --------------------------------------------------------------- report ----

int cmd_report(const std::string& scores_path, const std::string& format_flag,
               const std::string& out_path) {
    std::ifstream in(scores_path, std::ios::binary);
    if (!in) throw IoError("cannot read " + scores_path);
    std::vector<PerProposalScores> scores;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json doc = ordered_json::parse(line, nullptr, false);
        if (doc.is_discarded()) throw ParseError("invalid scores line: " + line);
        PerProposalScores s;
        s.proposal_id = doc.at("proposal_id").get<long>();
        s.ga = doc.at("ga").get<int>();
        s.tp = doc.at("tp").get<long>();
        s.fp = doc.at("fp").get<long>();
        s.fn = doc.at("fn").get<long>();
        s.precision = doc.at("precision").get<double>();
        s.recall = doc.at("recall").get<double>();
        s.f1 = doc.at("f1").get<double>();
        s.predicted_granularity =
            granularity_from_string(doc.at("predicted_granularity").get<std::string>())
                .value_or(GranularityLabel::File);
        s.truth_granularity =
            granularity_from_string(doc.at("truth_granularity").get<std::string>())
                .value_or(GranularityLabel::File);
        scores.push_back(s);
    }
    auto rows = report_rows(macro_aggregate(scores));
    ReportFormat format = format_flag == "json" ? ReportFormat::Json : ReportFormat::Csv;
    std::string text = emit_report(rows, format);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + out_path);
        out << text;
        std::cout << "report written to " << out_path << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Granularity-aware traceability links between Go proposals and source code"};
    app.require_subcommand(1);

    CommonOpts common;
    app.add_option("--config", common.config_path, "JSON run configuration file")
        ->envname("TRACE_CONFIG");

    // scan
    auto* scan = app.add_subcommand("scan", "Scan a Go tree into a snapshot cache");
    std::string scan_repo, scan_out, scan_commit;
    std::vector<std::string> scan_excludes;
    scan->add_option("--repo", scan_repo, "Repository root (overrides config)");
    scan->add_option("--exclude", scan_excludes, "Exclude glob, repeatable");
    scan->add_option("--commit", scan_commit, "Commit id recorded in the snapshot");
    scan->add_option("--out", scan_out, "Snapshot output path");

    // dataset
    auto* dataset_cmd = app.add_subcommand("dataset", "Dataset operations");
    dataset_cmd->require_subcommand(1);
    auto* validate = dataset_cmd->add_subcommand("validate", "Check dataset against a snapshot");
    bool lenient = false;
    std::string ds_dir, ds_snapshot;
    validate->add_flag("--lenient", lenient, "Exit 0 even when findings exist");
    validate->add_option("--dataset", ds_dir, "Dataset directory (overrides config)");
    validate->add_option("--snapshot", ds_snapshot, "Snapshot path (overrides config)");
    auto* extract =
        dataset_cmd->add_subcommand("extract-gerrit", "Derive ground truth from Gerrit changes");
    std::string changes_path, extract_out = "ground_truth.gerrit.jsonl";
    extract->add_option("--changes", changes_path, "gerrit_changes.jsonl path")->required();
    extract->add_option("--out", extract_out, "Output ground-truth JSONL path");
    extract->add_option("--dataset", ds_dir, "Dataset directory (overrides config)");
    extract->add_option("--snapshot", ds_snapshot, "Snapshot path (overrides config)");

    // link
    auto* link = app.add_subcommand("link", "Run the three-phase pipeline over proposals");
    std::string link_mode, link_status = "all";
    std::vector<long> link_ids;
    std::string link_snapshot, link_dataset, link_outdir, link_store;
    link->add_option("--mode", link_mode, "Gateway mode: live|record|replay");
    link->add_option("--proposal", link_ids, "Only these proposal ids, repeatable");
    link->add_option("--status", link_status, "Filter: accepted|declined|all")
        ->check(CLI::IsMember({"accepted", "declined", "all"}));
    link->add_option("--snapshot", link_snapshot, "Snapshot path (overrides config)");
    link->add_option("--dataset", link_dataset, "Dataset directory (overrides config)");
    link->add_option("--out-dir", link_outdir, "Output directory (overrides config)");
    link->add_option("--store", link_store, "Transcript store path (overrides config)");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Vector-retrieval baseline");
    std::string bl_granularity;
    bool bl_truth_granularity = false, bl_sweep = false, bl_link_decision = false;
    int bl_k = 0;
    std::string bl_status = "all";
    std::string bl_snapshot, bl_dataset, bl_outdir;
    baseline->add_option("--granularity", bl_granularity,
                         "Fixed granularity: directory|file|function");
    baseline->add_flag("--truth-granularity", bl_truth_granularity,
                       "Use each proposal's ground-truth granularity");
    baseline->add_option("--k", bl_k, "Top-k candidates (default from config)");
    baseline->add_flag("--sweep", bl_sweep, "Emit one candidate list per configured k");
    baseline->add_flag("--with-link-decision", bl_link_decision,
                       "Judge each candidate with the link-decision prompt");
    baseline->add_option("--status", bl_status, "Filter: accepted|declined|all")
        ->check(CLI::IsMember({"accepted", "declined", "all"}));
    baseline->add_option("--snapshot", bl_snapshot, "Snapshot path (overrides config)");
    baseline->add_option("--dataset", bl_dataset, "Dataset directory (overrides config)");
    baseline->add_option("--out-dir", bl_outdir, "Output directory (overrides config)");

    // eval
    auto* eval = app.add_subcommand("eval", "Score links against ground truth");
    std::string eval_links, eval_at, eval_group_by, eval_dataset, eval_outdir;
    bool eval_corr = false, eval_strict = false;
    eval->add_option("--links", eval_links, "links.jsonl to score")->required();
    eval->add_option("--at", eval_at, "Score against truths at this granularity only");
    eval->add_option("--group-by", eval_group_by, "Aux label name for grouped reporting");
    eval->add_flag("--correlate-length", eval_corr,
                   "Spearman correlation of discussion length vs metrics");
    eval->add_flag("--strict", eval_strict, "Exit 1 when rows failed or lacked truth");
    eval->add_option("--dataset", eval_dataset, "Dataset directory (overrides config)");
    eval->add_option("--out-dir", eval_outdir, "Output directory (overrides config)");

    // report
    auto* report = app.add_subcommand("report", "Render a report from scores.jsonl");
    std::string rp_scores, rp_format = "csv", rp_out;
    report->add_option("--scores", rp_scores, "scores.jsonl path")->required();
    report->add_option("--format", rp_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    report->add_option("--out", rp_out, "Output path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help("", CLI::AppFormatMode::Normal);
        return kExitConfig;
    }

    try {
        RunConfig cfg = common.load();
        if (scan->parsed()) {
            if (!scan_repo.empty()) cfg.repo_root = scan_repo;
            if (!scan_excludes.empty()) cfg.exclude_globs = scan_excludes;
            if (!scan_commit.empty()) cfg.repo_commit = scan_commit;
            if (!scan_out.empty()) cfg.snapshot_path = scan_out;
            return cmd_scan(cfg);
        }
        if (validate->parsed() || extract->parsed()) {
            if (!ds_dir.empty()) cfg.dataset_dir = ds_dir;
            if (!ds_snapshot.empty()) cfg.snapshot_path = ds_snapshot;
            if (validate->parsed()) return cmd_dataset_validate(cfg, lenient);
            return cmd_dataset_extract_gerrit(cfg, changes_path, extract_out);
        }
        if (link->parsed()) {
            if (!link_mode.empty()) {
                auto mode = gateway_mode_from_string(link_mode);
                if (!mode) throw ConfigError("unknown mode: " + link_mode);
                cfg.gateway.mode = *mode;
            }
            if (!link_snapshot.empty()) cfg.snapshot_path = link_snapshot;
            if (!link_dataset.empty()) cfg.dataset_dir = link_dataset;
            if (!link_outdir.empty()) cfg.output_dir = link_outdir;
            if (!link_store.empty()) cfg.store_path = link_store;
            return cmd_link(cfg, link_ids, link_status);
        }
        if (baseline->parsed()) {
            if (!bl_snapshot.empty()) cfg.snapshot_path = bl_snapshot;
            if (!bl_dataset.empty()) cfg.dataset_dir = bl_dataset;
            if (!bl_outdir.empty()) cfg.output_dir = bl_outdir;
            return cmd_baseline(cfg, bl_granularity, bl_truth_granularity, bl_k, bl_sweep,
                                bl_link_decision, bl_status);
        }
        if (eval->parsed()) {
            if (!eval_dataset.empty()) cfg.dataset_dir = eval_dataset;
            if (!eval_outdir.empty()) cfg.output_dir = eval_outdir;
            return cmd_eval(cfg, eval_links, eval_at, eval_group_by, eval_corr, eval_strict);
        }
        if (report->parsed()) return cmd_report(rp_scores, rp_format, rp_out);
        std::cerr << "no subcommand\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CacheMiss& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitGateway;
    } catch (const TransportError& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitGateway;
    } catch (const ApiError& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitGateway;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFindings;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kExitFindings;
    }
}
