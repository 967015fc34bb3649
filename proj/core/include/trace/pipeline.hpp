#pragma once

#include "trace/corpus.hpp"
#include "trace/errors.hpp"
#include "trace/gateway.hpp"
#include "trace/go_scan.hpp"
#include "trace/granularity.hpp"
#include "trace/render.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace trace {

// External prompt templates. Wording is configuration; the placeholders are
// the contract and each file must contain the ones its phase requires.
struct TemplatePaths {
    std::filesystem::path granularity;   // {{DISCUSSION}}
    std::filesystem::path directories;   // {{DISCUSSION}} {{REPO_MAP}}
    std::filesystem::path files;         // {{DISCUSSION}} {{REPO_MAP}} {{CANDIDATES}}
    std::filesystem::path functions;     // {{DISCUSSION}} {{FILE_SKELETON}}
    std::filesystem::path link;          // {{DISCUSSION}} {{ELEMENT}}

    // Conventional file names inside one directory.
    static TemplatePaths in_directory(const std::filesystem::path& dir);
};

struct PromptTemplates {
    std::string granularity;
    std::string directories;
    std::string files;
    std::string functions;
    std::string link;

    // Throws ConfigError when a file is missing or lacks a required placeholder.
    static PromptTemplates load(const TemplatePaths& paths);
};

struct PipelineConfig {
    PromptTemplates templates;
    std::string system_prompt =
        "You are an assistant that links software proposal discussions to source code.";
    std::string model_name = "default";
    double temperature = 0.0;
    int max_output_tokens = 1024;
    int parse_retries = 2;  // corrective re-asks after a malformed reply
};

// Why a candidate from a model reply did not become a link.
struct DropRecord {
    std::string candidate;
    std::string reason;  // "not_in_snapshot" | "outside_scope" | "unmatched_name" | "ambiguous_name"
};

// One phase of one proposal run: raw replies (including retries), the
// accepted values, and everything dropped.
struct PhaseRecord {
    std::string phase;  // "granularity" | "directories" | "files" | "functions" | "link_decision"
    std::string unit;   // file or element the exchange was about, "" for whole-proposal phases
    std::vector<std::string> raw_replies;
    std::vector<std::string> accepted;
    std::vector<DropRecord> dropped;
    bool failed = false;
};

using Provenance = std::vector<PhaseRecord>;

struct LinkSet {
    long proposal_id = 0;
    GranularityLabel granularity = GranularityLabel::File;
    std::vector<CodeArtifactId> links;  // sorted, unique, kinds match granularity
    Provenance provenance;
};

// Prompt builders are public so transcript stores can be seeded without a
// live endpoint; the run_* entry points issue exactly these requests.
PromptRequest build_granularity_request(const Proposal& proposal, const PipelineConfig& config);
PromptRequest build_directories_request(const Proposal& proposal, const RepoSnapshot& snapshot,
                                        const PipelineConfig& config);
PromptRequest build_files_request(const Proposal& proposal, const RepoSnapshot& snapshot,
                                  const std::vector<CodeArtifactId>& candidate_dirs,
                                  const PipelineConfig& config);
PromptRequest build_functions_request(const Proposal& proposal, const RepoSnapshot& snapshot,
                                      const CodeArtifactId& file, const PipelineConfig& config);
PromptRequest build_link_request(const Proposal& proposal, const std::string& element_text,
                                 const PipelineConfig& config);
// The re-ask issued after a malformed reply: same request with a corrective
// suffix appended to the user prompt.
PromptRequest corrective_retry(const PromptRequest& base, const std::string& expectation);

inline constexpr const char* kRetryWordExpectation =
    "Reply with exactly one word: directory, file, or function.";
inline constexpr const char* kRetryYesNoExpectation = "Reply with exactly Yes or No.";
inline constexpr const char* kRetryJsonExpectation =
    "Reply with a JSON array of strings and nothing else.";

// Phase 0. Reply is normalized (trim, lowercase, strip punctuation) and must
// equal one of the three labels; re-asks up to config.parse_retries times.
// Throws MalformedModelOutput carrying the raw replies.
GranularityLabel decide_granularity(const Proposal& proposal, const PipelineConfig& config,
                                    CompletionClient& gateway, Provenance* provenance = nullptr);

// Phase 1a over the full repository map. Hallucinated paths are dropped from
// the result and recorded. Result sorted and deduplicated.
std::vector<CodeArtifactId> localize_directories(const Proposal& proposal,
                                                 const RepoSnapshot& snapshot,
                                                 const PipelineConfig& config,
                                                 CompletionClient& gateway,
                                                 Provenance* provenance = nullptr);

// Phase 1b over the map scoped to candidate_dirs. Files must exist and lie
// under a candidate directory. Empty candidate_dirs returns empty without a
// model call.
std::vector<CodeArtifactId> localize_files(const Proposal& proposal, const RepoSnapshot& snapshot,
                                           const std::vector<CodeArtifactId>& candidate_dirs,
                                           const PipelineConfig& config, CompletionClient& gateway,
                                           Provenance* provenance = nullptr);

struct FunctionLocalization {
    std::vector<CodeArtifactId> functions;  // sorted union over files
    std::vector<std::string> failed_files;  // files whose replies stayed malformed
};

// Phase 1c: exactly one prompt per candidate file. A malformed reply for one
// file does not abort the others; those files are flagged instead.
FunctionLocalization localize_functions(const Proposal& proposal, const RepoSnapshot& snapshot,
                                        const std::vector<CodeArtifactId>& candidate_files,
                                        const PipelineConfig& config, CompletionClient& gateway,
                                        Provenance* provenance = nullptr);

// Phase 2: binary relevance judgment on one (proposal, element) pair.
bool decide_link(const Proposal& proposal, const CodeArtifactId& artifact,
                 const std::string& element_text, const PipelineConfig& config,
                 CompletionClient& gateway, Provenance* provenance = nullptr);

// Failure of a phase inside run_pipeline, with the phase identified.
struct PipelineError : Error {
    enum class Kind { ModelOutput, Gateway, Other };
    std::string phase;
    Kind kind;
    PipelineError(std::string phase_, Kind kind_, const std::string& msg)
        : Error("phase '" + phase_ + "': " + msg), phase(std::move(phase_)), kind(kind_) {}
};

// Granularity-aware execution: Directory runs stop after Phase 1a (no link
// decisions); File runs judge each localized file; Function runs localize
// per-file and judge each function.
LinkSet run_pipeline(const Proposal& proposal, const RepoSnapshot& snapshot,
                     const PipelineConfig& config, CompletionClient& gateway);

// Reply-parsing helpers, shared with the baseline and exercised directly in
// tests.
std::string normalize_bare_word(std::string_view reply);
std::optional<std::vector<std::string>> parse_json_string_array(const std::string& reply);

}  // namespace trace
