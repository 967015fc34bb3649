#pragma once

#include "trace/artifact.hpp"
#include "trace/go_scan.hpp"
#include "trace/granularity.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trace {

enum class ProposalStatus { Accepted, Declined };

std::string_view to_string(ProposalStatus status);

struct Message {
    std::string author;
    std::string body;
    std::string created_at;  // RFC3339 text, kept verbatim
};

// One discussion thread, messages in original order.
struct Proposal {
    long id = 0;
    std::string title;
    ProposalStatus status = ProposalStatus::Declined;
    std::vector<Message> messages;
    std::optional<std::string> url;
};

enum class LabelSource { Manual, GerritDerived };

struct GroundTruth {
    long proposal_id = 0;
    GranularityLabel granularity = GranularityLabel::File;
    std::vector<CodeArtifactId> links;  // sorted, unique
    LabelSource source = LabelSource::Manual;
};

struct GerritChange {
    std::string change_key;
    std::string status;  // "MERGED" or anything else
    std::string commit_message;
    std::vector<std::string> changed_files;  // repo-relative, "/" separators

    bool is_merged() const { return status == "MERGED"; }
};

struct Dataset {
    std::optional<std::string> repo_commit;
    std::vector<Proposal> proposals;          // sorted by id
    std::vector<GroundTruth> ground_truths;   // sorted by (proposal_id, granularity)
    std::map<long, std::map<std::string, std::string>> aux_labels;

    const Proposal* find_proposal(long id) const;
    std::vector<const GroundTruth*> truths_for(long id) const;
};

// Reads proposals.jsonl (required) plus ground_truth.jsonl, aux_labels.jsonl
// and dataset.json (all optional) from `dir`. Throws ParseError with the
// offending line number, ValidationError on duplicate ids or dangling
// references.
Dataset load_dataset(const std::filesystem::path& dir);

// Canonical JSONL rendering; load_dataset(save_dataset(d)) == d.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

std::vector<GerritChange> load_gerrit_changes(const std::filesystem::path& path);
void save_gerrit_changes(const std::vector<GerritChange>& changes,
                         const std::filesystem::path& path);

struct Discussion {
    std::string text;
    std::size_t length = 0;  // whitespace-delimited tokens of `text`
};

// Canonical rendering: title line, then each message as
// "--- <author> ---\n<body>\n" in order.
Discussion concat_discussion(const Proposal& proposal);

struct GroundTruthExtraction {
    std::vector<GroundTruth> truths;
    struct Skip {
        std::string change_key;
        std::string reason;
    };
    std::vector<Skip> skipped;
};

// Gerrit-based ground truth for accepted proposals: MERGED changes whose
// commit message contains `#<id>` at a token boundary contribute their
// changed `.go` files (when present in the snapshot). Emits one File-level
// truth and one derived Directory-level truth per matched proposal.
GroundTruthExtraction extract_ground_truth(const std::vector<GerritChange>& changes,
                                           const std::vector<Proposal>& proposals,
                                           const RepoSnapshot& snapshot);

// True when `text` contains "#<id>" not followed or preceded by a digit.
bool mentions_proposal(const std::string& text, long proposal_id);

struct ValidationFinding {
    std::string issue;  // "unknown_artifact" | "kind_mismatch" | "missing_ground_truth"
    long proposal_id = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;
    std::map<std::string, std::size_t> counts;  // per issue class

    bool clean() const { return findings.empty(); }
};

ValidationReport validate_dataset(const Dataset& dataset, const RepoSnapshot& snapshot);

}  // namespace trace
