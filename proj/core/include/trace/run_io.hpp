#pragma once

#include "trace/pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace trace {

// One links.jsonl row. Failed rows keep whatever granularity was decided
// before the failing phase (nullopt when Phase 0 itself failed).
struct LinkRow {
    long proposal_id = 0;
    std::optional<GranularityLabel> granularity;
    std::vector<CodeArtifactId> links;
    std::string status = "ok";       // "ok" | "failed"
    std::string failure_phase;       // empty unless failed

    static LinkRow from_link_set(const LinkSet& set);
    LinkSet to_link_set() const;  // requires granularity present
};

std::string link_row_to_jsonl(const LinkRow& row);
LinkRow link_row_from_jsonl(const std::string& line);  // throws ParseError

std::vector<LinkRow> load_links_jsonl(const std::filesystem::path& path);
void save_links_jsonl(const std::vector<LinkRow>& rows, const std::filesystem::path& path);

// One provenance.jsonl line per phase record.
void write_provenance_jsonl(std::ostream& out, long proposal_id, const Provenance& provenance);

}  // namespace trace
