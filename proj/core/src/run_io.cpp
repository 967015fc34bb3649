#include "trace/run_io.hpp"

#include "trace/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <ostream>

namespace trace {

using ordered_json = nlohmann::ordered_json;

LinkRow LinkRow::from_link_set(const LinkSet& set) {
    LinkRow row;
    row.proposal_id = set.proposal_id;
    row.granularity = set.granularity;
    row.links = set.links;
    row.status = "ok";
    return row;
}

LinkSet LinkRow::to_link_set() const {
    if (!granularity) throw ValidationError("link row for proposal " +
                                            std::to_string(proposal_id) + " has no granularity");
    LinkSet set;
    set.proposal_id = proposal_id;
    set.granularity = *granularity;
    set.links = links;
    return set;
}

std::string link_row_to_jsonl(const LinkRow& row) {
    ordered_json doc;
    doc["proposal_id"] = row.proposal_id;
    doc["granularity"] = row.granularity ? ordered_json(std::string(to_string(*row.granularity)))
                                         : ordered_json(nullptr);
    auto& links = doc["links"] = ordered_json::array();
    for (const auto& id : row.links) links.push_back(id.canonical);
    doc["status"] = row.status;
    doc["failure_phase"] =
        row.failure_phase.empty() ? ordered_json(nullptr) : ordered_json(row.failure_phase);
    return doc.dump();
}

LinkRow link_row_from_jsonl(const std::string& line) {
    try {
        ordered_json doc = ordered_json::parse(line);
        LinkRow row;
        row.proposal_id = doc.at("proposal_id").get<long>();
        if (!doc.at("granularity").is_null()) {
            auto g = granularity_from_string(doc.at("granularity").get<std::string>());
            if (!g) throw ParseError("unknown granularity in links row");
            row.granularity = *g;
        }
        for (const auto& link : doc.at("links"))
            row.links.push_back(parse_artifact_id(link.get<std::string>()));
        row.status = doc.at("status").get<std::string>();
        if (doc.contains("failure_phase") && !doc.at("failure_phase").is_null())
            row.failure_phase = doc.at("failure_phase").get<std::string>();
        return row;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid links row: ") + e.what());
    }
}

std::vector<LinkRow> load_links_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<LinkRow> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            rows.push_back(link_row_from_jsonl(line));
        } catch (const ParseError& e) {
            throw ParseError(path.filename().string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
    return rows;
}

void save_links_jsonl(const std::vector<LinkRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& row : rows) out << link_row_to_jsonl(row) << "\n";
}

void write_provenance_jsonl(std::ostream& out, long proposal_id, const Provenance& provenance) {
    for (const auto& record : provenance) {
        ordered_json doc;
        doc["proposal_id"] = proposal_id;
        doc["phase"] = record.phase;
        doc["unit"] = record.unit;
        doc["raw_replies"] = record.raw_replies;
        doc["accepted"] = record.accepted;
        auto& dropped = doc["dropped"] = ordered_json::array();
        for (const auto& d : record.dropped)
            dropped.push_back(ordered_json{{"candidate", d.candidate}, {"reason", d.reason}});
        doc["failed"] = record.failed;
        out << doc.dump() << "\n";
    }
}

}  // namespace trace
