#include "trace/corpus.hpp"

#include "trace/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace trace {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(ProposalStatus status) {
    return status == ProposalStatus::Accepted ? "accepted" : "declined";
}

const Proposal* Dataset::find_proposal(long id) const {
    auto it = std::lower_bound(proposals.begin(), proposals.end(), id,
                               [](const Proposal& p, long v) { return p.id < v; });
    if (it == proposals.end() || it->id != id) return nullptr;
    return &*it;
}

std::vector<const GroundTruth*> Dataset::truths_for(long id) const {
    std::vector<const GroundTruth*> out;
    for (const auto& gt : ground_truths)
        if (gt.proposal_id == id) out.push_back(&gt);
    return out;
}

namespace {

// Applies `fn` to each non-empty line; rethrows json errors as ParseError
// with the 1-based line number.
void for_each_jsonl_line(const std::filesystem::path& path,
                         const std::function<void(const ordered_json&, int)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json doc;
        try {
            doc = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.filename().string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
        try {
            fn(doc, lineno);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.filename().string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
}

ProposalStatus parse_status(const std::string& s, const std::filesystem::path& path, int lineno) {
    if (s == "accepted") return ProposalStatus::Accepted;
    if (s == "declined") return ProposalStatus::Declined;
    throw ParseError(path.filename().string() + ":" + std::to_string(lineno) +
                     ": unknown status '" + s + "'");
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    Dataset ds;

    fs::path manifest = dir / "dataset.json";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest, std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        try {
            ordered_json doc = ordered_json::parse(text);
            if (doc.contains("repo_commit") && !doc["repo_commit"].is_null())
                ds.repo_commit = doc["repo_commit"].get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("dataset.json: " + std::string(e.what()));
        }
    }

    fs::path proposals_path = dir / "proposals.jsonl";
    for_each_jsonl_line(proposals_path, [&](const ordered_json& doc, int lineno) {
        Proposal p;
        p.id = doc.at("id").get<long>();
        if (p.id <= 0)
            throw ParseError("proposals.jsonl:" + std::to_string(lineno) +
                             ": proposal id must be positive");
        p.title = doc.at("title").get<std::string>();
        p.status = parse_status(doc.at("status").get<std::string>(), proposals_path, lineno);
        for (const auto& m : doc.at("messages")) {
            Message msg;
            msg.author = m.at("author").get<std::string>();
            msg.body = m.at("body").get<std::string>();
            msg.created_at = m.value("created_at", "");
            p.messages.push_back(std::move(msg));
        }
        if (p.messages.empty())
            throw ParseError("proposals.jsonl:" + std::to_string(lineno) +
                             ": proposal " + std::to_string(p.id) + " has no messages");
        if (doc.contains("url") && !doc["url"].is_null())
            p.url = doc["url"].get<std::string>();
        ds.proposals.push_back(std::move(p));
    });

    std::stable_sort(ds.proposals.begin(), ds.proposals.end(),
                     [](const Proposal& a, const Proposal& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < ds.proposals.size(); ++i)
        if (ds.proposals[i].id == ds.proposals[i - 1].id)
            throw ValidationError("duplicate proposal id " + std::to_string(ds.proposals[i].id));

    fs::path truth_path = dir / "ground_truth.jsonl";
    if (fs::exists(truth_path)) {
        for_each_jsonl_line(truth_path, [&](const ordered_json& doc, int lineno) {
            GroundTruth gt;
            gt.proposal_id = doc.at("proposal_id").get<long>();
            auto gran = granularity_from_string(doc.at("granularity").get<std::string>());
            if (!gran)
                throw ParseError("ground_truth.jsonl:" + std::to_string(lineno) +
                                 ": unknown granularity");
            gt.granularity = *gran;
            for (const auto& link : doc.at("links"))
                gt.links.push_back(parse_artifact_id(link.get<std::string>()));
            std::sort(gt.links.begin(), gt.links.end());
            gt.links.erase(std::unique(gt.links.begin(), gt.links.end()), gt.links.end());
            std::string source = doc.value("source", "manual");
            gt.source = source == "gerrit" ? LabelSource::GerritDerived : LabelSource::Manual;
            ds.ground_truths.push_back(std::move(gt));
        });
        for (const auto& gt : ds.ground_truths)
            if (!ds.find_proposal(gt.proposal_id))
                throw ValidationError("ground truth references unknown proposal " +
                                      std::to_string(gt.proposal_id));
    }
    std::stable_sort(ds.ground_truths.begin(), ds.ground_truths.end(),
                     [](const GroundTruth& a, const GroundTruth& b) {
                         if (a.proposal_id != b.proposal_id) return a.proposal_id < b.proposal_id;
                         return static_cast<int>(a.granularity) < static_cast<int>(b.granularity);
                     });

    fs::path labels_path = dir / "aux_labels.jsonl";
    if (fs::exists(labels_path)) {
        for_each_jsonl_line(labels_path, [&](const ordered_json& doc, int) {
            long id = doc.at("proposal_id").get<long>();
            if (!ds.find_proposal(id))
                throw ValidationError("aux label references unknown proposal " +
                                      std::to_string(id));
            ds.aux_labels[id][doc.at("label").get<std::string>()] =
                doc.at("value").get<std::string>();
        });
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "dataset.json", std::ios::binary);
        if (!out) throw IoError("cannot write dataset.json");
        ordered_json doc;
        doc["repo_commit"] =
            dataset.repo_commit ? ordered_json(*dataset.repo_commit) : ordered_json(nullptr);
        out << doc.dump(2) << "\n";
    }
    {
        std::ofstream out(dir / "proposals.jsonl", std::ios::binary);
        if (!out) throw IoError("cannot write proposals.jsonl");
        for (const auto& p : dataset.proposals) {
            ordered_json doc;
            doc["id"] = p.id;
            doc["title"] = p.title;
            doc["status"] = std::string(to_string(p.status));
            auto& msgs = doc["messages"] = ordered_json::array();
            for (const auto& m : p.messages)
                msgs.push_back(ordered_json{
                    {"author", m.author}, {"body", m.body}, {"created_at", m.created_at}});
            if (p.url) doc["url"] = *p.url;
            out << doc.dump() << "\n";
        }
    }
    {
        std::ofstream out(dir / "ground_truth.jsonl", std::ios::binary);
        if (!out) throw IoError("cannot write ground_truth.jsonl");
        for (const auto& gt : dataset.ground_truths) {
            ordered_json doc;
            doc["proposal_id"] = gt.proposal_id;
            doc["granularity"] = std::string(to_string(gt.granularity));
            auto& links = doc["links"] = ordered_json::array();
            for (const auto& link : gt.links) links.push_back(link.canonical);
            doc["source"] = gt.source == LabelSource::GerritDerived ? "gerrit" : "manual";
            out << doc.dump() << "\n";
        }
    }
    {
        std::ofstream out(dir / "aux_labels.jsonl", std::ios::binary);
        if (!out) throw IoError("cannot write aux_labels.jsonl");
        for (const auto& [id, labels] : dataset.aux_labels)
            for (const auto& [name, value] : labels) {
                ordered_json doc;
                doc["proposal_id"] = id;
                doc["label"] = name;
                doc["value"] = value;
                out << doc.dump() << "\n";
            }
    }
}

std::vector<GerritChange> load_gerrit_changes(const std::filesystem::path& path) {
    std::vector<GerritChange> changes;
    for_each_jsonl_line(path, [&](const ordered_json& doc, int) {
        GerritChange ch;
        ch.change_key = doc.at("change_key").get<std::string>();
        ch.status = doc.at("status").get<std::string>();
        ch.commit_message = doc.at("commit_message").get<std::string>();
        for (const auto& f : doc.at("changed_files"))
            ch.changed_files.push_back(f.get<std::string>());
        changes.push_back(std::move(ch));
    });
    return changes;
}

void save_gerrit_changes(const std::vector<GerritChange>& changes,
                         const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& ch : changes) {
        ordered_json doc;
        doc["change_key"] = ch.change_key;
        doc["status"] = ch.status;
        doc["commit_message"] = ch.commit_message;
        doc["changed_files"] = ch.changed_files;
        out << doc.dump() << "\n";
    }
}

Discussion concat_discussion(const Proposal& proposal) {
    Discussion d;
    d.text = proposal.title;
    d.text.push_back('\n');
    for (const auto& m : proposal.messages) {
        d.text += "--- " + m.author + " ---\n";
        d.text += m.body;
        d.text.push_back('\n');
    }
    bool in_token = false;
    for (unsigned char c : d.text) {
        if (std::isspace(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++d.length;
        }
    }
    return d;
}

bool mentions_proposal(const std::string& text, long proposal_id) {
    std::string needle = "#" + std::to_string(proposal_id);
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        std::size_t end = pos + needle.size();
        bool left_ok = pos == 0 || !std::isdigit(static_cast<unsigned char>(text[pos - 1]));
        bool right_ok =
            end >= text.size() || !std::isdigit(static_cast<unsigned char>(text[end]));
        if (left_ok && right_ok) return true;
        pos = end;
    }
    return false;
}

GroundTruthExtraction extract_ground_truth(const std::vector<GerritChange>& changes,
                                           const std::vector<Proposal>& proposals,
                                           const RepoSnapshot& snapshot) {
    GroundTruthExtraction result;
    std::vector<const GerritChange*> merged;
    for (const auto& change : changes) {
        if (change.is_merged()) {
            merged.push_back(&change);
        } else {
            result.skipped.push_back({change.change_key, "not MERGED (status " + change.status + ")"});
        }
    }
    for (const auto& proposal : proposals) {
        if (proposal.status != ProposalStatus::Accepted) continue;
        std::set<CodeArtifactId> files;
        for (const GerritChange* change : merged) {
            if (!mentions_proposal(change->commit_message, proposal.id)) continue;
            for (const auto& path : change->changed_files) {
                if (path.size() < 3 || path.compare(path.size() - 3, 3, ".go") != 0) {
                    result.skipped.push_back({change->change_key, "non-go file " + path});
                    continue;
                }
                CodeArtifactId id;
                try {
                    id = file_id(path);
                } catch (const MalformedId&) {
                    result.skipped.push_back({change->change_key, "malformed path " + path});
                    continue;
                }
                if (!snapshot.has_file(id)) {
                    result.skipped.push_back({change->change_key, "file not in snapshot " + path});
                    continue;
                }
                files.insert(std::move(id));
            }
        }
        if (files.empty()) continue;

        GroundTruth file_truth;
        file_truth.proposal_id = proposal.id;
        file_truth.granularity = GranularityLabel::File;
        file_truth.source = LabelSource::GerritDerived;
        std::set<CodeArtifactId> dirs;
        for (const auto& f : files) {
            file_truth.links.push_back(f);
            dirs.insert(*parent_directory(f));
        }
        GroundTruth dir_truth;
        dir_truth.proposal_id = proposal.id;
        dir_truth.granularity = GranularityLabel::Directory;
        dir_truth.source = LabelSource::GerritDerived;
        dir_truth.links.assign(dirs.begin(), dirs.end());

        result.truths.push_back(std::move(file_truth));
        result.truths.push_back(std::move(dir_truth));
    }
    return result;
}

ValidationReport validate_dataset(const Dataset& dataset, const RepoSnapshot& snapshot) {
    ValidationReport report;
    auto add = [&](std::string issue, long id, std::string detail) {
        ++report.counts[issue];
        report.findings.push_back({std::move(issue), id, std::move(detail)});
    };
    for (const auto& gt : dataset.ground_truths) {
        for (const auto& link : gt.links) {
            if (link.kind != kind_of(gt.granularity))
                add("kind_mismatch", gt.proposal_id,
                    link.canonical + " in " + std::string(to_string(gt.granularity)) +
                        "-level truth");
            else if (!snapshot.has_artifact(link))
                add("unknown_artifact", gt.proposal_id, link.canonical);
        }
    }
    for (const auto& p : dataset.proposals)
        if (dataset.truths_for(p.id).empty())
            add("missing_ground_truth", p.id, "no ground-truth record");
    return report;
}

}  // namespace trace
