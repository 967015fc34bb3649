#include "trace/snapshot_io.hpp"

#include "trace/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace trace {

using ordered_json = nlohmann::ordered_json;

std::string snapshot_to_json(const RepoSnapshot& snapshot) {
    ordered_json doc;
    doc["schema"] = "trace-snapshot/1";
    doc["root_label"] = snapshot.root_label();
    doc["commit_id"] = snapshot.commit_id() ? ordered_json(*snapshot.commit_id()) : ordered_json(nullptr);
    auto& dirs = doc["directories"] = ordered_json::array();
    for (const auto& d : snapshot.directories()) dirs.push_back(d.canonical);
    auto& files = doc["files"] = ordered_json::array();
    for (const auto& f : snapshot.files()) files.push_back(f.canonical);
    auto& functions = doc["functions"] = ordered_json::object();
    auto& contents = doc["file_contents"] = ordered_json::object();
    for (const auto& f : snapshot.files()) {
        auto& sigs = functions[f.canonical] = ordered_json::array();
        for (const auto& sig : snapshot.functions_of(f)) {
            ordered_json s;
            s["name"] = sig.name;
            s["receiver_type"] = sig.receiver_type ? ordered_json(*sig.receiver_type) : ordered_json(nullptr);
            s["receiver_verbatim"] = sig.receiver_verbatim;
            s["line_start"] = sig.line_start;
            s["line_end"] = sig.line_end;
            s["skeleton_line"] = sig.skeleton_line;
            sigs.push_back(std::move(s));
        }
        contents[f.canonical] = snapshot.content_of(f);
    }
    auto& errors = doc["scan_errors"] = ordered_json::array();
    for (const auto& e : snapshot.scan_errors())
        errors.push_back(ordered_json{{"file", e.file}, {"message", e.message}});
    return doc.dump(2) + "\n";
}

RepoSnapshot snapshot_from_json(std::string_view json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid snapshot json: ") + e.what());
    }
    try {
        RepoSnapshot snap;
        snap.root_label_ = doc.at("root_label").get<std::string>();
        if (!doc.at("commit_id").is_null())
            snap.commit_id_ = doc.at("commit_id").get<std::string>();
        for (const auto& d : doc.at("directories"))
            snap.directories_.push_back(directory_id(d.get<std::string>()));
        for (const auto& f : doc.at("files")) {
            CodeArtifactId file = file_id(f.get<std::string>());
            snap.contents_.push_back(doc.at("file_contents").at(file.canonical).get<std::string>());
            std::vector<FunctionSig> sigs;
            for (const auto& s : doc.at("functions").at(file.canonical)) {
                FunctionSig sig;
                sig.file = file;
                sig.name = s.at("name").get<std::string>();
                if (!s.at("receiver_type").is_null())
                    sig.receiver_type = s.at("receiver_type").get<std::string>();
                sig.receiver_verbatim = s.at("receiver_verbatim").get<std::string>();
                sig.line_start = s.at("line_start").get<int>();
                sig.line_end = s.at("line_end").get<int>();
                sig.skeleton_line = s.at("skeleton_line").get<std::string>();
                sigs.push_back(std::move(sig));
            }
            snap.functions_.push_back(std::move(sigs));
            snap.files_.push_back(std::move(file));
        }
        for (const auto& e : doc.at("scan_errors"))
            snap.scan_errors_.push_back({e.at("file").get<std::string>(),
                                         e.at("message").get<std::string>()});
        return snap;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("snapshot json missing fields: ") + e.what());
    }
}

void save_snapshot(const RepoSnapshot& snapshot, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write snapshot: " + path.string());
    out << snapshot_to_json(snapshot);
}

RepoSnapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read snapshot: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return snapshot_from_json(text);
}

}  // namespace trace
