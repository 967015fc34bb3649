#pragma once

#include "trace/artifact.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trace {

// One top-level function or method declaration with an executable body.
// Interface method specs and bodyless (assembly-backed) declarations are
// never represented; function literals belong to their enclosing declaration.
struct FunctionSig {
    CodeArtifactId file;
    std::string name;
    std::optional<std::string> receiver_type;  // canonical: variable stripped, spaces deleted
    int line_start = 0;                        // 1-based, line of the `func` keyword
    int line_end = 0;                          // 1-based, line of the body's closing brace
    std::string skeleton_line;                 // `func Name(...) { ... }` form
    std::string receiver_verbatim;             // original receiver text, empty for plain funcs

    // "Name" or "(ReceiverType).Name".
    std::string callable() const;
    CodeArtifactId artifact() const;
};

struct ScanFileError {
    std::string file;  // canonical file path
    std::string message;
};

// Immutable index of a scanned Go codebase. All collections are sorted
// ascending bytewise by canonical id; safe to share across threads.
class RepoSnapshot {
public:
    RepoSnapshot() = default;

    // `files` holds (repo-relative path, content) pairs in any order.
    static RepoSnapshot from_files(std::string root_label,
                                   std::vector<std::pair<std::string, std::string>> files,
                                   std::optional<std::string> commit_id = std::nullopt);

    const std::string& root_label() const { return root_label_; }
    const std::optional<std::string>& commit_id() const { return commit_id_; }
    const std::vector<CodeArtifactId>& directories() const { return directories_; }
    const std::vector<CodeArtifactId>& files() const { return files_; }
    const std::vector<ScanFileError>& scan_errors() const { return scan_errors_; }

    bool has_directory(const CodeArtifactId& dir) const;
    bool has_file(const CodeArtifactId& file) const;
    bool has_artifact(const CodeArtifactId& id) const;

    // Throw UnknownArtifact for files absent from the snapshot.
    const std::vector<FunctionSig>& functions_of(const CodeArtifactId& file) const;
    const std::string& content_of(const CodeArtifactId& file) const;

    const FunctionSig* find_function(const CodeArtifactId& fn) const;
    // Source text of a function's [line_start, line_end] span.
    std::string function_span_text(const CodeArtifactId& fn) const;

    std::size_t function_count() const;

private:
    std::size_t file_index(const CodeArtifactId& file) const;  // throws UnknownArtifact

    std::string root_label_;
    std::optional<std::string> commit_id_;
    std::vector<CodeArtifactId> directories_;
    std::vector<CodeArtifactId> files_;
    std::vector<std::string> contents_;               // parallel to files_
    std::vector<std::vector<FunctionSig>> functions_; // parallel to files_
    std::vector<ScanFileError> scan_errors_;

    friend RepoSnapshot snapshot_from_json(std::string_view json_text);
    friend RepoSnapshot scan_repository(const std::filesystem::path&,
                                        const std::vector<std::string>&,
                                        std::optional<std::string>);
};

// Extracts every top-level `func` declaration with a brace-delimited body, in
// source order. The input need not be compilable; strings, raw strings, rune
// literals, and comments never confuse brace tracking. Throws ParseError when
// braces are unbalanced at end of file.
std::vector<FunctionSig> extract_function_signatures(std::string_view file_content,
                                                     const CodeArtifactId& file);

// Scans a filesystem tree for `.go` files. Exclude globs are matched against
// the repo-relative path of each file and of each of its ancestor directories;
// `*` does not cross "/", `**` does. Throws IoError when root is unreadable.
// Per-file extraction failures are recorded in scan_errors(), not thrown.
RepoSnapshot scan_repository(const std::filesystem::path& root_path,
                             const std::vector<std::string>& exclude_globs = {},
                             std::optional<std::string> commit_id = std::nullopt);

}  // namespace trace
