#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace trace {

enum class ArtifactKind { Directory, File, Function };

std::string_view to_string(ArtifactKind kind);

// Canonical identifier of a directory, file, or function in a repository
// snapshot. Canonical paths are repo-root-relative with "/" separators and no
// "./" or "../" segments; the root directory is the literal "./".
//   Directory: trailing "/"           e.g. "src/net/http/"
//   File:      trailing ".go"         e.g. "src/net/http/server.go"
//   Function:  "<file>::<callable>"   e.g. "src/net/http/server.go::(*Server).Serve"
// Callable names are either `Name` or `(ReceiverType).Name` with the receiver
// variable removed and internal spaces deleted.
struct CodeArtifactId {
    ArtifactKind kind;
    std::string canonical;

    bool operator==(const CodeArtifactId& other) const { return canonical == other.canonical; }
    // Bytewise ordering on the canonical form.
    auto operator<=>(const CodeArtifactId& other) const { return canonical <=> other.canonical; }
};

// Parses an id, inferring the kind from its syntactic form. Throws MalformedId
// when the text matches none of the three forms.
CodeArtifactId parse_artifact_id(std::string_view text);

inline const std::string& format_artifact_id(const CodeArtifactId& id) { return id.canonical; }

// Checked constructors. "." , "./" and "" all denote the root directory.
CodeArtifactId directory_id(std::string_view path);
CodeArtifactId file_id(std::string_view path);
CodeArtifactId function_id(std::string_view file_path, std::string_view callable);

inline CodeArtifactId root_directory() { return {ArtifactKind::Directory, "./"}; }

// Containing directory of a file, function, or non-root directory.
// Returns nullopt for the root directory.
std::optional<CodeArtifactId> parent_directory(const CodeArtifactId& id);

// True when `id` lives in `dir`'s subtree (root contains everything).
bool is_under(const CodeArtifactId& id, const CodeArtifactId& dir);

// File part of a Function id.
CodeArtifactId function_file(const CodeArtifactId& fn);
// Callable part of a Function id ("Name" or "(Recv).Name").
std::string_view function_callable(const CodeArtifactId& fn);

}  // namespace trace
