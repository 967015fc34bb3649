#pragma once

#include "trace/go_scan.hpp"

#include <span>
#include <string>

namespace trace {

// Compact tree map of the snapshot: root line "./", 4-space indent per level,
// subdirectories before files, both sorted ascending bytewise. An empty
// snapshot renders the empty string. When `scope` is given, only the scoped
// subtrees are rendered in full; ancestor directory lines are kept for
// context (the root line only appears when "./" itself is scoped).
// Throws UnknownArtifact when a scope id is not a snapshot directory.
std::string render_tree_map(const RepoSnapshot& snapshot);
std::string render_tree_map(const RepoSnapshot& snapshot,
                            std::span<const CodeArtifactId> scope);

// File compressed to its signature lines: a header line with the canonical
// path, then one skeleton line per function in source order.
// Throws UnknownArtifact for files absent from the snapshot.
std::string render_file_skeleton(const RepoSnapshot& snapshot, const CodeArtifactId& file);

}  // namespace trace
