#pragma once

#include "trace/go_scan.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace trace {

// Single JSON document with stable field order; two scans of an unchanged
// tree serialize byte-identically.
std::string snapshot_to_json(const RepoSnapshot& snapshot);
RepoSnapshot snapshot_from_json(std::string_view json_text);  // throws ParseError

void save_snapshot(const RepoSnapshot& snapshot, const std::filesystem::path& path);
RepoSnapshot load_snapshot(const std::filesystem::path& path);  // throws IoError/ParseError

}  // namespace trace
