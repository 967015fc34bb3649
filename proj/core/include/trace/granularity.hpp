#pragma once

#include "trace/artifact.hpp"

#include <optional>
#include <string_view>

namespace trace {

// Level of code artifact a proposal links to. Serialized lowercase.
enum class GranularityLabel { Directory, File, Function };

std::string_view to_string(GranularityLabel label);
std::optional<GranularityLabel> granularity_from_string(std::string_view text);

ArtifactKind kind_of(GranularityLabel label);
GranularityLabel granularity_of(ArtifactKind kind);

}  // namespace trace
