#include "trace/granularity.hpp"

namespace trace {

std::string_view to_string(GranularityLabel label) {
    switch (label) {
        case GranularityLabel::Directory: return "directory";
        case GranularityLabel::File: return "file";
        case GranularityLabel::Function: return "function";
    }
    return "?";
}

std::optional<GranularityLabel> granularity_from_string(std::string_view text) {
    if (text == "directory") return GranularityLabel::Directory;
    if (text == "file") return GranularityLabel::File;
    if (text == "function") return GranularityLabel::Function;
    return std::nullopt;
}

ArtifactKind kind_of(GranularityLabel label) {
    switch (label) {
        case GranularityLabel::Directory: return ArtifactKind::Directory;
        case GranularityLabel::File: return ArtifactKind::File;
        case GranularityLabel::Function: return ArtifactKind::Function;
    }
    return ArtifactKind::Directory;
}

GranularityLabel granularity_of(ArtifactKind kind) {
    switch (kind) {
        case ArtifactKind::Directory: return GranularityLabel::Directory;
        case ArtifactKind::File: return GranularityLabel::File;
        case ArtifactKind::Function: return GranularityLabel::Function;
    }
    return GranularityLabel::Directory;
}

}  // namespace trace
