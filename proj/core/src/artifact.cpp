#include "trace/artifact.hpp"

#include "trace/errors.hpp"

#include <cctype>

namespace trace {

namespace {

bool is_ident_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

bool valid_identifier(std::string_view s) {
    if (s.empty() || !is_ident_start(static_cast<unsigned char>(s.front()))) return false;
    for (unsigned char c : s)
        if (!is_ident_char(c)) return false;
    return true;
}

// Validates a repo-relative path (without any trailing "/" marker).
bool valid_path_segments(std::string_view path) {
    if (path.empty() || path.front() == '/') return false;
    size_t start = 0;
    while (start <= path.size()) {
        size_t slash = path.find('/', start);
        std::string_view seg = path.substr(start, slash == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : slash - start);
        if (seg.empty() || seg == "." || seg == "..") return false;
        if (seg.find('\\') != std::string_view::npos) return false;
        if (seg.find("::") != std::string_view::npos) return false;
        if (slash == std::string_view::npos) break;
        start = slash + 1;
    }
    return true;
}

bool valid_receiver_type(std::string_view recv) {
    if (recv.empty()) return false;
    int bracket = 0;
    for (unsigned char c : recv) {
        if (std::isspace(c)) return false;  // canonical form has spaces deleted
        if (c == '[') ++bracket;
        else if (c == ']' && --bracket < 0) return false;
        else if (c == '(' || c == ')') return false;
    }
    return bracket == 0;
}

bool valid_callable(std::string_view callable) {
    if (callable.empty()) return false;
    if (callable.front() == '(') {
        size_t close = callable.find(')');
        if (close == std::string_view::npos) return false;
        std::string_view recv = callable.substr(1, close - 1);
        if (!valid_receiver_type(recv)) return false;
        if (close + 1 >= callable.size() || callable[close + 1] != '.') return false;
        return valid_identifier(callable.substr(close + 2));
    }
    return valid_identifier(callable);
}

}  // namespace

std::string_view to_string(ArtifactKind kind) {
    switch (kind) {
        case ArtifactKind::Directory: return "directory";
        case ArtifactKind::File: return "file";
        case ArtifactKind::Function: return "function";
    }
    return "?";
}

CodeArtifactId directory_id(std::string_view path) {
    if (path.empty() || path == "." || path == "./") return root_directory();
    std::string_view body = path;
    if (body.back() != '/') throw MalformedId("directory id must end with '/': " + std::string(path));
    body.remove_suffix(1);
    if (!valid_path_segments(body))
        throw MalformedId("invalid directory path: " + std::string(path));
    return {ArtifactKind::Directory, std::string(path)};
}

CodeArtifactId file_id(std::string_view path) {
    if (path.size() < 3 || path.substr(path.size() - 3) != ".go")
        throw MalformedId("file id must end with '.go': " + std::string(path));
    if (!valid_path_segments(path))
        throw MalformedId("invalid file path: " + std::string(path));
    return {ArtifactKind::File, std::string(path)};
}

CodeArtifactId function_id(std::string_view file_path, std::string_view callable) {
    CodeArtifactId file = file_id(file_path);
    if (!valid_callable(callable))
        throw MalformedId("invalid callable name: " + std::string(callable));
    return {ArtifactKind::Function, file.canonical + "::" + std::string(callable)};
}

CodeArtifactId parse_artifact_id(std::string_view text) {
    size_t sep = text.find("::");
    if (sep != std::string_view::npos) {
        if (text.find("::", sep + 2) != std::string_view::npos)
            throw MalformedId("more than one '::' in id: " + std::string(text));
        return function_id(text.substr(0, sep), text.substr(sep + 2));
    }
    if (!text.empty() && text.back() == '/') return directory_id(text);
    if (text.size() >= 3 && text.substr(text.size() - 3) == ".go") return file_id(text);
    throw MalformedId("text matches no artifact id form: " + std::string(text));
}

std::optional<CodeArtifactId> parent_directory(const CodeArtifactId& id) {
    std::string_view path = id.canonical;
    switch (id.kind) {
        case ArtifactKind::Function:
            path = path.substr(0, path.find("::"));
            break;
        case ArtifactKind::Directory:
            if (path == "./") return std::nullopt;
            path.remove_suffix(1);
            break;
        case ArtifactKind::File:
            break;
    }
    size_t slash = path.rfind('/');
    if (slash == std::string_view::npos) return root_directory();
    return CodeArtifactId{ArtifactKind::Directory, std::string(path.substr(0, slash + 1))};
}

bool is_under(const CodeArtifactId& id, const CodeArtifactId& dir) {
    if (dir.kind != ArtifactKind::Directory) return false;
    if (dir.canonical == "./") return true;
    if (&id == &dir || id.canonical == dir.canonical) return true;
    return id.canonical.size() > dir.canonical.size() &&
           id.canonical.compare(0, dir.canonical.size(), dir.canonical) == 0;
}

CodeArtifactId function_file(const CodeArtifactId& fn) {
    if (fn.kind != ArtifactKind::Function)
        throw MalformedId("not a function id: " + fn.canonical);
    return {ArtifactKind::File, fn.canonical.substr(0, fn.canonical.find("::"))};
}

std::string_view function_callable(const CodeArtifactId& fn) {
    if (fn.kind != ArtifactKind::Function)
        throw MalformedId("not a function id: " + fn.canonical);
    std::string_view s = fn.canonical;
    return s.substr(s.find("::") + 2);
}

}  // namespace trace
