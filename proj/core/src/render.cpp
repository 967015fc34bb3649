#include "trace/render.hpp"

#include "trace/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace trace {

namespace {

std::string_view basename_of_dir(std::string_view canonical) {
    // "src/net/http/" -> "http/"
    if (canonical == "./") return canonical;
    std::size_t slash = canonical.rfind('/', canonical.size() - 2);
    return slash == std::string_view::npos ? canonical : canonical.substr(slash + 1);
}

std::string_view basename_of_file(std::string_view canonical) {
    std::size_t slash = canonical.rfind('/');
    return slash == std::string_view::npos ? canonical : canonical.substr(slash + 1);
}

struct TreeIndex {
    std::map<std::string, std::vector<const CodeArtifactId*>> child_dirs;
    std::map<std::string, std::vector<const CodeArtifactId*>> child_files;
};

TreeIndex build_tree_index(const RepoSnapshot& snapshot) {
    TreeIndex idx;
    for (const auto& dir : snapshot.directories()) {
        if (auto parent = parent_directory(dir))
            idx.child_dirs[parent->canonical].push_back(&dir);
    }
    for (const auto& file : snapshot.files()) {
        auto parent = parent_directory(file);
        idx.child_files[parent->canonical].push_back(&file);
    }
    return idx;
}

void render_dir(const TreeIndex& idx, const CodeArtifactId& dir, int depth,
                const std::set<std::string>* rendered_dirs,
                const std::set<std::string>* rendered_file_parents, std::string& out) {
    out.append(static_cast<std::size_t>(depth) * 4, ' ');
    out.append(basename_of_dir(dir.canonical));
    out.push_back('\n');
    if (auto it = idx.child_dirs.find(dir.canonical); it != idx.child_dirs.end()) {
        for (const CodeArtifactId* child : it->second) {
            if (rendered_dirs && !rendered_dirs->count(child->canonical)) continue;
            render_dir(idx, *child, depth + 1, rendered_dirs, rendered_file_parents, out);
        }
    }
    if (rendered_file_parents && !rendered_file_parents->count(dir.canonical)) return;
    if (auto it = idx.child_files.find(dir.canonical); it != idx.child_files.end()) {
        for (const CodeArtifactId* file : it->second) {
            out.append(static_cast<std::size_t>(depth + 1) * 4, ' ');
            out.append(basename_of_file(file->canonical));
            out.push_back('\n');
        }
    }
}

}  // namespace

std::string render_tree_map(const RepoSnapshot& snapshot) {
    if (snapshot.directories().empty()) return "";
    TreeIndex idx = build_tree_index(snapshot);
    std::string out;
    render_dir(idx, root_directory(), 0, nullptr, nullptr, out);
    return out;
}

std::string render_tree_map(const RepoSnapshot& snapshot,
                            std::span<const CodeArtifactId> scope) {
    for (const auto& id : scope)
        if (!snapshot.has_directory(id))
            throw UnknownArtifact("scope directory not in snapshot: " + id.canonical);
    if (snapshot.directories().empty() || scope.empty()) return "";

    // Directories rendered: descendants-or-self of a scoped dir, plus bare
    // ancestor lines down to each scoped dir. Files appear only inside scoped
    // subtrees. The root line appears only when "./" is itself in scope.
    std::set<std::string> rendered_dirs;
    std::set<std::string> subtree_dirs;
    for (const auto& dir : snapshot.directories())
        for (const auto& s : scope)
            if (is_under(dir, s)) {
                subtree_dirs.insert(dir.canonical);
                break;
            }
    rendered_dirs = subtree_dirs;
    for (const auto& s : scope)
        for (auto p = parent_directory(s); p; p = parent_directory(*p))
            if (p->canonical != "./") rendered_dirs.insert(p->canonical);

    TreeIndex idx = build_tree_index(snapshot);
    std::string out;
    bool root_scoped = subtree_dirs.count("./") > 0;
    if (root_scoped) {
        render_dir(idx, root_directory(), 0, &rendered_dirs, &subtree_dirs, out);
        return out;
    }
    if (auto it = idx.child_dirs.find("./"); it != idx.child_dirs.end())
        for (const CodeArtifactId* child : it->second)
            if (rendered_dirs.count(child->canonical))
                render_dir(idx, *child, 0, &rendered_dirs, &subtree_dirs, out);
    return out;
}

std::string render_file_skeleton(const RepoSnapshot& snapshot, const CodeArtifactId& file) {
    if (!snapshot.has_file(file))
        throw UnknownArtifact("file not in snapshot: " + file.canonical);
    std::string out = file.canonical;
    out.push_back('\n');
    for (const auto& sig : snapshot.functions_of(file)) {
        out.append(sig.skeleton_line);
        out.push_back('\n');
    }
    return out;
}

}  // namespace trace
