#include "trace/go_scan.hpp"

#include "trace/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace trace {

namespace {

bool is_ident_start(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || u >= 0x80;
}

bool is_ident_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || u >= 0x80;
}

struct Cursor {
    std::string_view src;
    std::size_t pos = 0;
    int line = 1;

    bool eof() const { return pos >= src.size(); }
    char peek(std::size_t off = 0) const {
        return pos + off < src.size() ? src[pos + off] : '\0';
    }
    void advance() {
        if (src[pos] == '\n') ++line;
        ++pos;
    }
};

void skip_line_comment(Cursor& c) {
    while (!c.eof() && c.peek() != '\n') c.advance();
}

// Returns true when the comment spans a newline (matters for implicit
// statement termination after a signature).
bool skip_block_comment(Cursor& c) {
    bool multiline = false;
    c.advance();  // '/'
    c.advance();  // '*'
    while (!c.eof()) {
        if (c.peek() == '\n') multiline = true;
        if (c.peek() == '*' && c.peek(1) == '/') {
            c.advance();
            c.advance();
            return multiline;
        }
        c.advance();
    }
    return multiline;
}

// Interpreted string literal; Go strings cannot span lines, so a newline is
// treated as a (lenient) terminator for broken input.
void skip_interpreted_string(Cursor& c) {
    c.advance();  // opening quote
    while (!c.eof()) {
        char ch = c.peek();
        if (ch == '\\' && c.pos + 1 < c.src.size()) {
            c.advance();
            c.advance();
            continue;
        }
        if (ch == '"') {
            c.advance();
            return;
        }
        if (ch == '\n') return;
        c.advance();
    }
}

void skip_raw_string(Cursor& c) {
    c.advance();  // opening backtick
    while (!c.eof()) {
        if (c.peek() == '`') {
            c.advance();
            return;
        }
        c.advance();
    }
}

void skip_rune(Cursor& c) {
    c.advance();  // opening quote
    while (!c.eof()) {
        char ch = c.peek();
        if (ch == '\\' && c.pos + 1 < c.src.size()) {
            c.advance();
            c.advance();
            continue;
        }
        if (ch == '\'') {
            c.advance();
            return;
        }
        if (ch == '\n') return;
        c.advance();
    }
}

// Consumes a balanced delimiter group, cursor at the opener. Strings, runes,
// and comments inside the group never count toward nesting. Returns false at
// EOF without the closer.
bool skip_balanced(Cursor& c, char open, char close) {
    int depth = 0;
    while (!c.eof()) {
        char ch = c.peek();
        if (ch == '/' && c.peek(1) == '/') {
            skip_line_comment(c);
            continue;
        }
        if (ch == '/' && c.peek(1) == '*') {
            skip_block_comment(c);
            continue;
        }
        if (ch == '"') {
            skip_interpreted_string(c);
            continue;
        }
        if (ch == '`') {
            skip_raw_string(c);
            continue;
        }
        if (ch == '\'') {
            skip_rune(c);
            continue;
        }
        if (ch == open) {
            ++depth;
        } else if (ch == close) {
            --depth;
            if (depth == 0) {
                c.advance();
                return true;
            }
        }
        c.advance();
    }
    return false;
}

void skip_space_and_comments(Cursor& c) {
    while (!c.eof()) {
        char ch = c.peek();
        if (std::isspace(static_cast<unsigned char>(ch))) {
            c.advance();
        } else if (ch == '/' && c.peek(1) == '/') {
            skip_line_comment(c);
        } else if (ch == '/' && c.peek(1) == '*') {
            skip_block_comment(c);
        } else {
            return;
        }
    }
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string strip_comments(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (i < s.size() && s[i] != '\n') ++i;
            out += ' ';
        } else if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            i += 2;
            while (i + 1 < s.size() && !(s[i] == '*' && s[i + 1] == '/')) ++i;
            i = std::min(s.size(), i + 2);
            out += ' ';
        } else {
            out += s[i++];
        }
    }
    return out;
}

// `m *Map[K, V]` -> "*Map[K,V]"; `*Server` -> "*Server"; `b Buffer` -> "Buffer".
std::string canonical_receiver_type(std::string_view raw) {
    std::string text = trim(strip_comments(raw));
    // Split at top-level whitespace (outside brackets); the first part is the
    // receiver variable when two parts exist.
    int bracket = 0;
    std::size_t type_begin = 0;
    bool seen_space = false;
    for (std::size_t i = 0; i < text.size() && !seen_space; ++i) {
        char ch = text[i];
        if (ch == '[') ++bracket;
        else if (ch == ']') --bracket;
        else if (bracket == 0 && std::isspace(static_cast<unsigned char>(ch))) {
            type_begin = i;
            seen_space = true;
        }
    }
    std::string type_text = seen_space ? text.substr(type_begin) : text;
    std::string out;
    out.reserve(type_text.size());
    for (char ch : type_text)
        if (!std::isspace(static_cast<unsigned char>(ch))) out += ch;
    return out;
}

enum class Tok { None, Ident, CloseDelim, Literal, Other };

bool ends_statement(Tok t) {
    return t == Tok::Ident || t == Tok::CloseDelim || t == Tok::Literal;
}

struct DeclResult {
    bool produced = false;  // false for bodyless declarations
    FunctionSig sig;
};

// Cursor is positioned just after the `func` keyword. On shape mismatch
// (function literal, func type) the cursor is restored and nullopt returned.
// Throws ParseError when a body opens but never closes.
std::optional<DeclResult> try_parse_declaration(Cursor& c, std::string_view content,
                                                const CodeArtifactId& file, int func_line) {
    Cursor saved = c;
    skip_space_and_comments(c);

    std::string receiver_raw;
    bool has_receiver = false;
    if (c.peek() == '(') {
        std::size_t open = c.pos;
        if (!skip_balanced(c, '(', ')')) {
            c = saved;
            return std::nullopt;
        }
        receiver_raw = std::string(content.substr(open + 1, c.pos - open - 2));
        has_receiver = true;
        skip_space_and_comments(c);
    }

    if (!is_ident_start(c.peek())) {
        c = saved;
        return std::nullopt;
    }
    std::size_t name_start = c.pos;
    while (!c.eof() && is_ident_char(c.peek())) c.advance();
    std::string name(content.substr(name_start, c.pos - name_start));

    skip_space_and_comments(c);
    if (c.peek() == '[') {  // type parameters
        if (!skip_balanced(c, '[', ']')) {
            c = saved;
            return std::nullopt;
        }
        skip_space_and_comments(c);
    }
    if (c.peek() != '(') {
        c = saved;
        return std::nullopt;
    }
    if (!skip_balanced(c, '(', ')')) {
        c = saved;
        return std::nullopt;
    }

    // Walk the result types looking for the body's opening brace. A `{` at
    // top nesting belongs to a struct/interface type literal only when the
    // preceding token is that keyword; a newline after a statement-ending
    // token terminates a bodyless declaration.
    Tok last = Tok::CloseDelim;
    bool after_composite_kw = false;
    int paren = 0, bracket = 0;
    auto make_sig = [&](int end_line) {
        FunctionSig sig;
        sig.file = file;
        sig.name = name;
        sig.line_start = func_line;
        sig.line_end = end_line;
        if (has_receiver) {
            sig.receiver_verbatim = trim(receiver_raw);
            sig.receiver_type = canonical_receiver_type(receiver_raw);
            sig.skeleton_line = "func (" + sig.receiver_verbatim + ") " + name + "(...) { ... }";
        } else {
            sig.skeleton_line = "func " + name + "(...) { ... }";
        }
        return sig;
    };

    while (true) {
        if (c.eof()) return DeclResult{};  // bodyless at end of file
        char ch = c.peek();
        if (ch == '\n') {
            if (paren == 0 && bracket == 0 && ends_statement(last)) {
                c.advance();
                return DeclResult{};  // bodyless declaration
            }
            c.advance();
            continue;
        }
        if (ch == ' ' || ch == '\t' || ch == '\r') {
            c.advance();
            continue;
        }
        if (ch == '/' && c.peek(1) == '/') {
            skip_line_comment(c);
            continue;
        }
        if (ch == '/' && c.peek(1) == '*') {
            if (skip_block_comment(c) && paren == 0 && bracket == 0 && ends_statement(last))
                return DeclResult{};
            continue;
        }
        if (ch == '"') {
            skip_interpreted_string(c);
            last = Tok::Literal;
            after_composite_kw = false;
            continue;
        }
        if (ch == '`') {
            skip_raw_string(c);
            last = Tok::Literal;
            after_composite_kw = false;
            continue;
        }
        if (ch == '\'') {
            skip_rune(c);
            last = Tok::Literal;
            after_composite_kw = false;
            continue;
        }
        if (ch == '{') {
            if (paren == 0 && bracket == 0 && !after_composite_kw) {
                if (!skip_balanced(c, '{', '}'))
                    throw ParseError("unterminated body of '" + name + "' in " + file.canonical +
                                     " (declared at line " + std::to_string(func_line) + ")");
                return DeclResult{true, make_sig(c.line)};
            }
            // struct/interface type literal in the result position
            if (!skip_balanced(c, '{', '}'))
                throw ParseError("unterminated type literal in " + file.canonical +
                                 " (declaration at line " + std::to_string(func_line) + ")");
            last = Tok::CloseDelim;
            after_composite_kw = false;
            continue;
        }
        if (ch == '}') return DeclResult{};  // stray closer; treat the decl as ended
        if (ch == ';') {
            c.advance();
            if (paren == 0 && bracket == 0) return DeclResult{};
            last = Tok::Other;
            after_composite_kw = false;
            continue;
        }
        if (ch == '(') {
            ++paren;
            c.advance();
            last = Tok::Other;
            after_composite_kw = false;
            continue;
        }
        if (ch == ')') {
            --paren;
            c.advance();
            last = Tok::CloseDelim;
            after_composite_kw = false;
            continue;
        }
        if (ch == '[') {
            ++bracket;
            c.advance();
            last = Tok::Other;
            after_composite_kw = false;
            continue;
        }
        if (ch == ']') {
            --bracket;
            c.advance();
            last = Tok::CloseDelim;
            after_composite_kw = false;
            continue;
        }
        if (is_ident_char(ch)) {
            std::size_t w = c.pos;
            while (!c.eof() && is_ident_char(c.peek())) c.advance();
            std::string_view word = content.substr(w, c.pos - w);
            last = Tok::Ident;
            after_composite_kw = (word == "struct" || word == "interface");
            continue;
        }
        c.advance();
        last = Tok::Other;
        after_composite_kw = false;
    }
}

}  // namespace

std::string FunctionSig::callable() const {
    if (receiver_type) return "(" + *receiver_type + ")." + name;
    return name;
}

CodeArtifactId FunctionSig::artifact() const {
    return function_id(file.canonical, callable());
}

std::vector<FunctionSig> extract_function_signatures(std::string_view file_content,
                                                     const CodeArtifactId& file) {
    if (file.kind != ArtifactKind::File)
        throw UnknownArtifact("not a file id: " + file.canonical);
    std::vector<FunctionSig> sigs;
    Cursor c{file_content};
    int depth = 0;
    int last_good_line = 1;
    while (!c.eof()) {
        char ch = c.peek();
        if (ch == '/' && c.peek(1) == '/') {
            skip_line_comment(c);
            continue;
        }
        if (ch == '/' && c.peek(1) == '*') {
            skip_block_comment(c);
            continue;
        }
        if (ch == '"') {
            skip_interpreted_string(c);
            continue;
        }
        if (ch == '`') {
            skip_raw_string(c);
            continue;
        }
        if (ch == '\'') {
            skip_rune(c);
            continue;
        }
        if (ch == '{') {
            ++depth;
            c.advance();
            continue;
        }
        if (ch == '}') {
            --depth;
            c.advance();
            if (depth == 0) last_good_line = c.line;
            continue;
        }
        if (is_ident_start(ch)) {
            std::size_t w = c.pos;
            int word_line = c.line;
            while (!c.eof() && is_ident_char(c.peek())) c.advance();
            std::string_view word = file_content.substr(w, c.pos - w);
            if (depth == 0 && word == "func") {
                if (auto decl = try_parse_declaration(c, file_content, file, word_line)) {
                    if (decl->produced) sigs.push_back(std::move(decl->sig));
                    last_good_line = c.line;
                }
            }
            continue;
        }
        c.advance();
    }
    if (depth != 0)
        throw ParseError("unbalanced braces at end of " + file.canonical +
                         " (last balanced line " + std::to_string(last_good_line) + ")");
    return sigs;
}

RepoSnapshot RepoSnapshot::from_files(std::string root_label,
                                      std::vector<std::pair<std::string, std::string>> files,
                                      std::optional<std::string> commit_id) {
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < files.size(); ++i)
        if (files[i].first == files[i - 1].first)
            throw ValidationError("duplicate file path: " + files[i].first);

    RepoSnapshot snap;
    snap.root_label_ = std::move(root_label);
    snap.commit_id_ = std::move(commit_id);
    std::set<std::string> dirs;
    for (auto& [path, content] : files) {
        CodeArtifactId id = file_id(path);
        for (auto p = parent_directory(id); p; p = parent_directory(*p))
            dirs.insert(p->canonical);
        std::vector<FunctionSig> sigs;
        try {
            sigs = extract_function_signatures(content, id);
        } catch (const ParseError& e) {
            snap.scan_errors_.push_back({id.canonical, e.what()});
        }
        snap.files_.push_back(std::move(id));
        snap.contents_.push_back(std::move(content));
        snap.functions_.push_back(std::move(sigs));
    }
    for (const auto& d : dirs)
        snap.directories_.push_back(CodeArtifactId{ArtifactKind::Directory, d});
    return snap;
}

bool RepoSnapshot::has_directory(const CodeArtifactId& dir) const {
    return dir.kind == ArtifactKind::Directory &&
           std::binary_search(directories_.begin(), directories_.end(), dir);
}

bool RepoSnapshot::has_file(const CodeArtifactId& file) const {
    return file.kind == ArtifactKind::File &&
           std::binary_search(files_.begin(), files_.end(), file);
}

bool RepoSnapshot::has_artifact(const CodeArtifactId& id) const {
    switch (id.kind) {
        case ArtifactKind::Directory: return has_directory(id);
        case ArtifactKind::File: return has_file(id);
        case ArtifactKind::Function: return find_function(id) != nullptr;
    }
    return false;
}

std::size_t RepoSnapshot::file_index(const CodeArtifactId& file) const {
    auto it = std::lower_bound(files_.begin(), files_.end(), file);
    if (it == files_.end() || !(*it == file))
        throw UnknownArtifact("file not in snapshot: " + file.canonical);
    return static_cast<std::size_t>(it - files_.begin());
}

const std::vector<FunctionSig>& RepoSnapshot::functions_of(const CodeArtifactId& file) const {
    return functions_[file_index(file)];
}

const std::string& RepoSnapshot::content_of(const CodeArtifactId& file) const {
    return contents_[file_index(file)];
}

const FunctionSig* RepoSnapshot::find_function(const CodeArtifactId& fn) const {
    if (fn.kind != ArtifactKind::Function) return nullptr;
    CodeArtifactId file = function_file(fn);
    auto it = std::lower_bound(files_.begin(), files_.end(), file);
    if (it == files_.end() || !(*it == file)) return nullptr;
    std::string_view callable = function_callable(fn);
    for (const auto& sig : functions_[static_cast<std::size_t>(it - files_.begin())])
        if (sig.callable() == callable) return &sig;
    return nullptr;
}

std::string RepoSnapshot::function_span_text(const CodeArtifactId& fn) const {
    const FunctionSig* sig = find_function(fn);
    if (!sig) throw UnknownArtifact("function not in snapshot: " + fn.canonical);
    const std::string& content = content_of(sig->file);
    std::size_t begin = 0;
    int line = 1;
    while (line < sig->line_start && begin < content.size()) {
        if (content[begin] == '\n') ++line;
        ++begin;
    }
    std::size_t end = begin;
    while (end < content.size()) {
        if (content[end] == '\n') {
            if (line == sig->line_end) break;
            ++line;
        }
        ++end;
    }
    return content.substr(begin, end - begin);
}

std::size_t RepoSnapshot::function_count() const {
    std::size_t total = 0;
    for (const auto& sigs : functions_) total += sigs.size();
    return total;
}

namespace {

std::regex glob_to_regex(std::string_view pattern) {
    std::string re = "^";
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == '*') {
            if (i + 1 < pattern.size() && pattern[i + 1] == '*') {
                re += ".*";
                ++i;
            } else {
                re += "[^/]*";
            }
        } else if (c == '?') {
            re += "[^/]";
        } else if (std::string_view("\\^$.|+()[]{}").find(c) != std::string_view::npos) {
            re += '\\';
            re += c;
        } else {
            re += c;
        }
    }
    re += "$";
    return std::regex(re);
}

bool excluded(const std::string& rel_path, const std::vector<std::regex>& patterns) {
    if (patterns.empty()) return false;
    // Test the path itself and every ancestor directory path.
    std::vector<std::string> probes{rel_path};
    for (std::size_t slash = rel_path.find('/'); slash != std::string::npos;
         slash = rel_path.find('/', slash + 1))
        probes.push_back(rel_path.substr(0, slash));
    for (const auto& re : patterns)
        for (const auto& probe : probes)
            if (std::regex_match(probe, re)) return true;
    return false;
}

}  // namespace

RepoSnapshot scan_repository(const std::filesystem::path& root_path,
                             const std::vector<std::string>& exclude_globs,
                             std::optional<std::string> commit_id) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root_path, ec) || ec)
        throw IoError("repository root is not a readable directory: " + root_path.string());

    std::vector<std::regex> patterns;
    patterns.reserve(exclude_globs.size());
    for (const auto& g : exclude_globs) patterns.push_back(glob_to_regex(g));

    std::vector<std::pair<std::string, std::string>> collected;
    std::vector<ScanFileError> read_errors;
    fs::recursive_directory_iterator it(root_path, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw IoError("cannot open repository root: " + root_path.string());
    for (const auto& entry : it) {
        if (!entry.is_regular_file(ec) || ec) continue;
        std::string rel = fs::relative(entry.path(), root_path, ec).generic_string();
        if (ec || rel.size() < 3 || rel.compare(rel.size() - 3, 3, ".go") != 0) continue;
        if (excluded(rel, patterns)) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) {
            read_errors.push_back({rel, "unreadable file"});
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        collected.emplace_back(std::move(rel), std::move(buf).str());
    }
    RepoSnapshot snap = RepoSnapshot::from_files(root_path.generic_string(), std::move(collected),
                                                 std::move(commit_id));
    // Keep read failures alongside extraction failures, sorted like the rest.
    snap.scan_errors_.insert(snap.scan_errors_.end(), read_errors.begin(), read_errors.end());
    std::sort(snap.scan_errors_.begin(), snap.scan_errors_.end(),
              [](const ScanFileError& a, const ScanFileError& b) { return a.file < b.file; });
    return snap;
}

}  // namespace trace
