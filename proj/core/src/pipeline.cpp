#include "trace/pipeline.hpp"

#include "trace/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace trace {

namespace {

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read template: " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void require_placeholders(const std::string& text, const std::filesystem::path& path,
                          std::initializer_list<const char*> names) {
    for (const char* name : names)
        if (text.find(name) == std::string::npos)
            throw ConfigError("template " + path.string() + " lacks required placeholder " + name);
}

std::string substitute(std::string text, std::string_view placeholder, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
    return text;
}

PromptRequest base_request(const PipelineConfig& config, std::string user) {
    PromptRequest r;
    r.system = config.system_prompt;
    r.user = std::move(user);
    r.model_name = config.model_name;
    r.temperature = config.temperature;
    r.max_output_tokens = config.max_output_tokens;
    return r;
}

// Asks, re-asking with a corrective suffix while `parse` rejects the reply.
// Returns nullopt after config.parse_retries re-asks; `record` collects every
// raw reply.
template <typename T, typename ParseFn>
std::optional<T> ask_with_retries(CompletionClient& gateway, const PromptRequest& base,
                                  const std::string& expectation, int parse_retries,
                                  std::vector<std::string>& raw_replies, ParseFn parse) {
    PromptRequest request = base;
    for (int attempt = 0; attempt <= parse_retries; ++attempt) {
        if (attempt > 0) request = corrective_retry(base, expectation);
        Completion completion = gateway.complete(request);
        raw_replies.push_back(completion.text);
        if (std::optional<T> value = parse(completion.text)) return value;
    }
    return std::nullopt;
}

PhaseRecord* push_phase(Provenance* provenance, std::string phase, std::string unit = "") {
    if (!provenance) return nullptr;
    provenance->push_back(PhaseRecord{std::move(phase), std::move(unit), {}, {}, {}, false});
    return &provenance->back();
}

}  // namespace

TemplatePaths TemplatePaths::in_directory(const std::filesystem::path& dir) {
    TemplatePaths p;
    p.granularity = dir / "phase0_granularity.txt";
    p.directories = dir / "phase1_directories.txt";
    p.files = dir / "phase1_files.txt";
    p.functions = dir / "phase1_functions.txt";
    p.link = dir / "phase2_link.txt";
    return p;
}

PromptTemplates PromptTemplates::load(const TemplatePaths& paths) {
    PromptTemplates t;
    t.granularity = read_text_file(paths.granularity);
    require_placeholders(t.granularity, paths.granularity, {"{{DISCUSSION}}"});
    t.directories = read_text_file(paths.directories);
    require_placeholders(t.directories, paths.directories, {"{{DISCUSSION}}", "{{REPO_MAP}}"});
    t.files = read_text_file(paths.files);
    require_placeholders(t.files, paths.files,
                         {"{{DISCUSSION}}", "{{REPO_MAP}}", "{{CANDIDATES}}"});
    t.functions = read_text_file(paths.functions);
    require_placeholders(t.functions, paths.functions, {"{{DISCUSSION}}", "{{FILE_SKELETON}}"});
    t.link = read_text_file(paths.link);
    require_placeholders(t.link, paths.link, {"{{DISCUSSION}}", "{{ELEMENT}}"});
    return t;
}

std::string normalize_bare_word(std::string_view reply) {
    std::string out;
    for (char c : reply) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::ispunct(u)) continue;
        out.push_back(static_cast<char>(std::tolower(u)));
    }
    // trim and collapse interior whitespace to single spaces
    std::string collapsed;
    bool in_space = true;
    for (char c : out) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !collapsed.empty()) collapsed.push_back(' ');
        in_space = false;
        collapsed.push_back(c);
    }
    return collapsed;
}

std::optional<std::vector<std::string>> parse_json_string_array(const std::string& reply) {
    auto try_parse = [](const std::string& text) -> std::optional<std::vector<std::string>> {
        nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
        if (doc.is_discarded() || !doc.is_array()) return std::nullopt;
        std::vector<std::string> out;
        for (const auto& item : doc) {
            if (!item.is_string()) return std::nullopt;
            out.push_back(item.get<std::string>());
        }
        return out;
    };

    // Strip code fences, then fall back to the outermost bracketed slice.
    std::string text = reply;
    if (std::size_t fence = text.find("```"); fence != std::string::npos) {
        std::string stripped;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            std::size_t first = line.find_first_not_of(" \t");
            if (first != std::string::npos && line.compare(first, 3, "```") == 0) continue;
            stripped += line;
            stripped += '\n';
        }
        text = stripped;
    }
    std::size_t begin = text.find_first_not_of(" \t\r\n");
    std::size_t end = text.find_last_not_of(" \t\r\n");
    if (begin == std::string::npos) return std::nullopt;
    if (auto v = try_parse(text.substr(begin, end - begin + 1))) return v;
    std::size_t open = text.find('[');
    std::size_t close = text.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close < open)
        return std::nullopt;
    return try_parse(text.substr(open, close - open + 1));
}

PromptRequest build_granularity_request(const Proposal& proposal, const PipelineConfig& config) {
    std::string user = substitute(config.templates.granularity, "{{DISCUSSION}}",
                                  concat_discussion(proposal).text);
    return base_request(config, std::move(user));
}

PromptRequest build_directories_request(const Proposal& proposal, const RepoSnapshot& snapshot,
                                        const PipelineConfig& config) {
    std::string user = substitute(config.templates.directories, "{{DISCUSSION}}",
                                  concat_discussion(proposal).text);
    user = substitute(std::move(user), "{{REPO_MAP}}", render_tree_map(snapshot));
    return base_request(config, std::move(user));
}

PromptRequest build_files_request(const Proposal& proposal, const RepoSnapshot& snapshot,
                                  const std::vector<CodeArtifactId>& candidate_dirs,
                                  const PipelineConfig& config) {
    std::string user = substitute(config.templates.files, "{{DISCUSSION}}",
                                  concat_discussion(proposal).text);
    user = substitute(std::move(user), "{{REPO_MAP}}", render_tree_map(snapshot, candidate_dirs));
    std::string candidates;
    for (const auto& dir : candidate_dirs) {
        candidates += dir.canonical;
        candidates.push_back('\n');
    }
    user = substitute(std::move(user), "{{CANDIDATES}}", candidates);
    return base_request(config, std::move(user));
}

PromptRequest build_functions_request(const Proposal& proposal, const RepoSnapshot& snapshot,
                                      const CodeArtifactId& file, const PipelineConfig& config) {
    std::string user = substitute(config.templates.functions, "{{DISCUSSION}}",
                                  concat_discussion(proposal).text);
    user = substitute(std::move(user), "{{FILE_SKELETON}}", render_file_skeleton(snapshot, file));
    return base_request(config, std::move(user));
}

PromptRequest build_link_request(const Proposal& proposal, const std::string& element_text,
                                 const PipelineConfig& config) {
    std::string user = substitute(config.templates.link, "{{DISCUSSION}}",
                                  concat_discussion(proposal).text);
    user = substitute(std::move(user), "{{ELEMENT}}", element_text);
    return base_request(config, std::move(user));
}

PromptRequest corrective_retry(const PromptRequest& base, const std::string& expectation) {
    PromptRequest r = base;
    r.user += "\n\nYour previous reply was not in the expected format. " + expectation;
    return r;
}

GranularityLabel decide_granularity(const Proposal& proposal, const PipelineConfig& config,
                                    CompletionClient& gateway, Provenance* provenance) {
    PhaseRecord* record = push_phase(provenance, "granularity");
    std::vector<std::string> raw;
    auto parsed = ask_with_retries<GranularityLabel>(
        gateway, build_granularity_request(proposal, config), kRetryWordExpectation,
        config.parse_retries, raw,
        [](const std::string& reply) { return granularity_from_string(normalize_bare_word(reply)); });
    if (record) record->raw_replies = raw;
    if (!parsed) {
        if (record) record->failed = true;
        throw MalformedModelOutput("granularity", raw);
    }
    if (record) record->accepted.push_back(std::string(to_string(*parsed)));
    return *parsed;
}

namespace {

// "src/net/http" or "./src/net/http/" -> "src/net/http/"
std::optional<CodeArtifactId> canonicalize_directory_reply(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    while (s.rfind("./", 0) == 0) s.erase(0, 2);
    if (s.empty() || s == "." || s == "/") return root_directory();
    if (s.back() != '/') s.push_back('/');
    try {
        return directory_id(s);
    } catch (const MalformedId&) {
        return std::nullopt;
    }
}

std::optional<CodeArtifactId> canonicalize_file_reply(std::string_view text) {
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    while (s.rfind("./", 0) == 0) s.erase(0, 2);
    try {
        return file_id(s);
    } catch (const MalformedId&) {
        return std::nullopt;
    }
}

}  // namespace

std::vector<CodeArtifactId> localize_directories(const Proposal& proposal,
                                                 const RepoSnapshot& snapshot,
                                                 const PipelineConfig& config,
                                                 CompletionClient& gateway,
                                                 Provenance* provenance) {
    PhaseRecord* record = push_phase(provenance, "directories");
    std::vector<std::string> raw;
    auto parsed = ask_with_retries<std::vector<std::string>>(
        gateway, build_directories_request(proposal, snapshot, config), kRetryJsonExpectation,
        config.parse_retries, raw, parse_json_string_array);
    if (record) record->raw_replies = raw;
    if (!parsed) {
        if (record) record->failed = true;
        throw MalformedModelOutput("directories", raw);
    }
    std::set<CodeArtifactId> result;
    for (const auto& candidate : *parsed) {
        auto id = canonicalize_directory_reply(candidate);
        if (id && snapshot.has_directory(*id)) {
            result.insert(*id);
        } else if (record) {
            record->dropped.push_back({candidate, "not_in_snapshot"});
        }
    }
    std::vector<CodeArtifactId> out(result.begin(), result.end());
    if (record)
        for (const auto& id : out) record->accepted.push_back(id.canonical);
    return out;
}

std::vector<CodeArtifactId> localize_files(const Proposal& proposal, const RepoSnapshot& snapshot,
                                           const std::vector<CodeArtifactId>& candidate_dirs,
                                           const PipelineConfig& config, CompletionClient& gateway,
                                           Provenance* provenance) {
    for (const auto& dir : candidate_dirs)
        if (!snapshot.has_directory(dir))
            throw UnknownArtifact("candidate directory not in snapshot: " + dir.canonical);
    PhaseRecord* record = push_phase(provenance, "files");
    if (candidate_dirs.empty()) return {};  // vacuous scope: no model call

    std::vector<std::string> raw;
    auto parsed = ask_with_retries<std::vector<std::string>>(
        gateway, build_files_request(proposal, snapshot, candidate_dirs, config),
        kRetryJsonExpectation, config.parse_retries, raw, parse_json_string_array);
    if (record) record->raw_replies = raw;
    if (!parsed) {
        if (record) record->failed = true;
        throw MalformedModelOutput("files", raw);
    }
    std::set<CodeArtifactId> result;
    for (const auto& candidate : *parsed) {
        auto id = canonicalize_file_reply(candidate);
        if (!id || !snapshot.has_file(*id)) {
            if (record) record->dropped.push_back({candidate, "not_in_snapshot"});
            continue;
        }
        bool in_scope = std::any_of(candidate_dirs.begin(), candidate_dirs.end(),
                                    [&](const CodeArtifactId& dir) { return is_under(*id, dir); });
        if (!in_scope) {
            if (record) record->dropped.push_back({candidate, "outside_scope"});
            continue;
        }
        result.insert(*id);
    }
    std::vector<CodeArtifactId> out(result.begin(), result.end());
    if (record)
        for (const auto& id : out) record->accepted.push_back(id.canonical);
    return out;
}

FunctionLocalization localize_functions(const Proposal& proposal, const RepoSnapshot& snapshot,
                                        const std::vector<CodeArtifactId>& candidate_files,
                                        const PipelineConfig& config, CompletionClient& gateway,
                                        Provenance* provenance) {
    for (const auto& file : candidate_files)
        if (!snapshot.has_file(file))
            throw UnknownArtifact("candidate file not in snapshot: " + file.canonical);

    FunctionLocalization result;
    std::set<CodeArtifactId> collected;
    for (const auto& file : candidate_files) {
        PhaseRecord* record = push_phase(provenance, "functions", file.canonical);
        std::vector<std::string> raw;
        auto parsed = ask_with_retries<std::vector<std::string>>(
            gateway, build_functions_request(proposal, snapshot, file, config),
            kRetryJsonExpectation, config.parse_retries, raw, parse_json_string_array);
        if (record) record->raw_replies = raw;
        if (!parsed) {
            if (record) record->failed = true;
            result.failed_files.push_back(file.canonical);
            continue;  // other files are still processed
        }
        const auto& sigs = snapshot.functions_of(file);
        for (const auto& candidate : *parsed) {
            std::string name = candidate;
            while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front())))
                name.erase(name.begin());
            while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back())))
                name.pop_back();
            // "(Recv).Name" matches that exact callable; a bare name matches
            // when exactly one callable in the file carries it.
            bool qualified = !name.empty() && name.front() == '(';
            std::vector<const FunctionSig*> matches;
            for (const auto& sig : sigs) {
                if (qualified ? sig.callable() == name : sig.name == name)
                    matches.push_back(&sig);
            }
            if (matches.empty()) {
                if (record) record->dropped.push_back({candidate, "unmatched_name"});
            } else if (matches.size() > 1) {
                if (record) record->dropped.push_back({candidate, "ambiguous_name"});
            } else {
                CodeArtifactId id = matches.front()->artifact();
                if (record) record->accepted.push_back(id.canonical);
                collected.insert(std::move(id));
            }
        }
    }
    result.functions.assign(collected.begin(), collected.end());
    return result;
}

bool decide_link(const Proposal& proposal, const CodeArtifactId& artifact,
                 const std::string& element_text, const PipelineConfig& config,
                 CompletionClient& gateway, Provenance* provenance) {
    PhaseRecord* record = push_phase(provenance, "link_decision", artifact.canonical);
    std::vector<std::string> raw;
    auto parsed = ask_with_retries<bool>(
        gateway, build_link_request(proposal, element_text, config), kRetryYesNoExpectation,
        config.parse_retries, raw, [](const std::string& reply) -> std::optional<bool> {
            std::string word = normalize_bare_word(reply);
            if (word == "yes") return true;
            if (word == "no") return false;
            return std::nullopt;
        });
    if (record) record->raw_replies = raw;
    if (!parsed) {
        if (record) record->failed = true;
        throw MalformedModelOutput("link_decision", raw);
    }
    if (record) record->accepted.push_back(*parsed ? "yes" : "no");
    return *parsed;
}

LinkSet run_pipeline(const Proposal& proposal, const RepoSnapshot& snapshot,
                     const PipelineConfig& config, CompletionClient& gateway) {
    LinkSet result;
    result.proposal_id = proposal.id;

    auto rethrow = [](const std::string& phase) {
        try {
            throw;
        } catch (const MalformedModelOutput& e) {
            throw PipelineError(e.phase.empty() ? phase : e.phase,
                                PipelineError::Kind::ModelOutput, e.what());
        } catch (const CacheMiss& e) {
            throw PipelineError(phase, PipelineError::Kind::Gateway, e.what());
        } catch (const TransportError& e) {
            throw PipelineError(phase, PipelineError::Kind::Gateway, e.what());
        } catch (const ApiError& e) {
            throw PipelineError(phase, PipelineError::Kind::Gateway, e.what());
        } catch (const PromptTooLarge& e) {
            throw PipelineError(phase, PipelineError::Kind::Gateway, e.what());
        } catch (const Error& e) {
            throw PipelineError(phase, PipelineError::Kind::Other, e.what());
        }
    };

    try {
        result.granularity = decide_granularity(proposal, config, gateway, &result.provenance);
    } catch (...) {
        rethrow("granularity");
    }

    std::vector<CodeArtifactId> dirs;
    try {
        dirs = localize_directories(proposal, snapshot, config, gateway, &result.provenance);
    } catch (...) {
        rethrow("directories");
    }
    if (result.granularity == GranularityLabel::Directory) {
        result.links = std::move(dirs);  // Phase 2 is skipped at this granularity
        return result;
    }

    std::vector<CodeArtifactId> files;
    try {
        files = localize_files(proposal, snapshot, dirs, config, gateway, &result.provenance);
    } catch (...) {
        rethrow("files");
    }
    if (result.granularity == GranularityLabel::File) {
        try {
            for (const auto& file : files)
                if (decide_link(proposal, file, snapshot.content_of(file), config, gateway,
                                &result.provenance))
                    result.links.push_back(file);
        } catch (...) {
            rethrow("link_decision");
        }
        return result;
    }

    FunctionLocalization fns;
    try {
        fns = localize_functions(proposal, snapshot, files, config, gateway, &result.provenance);
    } catch (...) {
        rethrow("functions");
    }
    try {
        for (const auto& fn : fns.functions)
            if (decide_link(proposal, fn, snapshot.function_span_text(fn), config, gateway,
                            &result.provenance))
                result.links.push_back(fn);
    } catch (...) {
        rethrow("link_decision");
    }
    return result;
}

}  // namespace trace
