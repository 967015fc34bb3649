#include "trace/pipeline.hpp"
#include "trace/errors.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace trace;
using namespace testsupport;

namespace {

Proposal any_proposal() {
    return make_proposal(42, "example", {{"alice", "please change pkg/http"}});
}

}  // namespace

TEST_CASE("reply normalization trims, lowercases, and strips punctuation") {
    CHECK(normalize_bare_word("File") == "file");
    CHECK(normalize_bare_word(" FUNCTION.\n") == "function");
    CHECK(normalize_bare_word("  Yes!! ") == "yes");
    CHECK(normalize_bare_word("no.") == "no");
    CHECK(normalize_bare_word("two words") == "two words");
}

TEST_CASE("json array parsing tolerates fences and surrounding prose") {
    auto direct = parse_json_string_array(R"(["a", "b"])");
    REQUIRE(direct.has_value());
    CHECK(*direct == std::vector<std::string>{"a", "b"});
    auto fenced = parse_json_string_array("```json\n[\"x\"]\n```");
    REQUIRE(fenced.has_value());
    CHECK(*fenced == std::vector<std::string>{"x"});
    auto wrapped = parse_json_string_array("Sure! Here you go: [\"y\"] as requested.");
    REQUIRE(wrapped.has_value());
    CHECK(*wrapped == std::vector<std::string>{"y"});
    CHECK_FALSE(parse_json_string_array("not json").has_value());
    CHECK_FALSE(parse_json_string_array("[1, 2]").has_value());  // not strings
    CHECK_FALSE(parse_json_string_array("{\"a\": 1}").has_value());
}

TEST_CASE("decide_granularity accepts each normalized label") {
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply("File");
    CHECK(decide_granularity(any_proposal(), config, client) == GranularityLabel::File);
    client.push_reply(" FUNCTION.\n");
    CHECK(decide_granularity(any_proposal(), config, client) == GranularityLabel::Function);
    client.push_reply("directory");
    CHECK(decide_granularity(any_proposal(), config, client) == GranularityLabel::Directory);
}

TEST_CASE("decide_granularity retries with a corrective suffix then fails") {
    PipelineConfig config = toy_pipeline_config();
    config.parse_retries = 2;
    ScriptedClient client;
    client.push_reply("maybe?");
    client.push_reply("dunno");
    client.push_reply("huh");
    Provenance provenance;
    try {
        decide_granularity(any_proposal(), config, client, &provenance);
        FAIL("expected MalformedModelOutput");
    } catch (const MalformedModelOutput& e) {
        CHECK(e.phase == "granularity");
        CHECK(e.raw_replies == std::vector<std::string>{"maybe?", "dunno", "huh"});
    }
    CHECK(client.calls() == 3);  // 1 + parse_retries
    // Re-asks append the corrective suffix; the first ask does not carry it.
    const std::string marker = "Your previous reply was not in the expected format";
    CHECK(client.requests()[1].user.find(marker) != std::string::npos);
    CHECK(client.requests()[2].user.find(marker) != std::string::npos);
    CHECK(client.requests()[0].user.find(marker) == std::string::npos);
    REQUIRE(provenance.size() == 1);
    CHECK(provenance[0].failed);
    CHECK(provenance[0].raw_replies.size() == 3);
}

TEST_CASE("a malformed reply recovered by one retry still succeeds") {
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply("hmm, let me think");
    client.push_reply("file");
    CHECK(decide_granularity(any_proposal(), config, client) == GranularityLabel::File);
    CHECK(client.calls() == 2);
}

TEST_CASE("localize_directories canonicalizes, filters, and deduplicates") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply(R"(["pkg/http", "./pkg/store/", "no/such/dir", "pkg/http/"])");
    Provenance provenance;
    auto dirs = localize_directories(any_proposal(), snap, config, client, &provenance);
    std::vector<std::string> got;
    for (const auto& d : dirs) got.push_back(d.canonical);
    CHECK(got == std::vector<std::string>{"pkg/http/", "pkg/store/"});
    REQUIRE(provenance.size() == 1);
    REQUIRE(provenance[0].dropped.size() == 1);
    CHECK(provenance[0].dropped[0].candidate == "no/such/dir");
    CHECK(provenance[0].dropped[0].reason == "not_in_snapshot");
}

TEST_CASE("localize_files enforces existence and candidate scope") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    std::vector<CodeArtifactId> dirs{directory_id("pkg/http/")};
    ScriptedClient client;
    client.push_reply(R"(["pkg/http/server.go", "pkg/store/kv.go", "pkg/http/ghost.go"])");
    Provenance provenance;
    auto files = localize_files(any_proposal(), snap, dirs, config, client, &provenance);
    REQUIRE(files.size() == 1);
    CHECK(files[0].canonical == "pkg/http/server.go");
    REQUIRE(provenance.size() == 1);
    REQUIRE(provenance[0].dropped.size() == 2);
    CHECK(provenance[0].dropped[0].reason == "outside_scope");   // kv.go exists, wrong subtree
    CHECK(provenance[0].dropped[1].reason == "not_in_snapshot");  // ghost.go
}

TEST_CASE("empty candidate directories answer without any model call") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;  // would throw CacheMiss if consulted
    auto files = localize_files(any_proposal(), snap, {}, config, client);
    CHECK(files.empty());
    CHECK(client.calls() == 0);
}

TEST_CASE("localize_functions issues exactly one prompt per candidate file") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    std::vector<CodeArtifactId> files{file_id("pkg/http/server.go"), file_id("pkg/store/kv.go")};
    ScriptedClient client;
    client.push_reply(R"(["Serve"])");
    client.push_reply(R"(["Get", "NoSuchFn"])");
    Provenance provenance;
    auto result = localize_functions(any_proposal(), snap, files, config, client, &provenance);
    CHECK(client.calls() == 2);
    std::vector<std::string> got;
    for (const auto& fn : result.functions) got.push_back(fn.canonical);
    CHECK(got == std::vector<std::string>{"pkg/http/server.go::(*Server).Serve",
                                          "pkg/store/kv.go::(*KV).Get"});
    CHECK(result.failed_files.empty());
    REQUIRE(provenance.size() == 2);
    CHECK(provenance[1].dropped.size() == 1);
    CHECK(provenance[1].dropped[0].reason == "unmatched_name");
}

TEST_CASE("bare names match only when unambiguous") {
    RepoSnapshot snap = RepoSnapshot::from_files(
        "fx", {{"dup.go",
                "package d\n"
                "type A struct{}\n"
                "type B struct{}\n"
                "func (a A) Close() error { return nil }\n"
                "func (b B) Close() error { return nil }\n"
                "func Open() error { return nil }\n"}});
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply(R"(["Close", "(A).Close", "Open"])");
    Provenance provenance;
    auto result = localize_functions(any_proposal(), snap, {file_id("dup.go")}, config, client,
                                     &provenance);
    std::vector<std::string> got;
    for (const auto& fn : result.functions) got.push_back(fn.canonical);
    CHECK(got == std::vector<std::string>{"dup.go::(A).Close", "dup.go::Open"});
    REQUIRE(provenance[0].dropped.size() == 1);
    CHECK(provenance[0].dropped[0].candidate == "Close");
    CHECK(provenance[0].dropped[0].reason == "ambiguous_name");
}

TEST_CASE("per-file malformed replies flag the file and spare the others") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    config.parse_retries = 0;
    std::vector<CodeArtifactId> files{file_id("pkg/http/server.go"), file_id("pkg/store/kv.go")};
    ScriptedClient client;
    client.push_reply("gibberish");
    client.push_reply(R"(["Put"])");
    auto result = localize_functions(any_proposal(), snap, files, config, client);
    REQUIRE(result.failed_files.size() == 1);
    CHECK(result.failed_files[0] == "pkg/http/server.go");
    REQUIRE(result.functions.size() == 1);
    CHECK(result.functions[0].canonical == "pkg/store/kv.go::(*KV).Put");
}

TEST_CASE("decide_link accepts yes/no under normalization and retries otherwise") {
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply("Yes");
    CHECK(decide_link(any_proposal(), file_id("a/x.go"), "content", config, client));
    client.push_reply("no.");
    CHECK_FALSE(decide_link(any_proposal(), file_id("a/x.go"), "content", config, client));
    client.push_reply("possibly");
    client.push_reply("possibly");
    client.push_reply("possibly");
    CHECK_THROWS_AS(decide_link(any_proposal(), file_id("a/x.go"), "content", config, client),
                    MalformedModelOutput);
}

TEST_CASE("directory-granularity run skips phase 2 and makes exactly 2 calls") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply("directory");
    client.push_reply(R"(["pkg/store/", "no/such/"])");
    Dataset ds = toy_dataset();
    LinkSet result = run_pipeline(*ds.find_proposal(101), snap, config, client);
    CHECK(result.granularity == GranularityLabel::Directory);
    REQUIRE(result.links.size() == 1);
    CHECK(result.links[0].canonical == "pkg/store/");
    CHECK(client.calls() == 2);
    for (const auto& record : result.provenance) CHECK(record.phase != "link_decision");
    // one drop recorded for the hallucinated directory
    bool found_drop = false;
    for (const auto& record : result.provenance)
        for (const auto& drop : record.dropped)
            if (drop.candidate == "no/such/") found_drop = true;
    CHECK(found_drop);
}

TEST_CASE("file-granularity run judges each localized file") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply("file");
    client.push_reply(R"(["pkg/http/"])");
    client.push_reply(R"(["pkg/http/server.go"])");
    client.push_reply("Yes");
    Dataset ds = toy_dataset();
    LinkSet result = run_pipeline(*ds.find_proposal(102), snap, config, client);
    CHECK(result.granularity == GranularityLabel::File);
    REQUIRE(result.links.size() == 1);
    CHECK(result.links[0].canonical == "pkg/http/server.go");
    CHECK(client.calls() == 3 + 1);  // granularity, dirs, files, then one decision per file
}

TEST_CASE("file-granularity run with a No verdict yields an empty link set") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply("file");
    client.push_reply(R"(["pkg/http/"])");
    client.push_reply(R"(["pkg/http/server.go"])");
    client.push_reply("No");
    Dataset ds = toy_dataset();
    LinkSet result = run_pipeline(*ds.find_proposal(102), snap, config, client);
    CHECK(result.granularity == GranularityLabel::File);
    CHECK(result.links.empty());
}

TEST_CASE("function-granularity run walks all three localization steps") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply("function");
    client.push_reply(R"(["pkg/http/"])");
    client.push_reply(R"(["pkg/http/server.go"])");
    client.push_reply(R"(["Serve"])");
    client.push_reply("Yes");
    Dataset ds = toy_dataset();
    LinkSet result = run_pipeline(*ds.find_proposal(103), snap, config, client);
    CHECK(result.granularity == GranularityLabel::Function);
    REQUIRE(result.links.size() == 1);
    CHECK(result.links[0].canonical == "pkg/http/server.go::(*Server).Serve");
    CHECK(client.calls() == 3 + 1 + 1);
    // The phase-2 element text is the function span, not the whole file.
    const PromptRequest& link_request = client.requests().back();
    CHECK(link_request.user.find("func (s *Server) Serve() error {") != std::string::npos);
    CHECK(link_request.user.find("func NewServer") == std::string::npos);
}

TEST_CASE("kind discipline holds for every produced link set") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    Dataset ds = toy_dataset();
    struct Scenario {
        long id;
        std::vector<std::string> replies;
    };
    std::vector<Scenario> scenarios{
        {101, {"directory", R"(["pkg/store/"])"}},
        {102, {"file", R"(["pkg/http/"])", R"(["pkg/http/server.go"])", "Yes"}},
        {103, {"function", R"(["pkg/http/"])", R"(["pkg/http/server.go"])", R"(["Serve"])", "Yes"}},
    };
    for (const auto& scenario : scenarios) {
        ScriptedClient client;
        for (const auto& reply : scenario.replies) client.push_reply(reply);
        LinkSet result = run_pipeline(*ds.find_proposal(scenario.id), snap, config, client);
        for (const auto& link : result.links) {
            CHECK(link.kind == kind_of(result.granularity));
            CHECK(snap.has_artifact(link));
        }
        CHECK(std::is_sorted(result.links.begin(), result.links.end()));
    }
}

TEST_CASE("containment chain: linked files under phase-1a dirs, functions in phase-1b files") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    ScriptedClient client;
    client.push_reply("function");
    client.push_reply(R"(["pkg/http/", "pkg/store/"])");
    client.push_reply(R"(["pkg/http/server.go", "pkg/store/kv.go"])");
    client.push_reply(R"(["Serve", "Shutdown"])");
    client.push_reply(R"(["Put"])");
    client.push_reply("Yes");
    client.push_reply("No");
    client.push_reply("Yes");
    Dataset ds = toy_dataset();
    LinkSet result = run_pipeline(*ds.find_proposal(103), snap, config, client);
    REQUIRE(result.links.size() == 2);
    for (const auto& link : result.links) {
        CodeArtifactId file = function_file(link);
        bool contained = is_under(file, directory_id("pkg/http/")) ||
                         is_under(file, directory_id("pkg/store/"));
        CHECK(contained);
    }
    // 3 whole-proposal calls + one per candidate file + one per candidate function
    CHECK(client.calls() == 3 + 2 + 3);
}

TEST_CASE("pipeline failures carry the failing phase") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    config.parse_retries = 0;
    Dataset ds = toy_dataset();

    ScriptedClient p0_fails;
    p0_fails.push_reply("shrug");
    try {
        run_pipeline(*ds.find_proposal(101), snap, config, p0_fails);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.phase == "granularity");
        CHECK(e.kind == PipelineError::Kind::ModelOutput);
    }

    ScriptedClient empty_store;  // CacheMiss on the very first exchange
    try {
        run_pipeline(*ds.find_proposal(101), snap, config, empty_store);
        FAIL("expected PipelineError");
    } catch (const PipelineError& e) {
        CHECK(e.phase == "granularity");
        CHECK(e.kind == PipelineError::Kind::Gateway);
    }
}

TEST_CASE("replay from a seeded store reproduces the scripted run exactly") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    Dataset ds = toy_dataset();
    const Proposal& proposal = *ds.find_proposal(102);

    TranscriptStore store;
    auto seed = [&](const PromptRequest& request, const std::string& text) {
        store.put(request, Completion{text, std::nullopt, CompletionSource::Live});
    };
    seed(build_granularity_request(proposal, config), "file");
    seed(build_directories_request(proposal, snap, config), R"(["pkg/http/"])");
    std::vector<CodeArtifactId> dirs{directory_id("pkg/http/")};
    seed(build_files_request(proposal, snap, dirs, config), R"(["pkg/http/server.go"])");
    seed(build_link_request(proposal, snap.content_of(file_id("pkg/http/server.go")), config),
         "Yes");

    GatewayConfig gw;
    gw.mode = GatewayMode::Replay;
    LlmGateway gateway(gw, store);
    LinkSet first = run_pipeline(proposal, snap, config, gateway);
    LinkSet second = run_pipeline(proposal, snap, config, gateway);
    REQUIRE(first.links.size() == 1);
    CHECK(first.links[0].canonical == "pkg/http/server.go");
    CHECK(first.links == second.links);
    CHECK(first.granularity == second.granularity);
}

TEST_CASE("retries replay too: corrective re-asks have distinct fingerprints") {
    RepoSnapshot snap = toy_snapshot();
    PipelineConfig config = toy_pipeline_config();
    Dataset ds = toy_dataset();
    const Proposal& proposal = *ds.find_proposal(101);

    TranscriptStore store;
    PromptRequest base = build_granularity_request(proposal, config);
    store.put(base, Completion{"eh?", std::nullopt, CompletionSource::Live});
    store.put(corrective_retry(base, kRetryWordExpectation),
              Completion{"directory", std::nullopt, CompletionSource::Live});

    GatewayConfig gw;
    gw.mode = GatewayMode::Replay;
    LlmGateway gateway(gw, store);
    CHECK(decide_granularity(proposal, config, gateway) == GranularityLabel::Directory);
}

TEST_CASE("missing template placeholder is a startup ConfigError") {
    ScratchDir scratch("templates");
    auto dir = scratch.path();
    for (const char* name :
         {"phase0_granularity.txt", "phase1_directories.txt", "phase1_files.txt",
          "phase1_functions.txt", "phase2_link.txt"})
        write_file(dir / name, "{{DISCUSSION}} {{REPO_MAP}} {{CANDIDATES}} {{FILE_SKELETON}} {{ELEMENT}}");
    CHECK_NOTHROW(PromptTemplates::load(TemplatePaths::in_directory(dir)));

    write_file(dir / "phase1_directories.txt", "no placeholders at all");
    CHECK_THROWS_AS(PromptTemplates::load(TemplatePaths::in_directory(dir)), ConfigError);

    auto missing = TemplatePaths::in_directory(scratch.path() / "nowhere");
    CHECK_THROWS_AS(PromptTemplates::load(missing), ConfigError);
}
