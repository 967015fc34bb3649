#include "trace/go_scan.hpp"
#include "trace/errors.hpp"
#include "trace/snapshot_io.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <set>

using namespace trace;
using namespace testsupport;

TEST_CASE("plain function declaration") {
    auto sigs = extract_function_signatures("func Add(a, b int) int { return a + b }",
                                            file_id("x.go"));
    REQUIRE(sigs.size() == 1);
    CHECK(sigs[0].name == "Add");
    CHECK_FALSE(sigs[0].receiver_type.has_value());
    CHECK(sigs[0].skeleton_line == "func Add(...) { ... }");
    CHECK(sigs[0].callable() == "Add");
    CHECK(sigs[0].line_start == 1);
    CHECK(sigs[0].line_end == 1);
}

TEST_CASE("method keeps the receiver verbatim and canonicalizes the id") {
    auto sigs = extract_function_signatures(
        "func (s *Server) Serve() error {\n\treturn nil\n}\n", file_id("srv.go"));
    REQUIRE(sigs.size() == 1);
    CHECK(sigs[0].name == "Serve");
    CHECK(sigs[0].receiver_type == "*Server");
    CHECK(sigs[0].skeleton_line == "func (s *Server) Serve(...) { ... }");
    CHECK(sigs[0].artifact().canonical == "srv.go::(*Server).Serve");
}

TEST_CASE("interfaces and bodyless declarations yield zero signatures") {
    auto sigs = extract_function_signatures(
        "type R interface { Close() error }\nfunc abs(x int64) int64\n", file_id("x.go"));
    CHECK(sigs.empty());
}

TEST_CASE("receiver canonicalization strips the variable and spaces") {
    auto sigs = extract_function_signatures(
        "func (m *Map[K, V]) Get(k K) (V, bool) { var z V; return z, false }\n"
        "func ( s  *T ) Spaced() int { return 0 }\n"
        "func (Buffer) Anon() {}\n",
        file_id("r.go"));
    REQUIRE(sigs.size() == 3);
    CHECK(sigs[0].receiver_type == "*Map[K,V]");
    CHECK(sigs[0].callable() == "(*Map[K,V]).Get");
    CHECK(sigs[1].receiver_type == "*T");
    CHECK(sigs[1].skeleton_line == "func (s  *T) Spaced(...) { ... }");
    CHECK(sigs[2].receiver_type == "Buffer");
}

TEST_CASE("strings, raw strings, runes, and comments never confuse brace tracking") {
    std::string src =
        "package p\n"
        "func A() string { return \"{ not a brace }\" }\n"
        "func B() string { return `raw { \n multi } line` }\n"
        "func C() rune { return '{' }\n"
        "// func Commented() { }\n"
        "/* func Block() { } */\n"
        "func D() int { /* { */ return 1 } // }\n";
    auto sigs = extract_function_signatures(src, file_id("p.go"));
    std::vector<std::string> names;
    for (const auto& s : sigs) names.push_back(s.name);
    CHECK(names == std::vector<std::string>{"A", "B", "C", "D"});
}

TEST_CASE("type-parameterized declarations are supported") {
    auto sigs = extract_function_signatures(
        "func F[T any](v T) T { return v }\nfunc G[K comparable, V any](m map[K]V) int { return len(m) }\n",
        file_id("g.go"));
    REQUIRE(sigs.size() == 2);
    CHECK(sigs[0].name == "F");
    CHECK(sigs[1].name == "G");
}

TEST_CASE("function literals are not separate artifacts") {
    std::string src =
        "var topLevel = func() int { return 1 }\n"
        "func Outer() {\n"
        "\tinner := func() {}\n"
        "\tinner()\n"
        "}\n";
    auto sigs = extract_function_signatures(src, file_id("c.go"));
    REQUIRE(sigs.size() == 1);
    CHECK(sigs[0].name == "Outer");
    CHECK(sigs[0].line_start == 2);
    CHECK(sigs[0].line_end == 5);
}

TEST_CASE("composite result types do not hide the body") {
    auto sigs = extract_function_signatures(
        "func P() struct{ X int } { return struct{ X int }{1} }\n"
        "func S() map[string]struct{} { return nil }\n"
        "func I() interface{ Error() string } { return nil }\n",
        file_id("t.go"));
    REQUIRE(sigs.size() == 3);
}

TEST_CASE("unbalanced braces raise ParseError naming file and line") {
    try {
        extract_function_signatures("func ok() {}\n\nfunc broken() {\n\tif x {\n", file_id("bad.go"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        std::string msg = e.what();
        CHECK(msg.find("bad.go") != std::string::npos);
        CHECK(msg.find("3") != std::string::npos);  // declaration line of the bad func
    }
}

TEST_CASE("scan of the fixture tree finds only go files and their directories") {
    RepoSnapshot snap = scan_repository(fixtures_dir() / "tiny_repo");
    std::vector<std::string> dirs;
    for (const auto& d : snap.directories()) dirs.push_back(d.canonical);
    CHECK(dirs == std::vector<std::string>{"./", "a/", "a/b/"});  // README ignored, empty c/ absent
    std::vector<std::string> files;
    for (const auto& f : snap.files()) files.push_back(f.canonical);
    CHECK(files == std::vector<std::string>{"a/b/y.go", "a/x.go"});
}

TEST_CASE("zero go files means zero directories") {
    ScratchDir scratch("emptyroot");
    std::filesystem::create_directories(scratch.path() / "sub");
    write_file(scratch.path() / "readme.txt", "nothing");
    RepoSnapshot snap = scan_repository(scratch.path());
    CHECK(snap.directories().empty());
    CHECK(snap.files().empty());
    CHECK(snap.function_count() == 0);
}

TEST_CASE("unreadable root raises IoError") {
    CHECK_THROWS_AS(scan_repository("/no/such/root/anywhere"), IoError);
}

TEST_CASE("exclude globs filter files and whole subtrees") {
    ScratchDir scratch("globs");
    write_file(scratch.path() / "keep/a.go", "package a\nfunc A() {}\n");
    write_file(scratch.path() / "vendor/dep/b.go", "package b\nfunc B() {}\n");
    write_file(scratch.path() / "keep/testdata/c.go", "package c\nfunc C() {}\n");
    write_file(scratch.path() / "keep/gen_x.go", "package a\nfunc Gen() {}\n");

    RepoSnapshot all = scan_repository(scratch.path());
    CHECK(all.files().size() == 4);

    RepoSnapshot filtered =
        scan_repository(scratch.path(), {"vendor", "**/testdata", "keep/gen_*.go"});
    std::vector<std::string> files;
    for (const auto& f : filtered.files()) files.push_back(f.canonical);
    CHECK(files == std::vector<std::string>{"keep/a.go"});
}

TEST_CASE("extraction failure is recorded per file without aborting the scan") {
    ScratchDir scratch("scanerr");
    write_file(scratch.path() / "good.go", "package g\nfunc G() {}\n");
    write_file(scratch.path() / "bad.go", "package b\nfunc B() {\n");
    RepoSnapshot snap = scan_repository(scratch.path());
    CHECK(snap.files().size() == 2);  // the bad file is still listed
    REQUIRE(snap.scan_errors().size() == 1);
    CHECK(snap.scan_errors()[0].file == "bad.go");
    CHECK(snap.functions_of(file_id("bad.go")).empty());
    CHECK(snap.functions_of(file_id("good.go")).size() == 1);
}

TEST_CASE("parser fidelity: extracted tuples match the independent-parser manifest") {
    auto manifest_text = read_file(fixtures_dir() / "go_corpus_manifest.json");
    auto manifest = nlohmann::json::parse(manifest_text);
    std::map<std::string, std::vector<nlohmann::json>> expected;
    for (const auto& entry : manifest)
        expected[entry["file"].get<std::string>()].push_back(entry);

    std::size_t files_checked = 0, sigs_checked = 0;
    for (const auto& entry :
         std::filesystem::directory_iterator(fixtures_dir() / "go_corpus")) {
        std::string name = entry.path().filename().string();
        auto sigs = extract_function_signatures(read_file(entry.path()), file_id(name));
        const auto& want = expected[name];
        REQUIRE_MESSAGE(sigs.size() == want.size(), name);
        for (std::size_t i = 0; i < sigs.size(); ++i) {
            CHECK_MESSAGE(sigs[i].name == want[i]["name"].get<std::string>(), name);
            CHECK_MESSAGE(sigs[i].receiver_type.value_or("") ==
                              want[i]["receiver"].get<std::string>(),
                          name << " " << sigs[i].name);
            CHECK_MESSAGE(sigs[i].line_start == want[i]["line_start"].get<int>(),
                          name << " " << sigs[i].name);
            CHECK_MESSAGE(sigs[i].line_end == want[i]["line_end"].get<int>(),
                          name << " " << sigs[i].name);
            ++sigs_checked;
        }
        ++files_checked;
    }
    CHECK(files_checked >= 25);
    CHECK(sigs_checked >= 50);
}

TEST_CASE("round trip: every span slices back to a balanced func") {
    for (const auto& entry :
         std::filesystem::directory_iterator(fixtures_dir() / "go_corpus")) {
        std::string content = read_file(entry.path());
        auto file = file_id(entry.path().filename().string());
        RepoSnapshot snap =
            RepoSnapshot::from_files("corpus", {{file.canonical, content}});
        for (const auto& sig : snap.functions_of(file)) {
            std::string span = snap.function_span_text(sig.artifact());
            std::size_t first = span.find_first_not_of(" \t\n");
            REQUIRE(first != std::string::npos);
            CHECK(span.compare(first, 4, "func") == 0);
            // Re-extracting from the span succeeds only when its braces
            // balance, and must find the same declaration.
            auto spanned = extract_function_signatures(span, file);
            REQUIRE(spanned.size() == 1);
            CHECK(spanned[0].name == sig.name);
        }
    }
}

TEST_CASE("mutated and random inputs either parse or raise ParseError") {
    std::mt19937 rng(424242);
    std::string base =
        "package p\nfunc A(x int) int { return x }\nfunc (s *S) M() { s.x = \"{\" }\n"
        "type I interface { F() }\nfunc bodyless(a, b int) (int, error)\n"
        "func G[T any](v T) T { inner := func() {}; inner(); return v }\n";
    const char charset[] = "{}()[]\"'`/*\\\nfunc interface struct abc;,.*<->|~ \t";
    for (int round = 0; round < 2000; ++round) {
        std::string s;
        if (round % 3 == 0) {
            s.resize(1 + rng() % 200);
            for (auto& c : s) c = charset[rng() % (sizeof charset - 1)];
        } else {
            s = base;
            for (int m = 0; m < 1 + static_cast<int>(rng() % 10); ++m) {
                std::size_t pos = rng() % s.size();
                switch (rng() % 3) {
                    case 0: s[pos] = charset[rng() % (sizeof charset - 1)]; break;
                    case 1: s.erase(pos, 1 + rng() % 5); break;
                    default: s.insert(pos, 1, charset[rng() % (sizeof charset - 1)]);
                }
                if (s.empty()) s = "x";
            }
        }
        try {
            auto sigs = extract_function_signatures(s, file_id("f.go"));
            for (const auto& sig : sigs) {
                CHECK(sig.line_start >= 1);
                CHECK(sig.line_end >= sig.line_start);
                CHECK_FALSE(sig.name.empty());
            }
        } catch (const ParseError&) {
            // unbalanced braces are the one legal failure
        }
    }
}

TEST_CASE("count consistency and sorted collections") {
    RepoSnapshot snap = toy_snapshot();
    std::size_t total = 0;
    for (const auto& f : snap.files()) {
        total += snap.functions_of(f).size();
        for (const auto& sig : snap.functions_of(f)) CHECK(sig.file == f);
    }
    CHECK(total == snap.function_count());
    CHECK(std::is_sorted(snap.files().begin(), snap.files().end()));
    CHECK(std::is_sorted(snap.directories().begin(), snap.directories().end()));
    for (const auto& f : snap.files()) {
        auto parent = parent_directory(f);
        while (parent) {
            CHECK(snap.has_directory(*parent));
            parent = parent_directory(*parent);
        }
    }
}

TEST_CASE("two scans of an unchanged tree serialize byte-identically") {
    RepoSnapshot a = scan_repository(fixtures_dir() / "toy_repo");
    RepoSnapshot b = scan_repository(fixtures_dir() / "toy_repo");
    CHECK(snapshot_to_json(a) == snapshot_to_json(b));
}

TEST_CASE("snapshot json round trip preserves everything") {
    RepoSnapshot snap = toy_snapshot();
    RepoSnapshot back = snapshot_from_json(snapshot_to_json(snap));
    CHECK(snapshot_to_json(back) == snapshot_to_json(snap));
    CHECK(back.function_count() == snap.function_count());
}

TEST_CASE("function span lookup") {
    RepoSnapshot snap = toy_snapshot();
    auto fn = function_id("pkg/http/server.go", "(*Server).Serve");
    REQUIRE(snap.find_function(fn) != nullptr);
    std::string span = snap.function_span_text(fn);
    CHECK(span.find("func (s *Server) Serve() error {") == 0);
    CHECK(span.back() == '}');
    CHECK_THROWS_AS(snap.function_span_text(function_id("pkg/http/server.go", "Nope")),
                    UnknownArtifact);
}
