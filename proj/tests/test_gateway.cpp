#include "trace/gateway.hpp"
#include "trace/errors.hpp"

#include "test_support.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <thread>

using namespace trace;
using namespace testsupport;

namespace {

PromptRequest sample_request(const std::string& user = "hello") {
    PromptRequest r;
    r.system = "sys";
    r.user = user;
    r.model_name = "m1";
    r.temperature = 0.0;
    r.max_output_tokens = 64;
    return r;
}

// Scripted HTTP responses, recorded calls, optional hard failure on use.
class MockTransport : public HttpTransport {
public:
    std::vector<HttpResponse> responses;
    std::atomic<int> calls{0};
    bool forbid_calls = false;

    HttpResponse post_json(const std::string&,
                           const std::vector<std::pair<std::string, std::string>>& headers,
                           const std::string& body) override {
        REQUIRE_FALSE(forbid_calls);
        last_headers = headers;
        last_body = body;
        int i = calls.fetch_add(1);
        if (i < static_cast<int>(responses.size())) return responses[static_cast<std::size_t>(i)];
        return responses.empty() ? HttpResponse{0, "", "no scripted response"}
                                 : responses.back();
    }

    std::vector<std::pair<std::string, std::string>> last_headers;
    std::string last_body;
};

std::string chat_body(const std::string& text) {
    nlohmann::json doc;
    doc["choices"] = {{{"message", {{"content", text}}}}};
    doc["usage"] = {{"prompt_tokens", 10}, {"completion_tokens", 3}};
    return doc.dump();
}

GatewayConfig test_config(GatewayMode mode) {
    GatewayConfig cfg;
    cfg.endpoint = "http://example.test/v1/chat/completions";
    cfg.api_key = "test-key";
    cfg.mode = mode;
    cfg.max_retries = 2;
    cfg.backoff_base_ms = 0;  // no sleeping in tests
    return cfg;
}

}  // namespace

TEST_CASE("fingerprints are deterministic and order-independent") {
    PromptRequest a;
    a.user = "u";
    a.system = "s";
    a.max_output_tokens = 9;
    a.temperature = 0.5;
    a.model_name = "m";
    PromptRequest b;
    b.model_name = "m";
    b.temperature = 0.5;
    b.max_output_tokens = 9;
    b.system = "s";
    b.user = "u";
    CHECK(request_fingerprint(a) == request_fingerprint(b));
    CHECK(request_fingerprint(a) == request_fingerprint(a));
}

TEST_CASE("fingerprints include every field") {
    PromptRequest base = sample_request();
    PromptRequest temp = base;
    temp.temperature = 0.1;
    CHECK(request_fingerprint(base) != request_fingerprint(temp));
    PromptRequest model = base;
    model.model_name = "m2";
    CHECK(request_fingerprint(base) != request_fingerprint(model));
    PromptRequest tokens = base;
    tokens.max_output_tokens = 65;
    CHECK(request_fingerprint(base) != request_fingerprint(tokens));
    PromptRequest user = base;
    user.user += "!";
    CHECK(request_fingerprint(base) != request_fingerprint(user));
}

TEST_CASE("replay returns the seeded completion with source=cache") {
    TranscriptStore store;
    Completion seeded;
    seeded.text = "seeded reply";
    store.put(sample_request(), seeded);

    LlmGateway gateway(test_config(GatewayMode::Replay), store,
                       std::make_unique<MockTransport>());
    Completion got = gateway.complete(sample_request());
    CHECK(got.text == "seeded reply");
    CHECK(got.source == CompletionSource::Cache);
}

TEST_CASE("replay on an empty store raises CacheMiss with the fingerprint") {
    TranscriptStore store;
    LlmGateway gateway(test_config(GatewayMode::Replay), store,
                       std::make_unique<MockTransport>());
    try {
        gateway.complete(sample_request());
        FAIL("expected CacheMiss");
    } catch (const CacheMiss& e) {
        CHECK(e.fingerprint == request_fingerprint(sample_request()));
    }
}

TEST_CASE("replay performs zero network operations") {
    auto transport = std::make_unique<MockTransport>();
    transport->forbid_calls = true;
    TranscriptStore store;
    store.put(sample_request(), Completion{"x", std::nullopt, CompletionSource::Live});
    LlmGateway gateway(test_config(GatewayMode::Replay), store, std::move(transport));
    CHECK(gateway.complete(sample_request()).text == "x");
    CHECK_THROWS_AS(gateway.complete(sample_request("other")), CacheMiss);
}

TEST_CASE("record persists and a later replay reproduces the bytes") {
    ScratchDir scratch("store");
    auto store_path = scratch.path() / "transcript.jsonl";
    {
        auto transport = std::make_unique<MockTransport>();
        transport->responses = {{200, chat_body("live answer"), ""}};
        TranscriptStore store = TranscriptStore::open(store_path);
        LlmGateway gateway(test_config(GatewayMode::Record), store, std::move(transport));
        Completion live = gateway.complete(sample_request());
        CHECK(live.text == "live answer");
        CHECK(live.source == CompletionSource::Live);
        REQUIRE(live.usage.has_value());
        CHECK(live.usage->prompt_tokens == 10);
    }
    {
        TranscriptStore store = TranscriptStore::open(store_path);
        CHECK(store.size() == 1);
        auto transport = std::make_unique<MockTransport>();
        transport->forbid_calls = true;
        LlmGateway gateway(test_config(GatewayMode::Replay), store, std::move(transport));
        CHECK(gateway.complete(sample_request()).text == "live answer");
    }
}

TEST_CASE("transient statuses are retried, success wins") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {{429, "slow down", ""},
                            {503, "unavailable", ""},
                            {200, chat_body("third time"), ""}};
    MockTransport* raw = transport.get();
    TranscriptStore store;
    LlmGateway gateway(test_config(GatewayMode::Live), store, std::move(transport));
    CHECK(gateway.complete(sample_request()).text == "third time");
    CHECK(raw->calls == 3);
    CHECK(store.size() == 0);  // live mode does not persist
}

TEST_CASE("exhausted retries raise TransportError") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {{500, "boom", ""}};
    TranscriptStore store;
    LlmGateway gateway(test_config(GatewayMode::Live), store, std::move(transport));
    CHECK_THROWS_AS(gateway.complete(sample_request()), TransportError);
}

TEST_CASE("non-retryable status raises ApiError") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {{400, "bad request", ""}};
    MockTransport* raw = transport.get();
    TranscriptStore store;
    LlmGateway gateway(test_config(GatewayMode::Live), store, std::move(transport));
    try {
        gateway.complete(sample_request());
        FAIL("expected ApiError");
    } catch (const ApiError& e) {
        CHECK(e.status == 400);
    }
    CHECK(raw->calls == 1);
}

TEST_CASE("out-of-range request fields are rejected up front") {
    TranscriptStore store;
    LlmGateway gateway(test_config(GatewayMode::Replay), store,
                       std::make_unique<MockTransport>());
    PromptRequest hot = sample_request();
    hot.temperature = 2.5;
    CHECK_THROWS_AS(gateway.complete(hot), ConfigError);
    PromptRequest empty_budget = sample_request();
    empty_budget.max_output_tokens = 0;
    CHECK_THROWS_AS(gateway.complete(empty_budget), ConfigError);
}

TEST_CASE("oversized prompts are rejected, never truncated") {
    GatewayConfig cfg = test_config(GatewayMode::Live);
    cfg.prompt_token_budget = 10;  // ~40 chars
    TranscriptStore store;
    auto transport = std::make_unique<MockTransport>();
    transport->forbid_calls = true;
    LlmGateway gateway(cfg, store, std::move(transport));
    CHECK_THROWS_AS(gateway.complete(sample_request(std::string(200, 'x'))), PromptTooLarge);
}

TEST_CASE("api key travels as a bearer header and is never stored") {
    ScratchDir scratch("key");
    auto store_path = scratch.path() / "t.jsonl";
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {{200, chat_body("ok"), ""}};
    MockTransport* raw = transport.get();
    TranscriptStore store = TranscriptStore::open(store_path);
    LlmGateway gateway(test_config(GatewayMode::Record), store, std::move(transport));
    gateway.complete(sample_request());
    REQUIRE(raw->last_headers.size() == 1);
    CHECK(raw->last_headers[0].first == "Authorization");
    CHECK(raw->last_headers[0].second == "Bearer test-key");
    CHECK(read_file(store_path).find("test-key") == std::string::npos);
}

TEST_CASE("request body follows the chat-completions shape") {
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {{200, chat_body("ok"), ""}};
    MockTransport* raw = transport.get();
    TranscriptStore store;
    LlmGateway gateway(test_config(GatewayMode::Live), store, std::move(transport));
    gateway.complete(sample_request());
    auto body = nlohmann::json::parse(raw->last_body);
    CHECK(body["model"] == "m1");
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][0]["content"] == "sys");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["max_tokens"] == 64);
}

TEST_CASE("scripted client: keyed replies beat the ordered queue") {
    ScriptedClient client;
    client.push_reply("first");
    client.push_reply("second");
    client.set_reply(request_fingerprint(sample_request("keyed")), "special");
    CHECK(client.complete(sample_request("keyed")).text == "special");
    CHECK(client.complete(sample_request("a")).text == "first");
    CHECK(client.complete(sample_request("b")).text == "second");
    CHECK(client.calls() == 3);
    CHECK(client.requests()[1].user == "a");
    CHECK_THROWS_AS(client.complete(sample_request("c")), CacheMiss);
}

TEST_CASE("store survives duplicate fingerprints, later lines win") {
    ScratchDir scratch("dup");
    auto path = scratch.path() / "t.jsonl";
    {
        TranscriptStore store = TranscriptStore::open(path);
        store.put(sample_request(), Completion{"old", std::nullopt, CompletionSource::Live});
        store.put(sample_request(), Completion{"new", std::nullopt, CompletionSource::Live});
    }
    TranscriptStore reloaded = TranscriptStore::open(path);
    CHECK(reloaded.size() == 1);
    CHECK(reloaded.find(request_fingerprint(sample_request()))->text == "new");
}

TEST_CASE("concurrent completions against one gateway and store") {
    ScratchDir scratch("conc");
    TranscriptStore store = TranscriptStore::open(scratch.path() / "t.jsonl");
    constexpr int kRequests = 64;
    for (int i = 0; i < kRequests; ++i)
        store.put(sample_request("q" + std::to_string(i)),
                  Completion{"r" + std::to_string(i), std::nullopt, CompletionSource::Live});

    GatewayConfig cfg = test_config(GatewayMode::Replay);
    cfg.max_in_flight = 3;
    LlmGateway gateway(cfg, store, std::make_unique<MockTransport>());

    std::vector<std::thread> workers;
    std::atomic<int> mismatches{0};
    for (int t = 0; t < 8; ++t) {
        workers.emplace_back([&, t] {
            for (int i = t; i < kRequests; i += 8) {
                Completion c = gateway.complete(sample_request("q" + std::to_string(i)));
                if (c.text != "r" + std::to_string(i)) ++mismatches;
            }
        });
    }
    for (auto& w : workers) w.join();
    CHECK(mismatches == 0);

    // concurrent recording through a mock endpoint keeps one entry per fingerprint
    auto transport = std::make_unique<MockTransport>();
    transport->responses = {{200, chat_body("recorded"), ""}};
    TranscriptStore rec_store = TranscriptStore::open(scratch.path() / "rec.jsonl");
    LlmGateway recorder(test_config(GatewayMode::Record), rec_store, std::move(transport));
    std::vector<std::thread> writers;
    for (int t = 0; t < 6; ++t)
        writers.emplace_back([&, t] {
            for (int i = 0; i < 10; ++i)
                recorder.complete(sample_request("w" + std::to_string(i % 4)));
        });
    for (auto& w : writers) w.join();
    CHECK(rec_store.size() == 4);
    TranscriptStore reloaded = TranscriptStore::open(scratch.path() / "rec.jsonl");
    CHECK(reloaded.size() == 4);
}

TEST_CASE("live round trip against an in-process http server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    ++hits;
                    auto body = nlohmann::json::parse(req.body);
                    std::string user = body["messages"][1]["content"];
                    res.set_content(chat_body("echo: " + user), "application/json");
                });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    GatewayConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    cfg.mode = GatewayMode::Record;
    cfg.api_key = "k";
    ScratchDir scratch("live");
    TranscriptStore store = TranscriptStore::open(scratch.path() / "t.jsonl");
    {
        LlmGateway gateway(cfg, store);
        CHECK(gateway.complete(sample_request("ping")).text == "echo: ping");
        CHECK(hits == 1);
    }
    server.stop();
    server_thread.join();

    // The recorded exchange replays without the server.
    cfg.mode = GatewayMode::Replay;
    TranscriptStore reloaded = TranscriptStore::open(scratch.path() / "t.jsonl");
    LlmGateway replay(cfg, reloaded);
    CHECK(replay.complete(sample_request("ping")).text == "echo: ping");
}
