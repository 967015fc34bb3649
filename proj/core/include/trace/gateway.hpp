#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace trace {

struct PromptRequest {
    std::string system;
    std::string user;
    std::string model_name;
    double temperature = 0.0;  // must lie in [0, 2]
    int max_output_tokens = 1024;
};

enum class CompletionSource { Live, Cache, Scripted };

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct Completion {
    std::string text;
    std::optional<TokenUsage> usage;
    CompletionSource source = CompletionSource::Live;
};

// Stable across processes and platforms: hash of the canonical serialization
// (sorted keys, normalized numbers) of all request fields.
std::string request_fingerprint(const PromptRequest& request);

// Fingerprint-keyed record of request/completion exchanges, optionally backed
// by a JSONL file. Writes are serialized; safe for concurrent use.
class TranscriptStore {
public:
    TranscriptStore() = default;

    // Loads entries when the file exists, then appends on every put().
    static TranscriptStore open(const std::filesystem::path& path);
    // In-memory only.
    static TranscriptStore in_memory();

    std::optional<Completion> find(const std::string& fingerprint) const;
    void put(const PromptRequest& request, const Completion& completion);
    std::size_t size() const;

private:
    struct Entry {
        PromptRequest request;
        Completion completion;
        std::string recorded_at;
    };
    struct State {
        mutable std::mutex mutex;
        std::map<std::string, Entry> entries;
        std::filesystem::path backing;
    };
    std::unique_ptr<State> state_ = std::make_unique<State>();

    void append_line(const std::string& fingerprint, const Entry& entry);
};

enum class GatewayMode { Live, Record, Replay };

std::string_view to_string(GatewayMode mode);
std::optional<GatewayMode> gateway_mode_from_string(std::string_view text);

struct HttpResponse {
    int status = 0;        // 0 means the transport itself failed
    std::string body;
    std::string error;     // transport failure description
};

// Seam for the wire protocol; production code posts JSON over HTTP.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post_json(const std::string& url,
                                   const std::vector<std::pair<std::string, std::string>>& headers,
                                   const std::string& body) = 0;
};

std::unique_ptr<HttpTransport> make_httplib_transport(int timeout_seconds = 120);

// Anything that can answer a prompt: the live gateway, the replay gateway,
// or a scripted stand-in for tests.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual Completion complete(const PromptRequest& request) = 0;
};

struct GatewayConfig {
    std::string endpoint;           // chat-completions URL
    std::string api_key;            // from TRACE_LLM_API_KEY; never persisted
    GatewayMode mode = GatewayMode::Replay;
    int max_retries = 3;            // transient failures: 429, 5xx, timeouts
    int backoff_base_ms = 250;      // doubled per attempt
    int max_in_flight = 4;
    long prompt_token_budget = 131072;  // estimated tokens, chars/4

    static GatewayConfig from_env(GatewayConfig base);  // reads TRACE_LLM_API_KEY
};

// Single completion interface over three modes. Replay never touches the
// network; Record performs the live call then persists the exchange.
class LlmGateway : public CompletionClient {
public:
    LlmGateway(GatewayConfig config, TranscriptStore& store,
               std::unique_ptr<HttpTransport> transport = nullptr);

    Completion complete(const PromptRequest& request) override;

private:
    class Limiter {
    public:
        explicit Limiter(int slots);
        void acquire();
        void release();

    private:
        std::mutex mutex_;
        std::condition_variable cv_;
        int slots_;
    };

    Completion live_call(const PromptRequest& request);

    GatewayConfig config_;
    TranscriptStore& store_;
    std::unique_ptr<HttpTransport> transport_;
    Limiter limiter_;
};

// Canned replies for tests: fingerprint-keyed replies take precedence, then
// the ordered queue. Records every request it serves.
class ScriptedClient : public CompletionClient {
public:
    void push_reply(std::string text);
    void set_reply(const std::string& fingerprint, std::string text);

    Completion complete(const PromptRequest& request) override;

    const std::vector<PromptRequest>& requests() const { return requests_; }
    std::size_t calls() const { return requests_.size(); }

private:
    std::mutex mutex_;
    std::deque<std::string> queue_;
    std::map<std::string, std::string> keyed_;
    std::vector<PromptRequest> requests_;
};

// RFC3339 UTC timestamp, e.g. "2026-01-02T03:04:05Z".
std::string rfc3339_now();

}  // namespace trace
