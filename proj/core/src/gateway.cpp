#include "trace/gateway.hpp"

#include "trace/errors.hpp"

#include <nlohmann/json.hpp>

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

namespace trace {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(GatewayMode mode) {
    switch (mode) {
        case GatewayMode::Live: return "live";
        case GatewayMode::Record: return "record";
        case GatewayMode::Replay: return "replay";
    }
    return "?";
}

std::optional<GatewayMode> gateway_mode_from_string(std::string_view text) {
    if (text == "live") return GatewayMode::Live;
    if (text == "record") return GatewayMode::Record;
    if (text == "replay") return GatewayMode::Replay;
    return std::nullopt;
}

namespace {

std::string canonical_request_json(const PromptRequest& r) {
    // nlohmann::json orders object keys lexicographically and prints doubles
    // in shortest round-trip form, which pins the serialization.
    nlohmann::json doc;
    doc["max_output_tokens"] = r.max_output_tokens;
    doc["model_name"] = r.model_name;
    doc["system"] = r.system;
    doc["temperature"] = r.temperature;
    doc["user"] = r.user;
    return doc.dump();
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

ordered_json request_to_json(const PromptRequest& r) {
    ordered_json doc;
    doc["system"] = r.system;
    doc["user"] = r.user;
    doc["model_name"] = r.model_name;
    doc["temperature"] = r.temperature;
    doc["max_output_tokens"] = r.max_output_tokens;
    return doc;
}

PromptRequest request_from_json(const ordered_json& doc) {
    PromptRequest r;
    r.system = doc.at("system").get<std::string>();
    r.user = doc.at("user").get<std::string>();
    r.model_name = doc.at("model_name").get<std::string>();
    r.temperature = doc.at("temperature").get<double>();
    r.max_output_tokens = doc.at("max_output_tokens").get<int>();
    return r;
}

ordered_json completion_to_json(const Completion& c) {
    ordered_json doc;
    doc["text"] = c.text;
    if (c.usage) {
        doc["usage"] = ordered_json{{"prompt_tokens", c.usage->prompt_tokens},
                                    {"completion_tokens", c.usage->completion_tokens}};
    } else {
        doc["usage"] = nullptr;
    }
    switch (c.source) {
        case CompletionSource::Live: doc["source"] = "live"; break;
        case CompletionSource::Cache: doc["source"] = "cache"; break;
        case CompletionSource::Scripted: doc["source"] = "scripted"; break;
    }
    return doc;
}

Completion completion_from_json(const ordered_json& doc) {
    Completion c;
    c.text = doc.at("text").get<std::string>();
    if (doc.contains("usage") && !doc.at("usage").is_null()) {
        TokenUsage u;
        u.prompt_tokens = doc.at("usage").at("prompt_tokens").get<long>();
        u.completion_tokens = doc.at("usage").at("completion_tokens").get<long>();
        c.usage = u;
    }
    std::string source = doc.value("source", "live");
    c.source = source == "cache"      ? CompletionSource::Cache
               : source == "scripted" ? CompletionSource::Scripted
                                      : CompletionSource::Live;
    return c;
}

}  // namespace

std::string request_fingerprint(const PromptRequest& request) {
    return to_hex(fnv1a64(canonical_request_json(request)));
}

std::string rfc3339_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

TranscriptStore TranscriptStore::open(const std::filesystem::path& path) {
    TranscriptStore store;
    store.state_->backing = path;
    if (std::filesystem::exists(path)) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot read transcript store: " + path.string());
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                ordered_json doc = ordered_json::parse(line);
                Entry entry;
                entry.request = request_from_json(doc.at("request"));
                entry.completion = completion_from_json(doc.at("completion"));
                entry.completion.source = CompletionSource::Cache;
                entry.recorded_at = doc.value("recorded_at", "");
                // Later lines win so a store can be appended to safely.
                store.state_->entries[doc.at("fingerprint").get<std::string>()] = std::move(entry);
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
    }
    return store;
}

TranscriptStore TranscriptStore::in_memory() { return TranscriptStore{}; }

std::optional<Completion> TranscriptStore::find(const std::string& fingerprint) const {
    std::lock_guard lock(state_->mutex);
    auto it = state_->entries.find(fingerprint);
    if (it == state_->entries.end()) return std::nullopt;
    Completion c = it->second.completion;
    c.source = CompletionSource::Cache;
    return c;
}

void TranscriptStore::put(const PromptRequest& request, const Completion& completion) {
    std::string fp = request_fingerprint(request);
    std::lock_guard lock(state_->mutex);
    Entry entry{request, completion, rfc3339_now()};
    if (!state_->backing.empty()) append_line(fp, entry);
    state_->entries[fp] = std::move(entry);
}

std::size_t TranscriptStore::size() const {
    std::lock_guard lock(state_->mutex);
    return state_->entries.size();
}

void TranscriptStore::append_line(const std::string& fingerprint, const Entry& entry) {
    std::ofstream out(state_->backing, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to transcript store: " + state_->backing.string());
    ordered_json doc;
    doc["fingerprint"] = fingerprint;
    doc["request"] = request_to_json(entry.request);
    doc["completion"] = completion_to_json(entry.completion);
    doc["recorded_at"] = entry.recorded_at;
    out << doc.dump() << "\n";
}

GatewayConfig GatewayConfig::from_env(GatewayConfig base) {
    if (const char* key = std::getenv("TRACE_LLM_API_KEY")) base.api_key = key;
    return base;
}

namespace {

class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(int timeout_seconds) : timeout_seconds_(timeout_seconds) {}

    HttpResponse post_json(const std::string& url,
                           const std::vector<std::pair<std::string, std::string>>& headers,
                           const std::string& body) override {
        // Split "http://host:port/path" into client base and path.
        std::size_t scheme = url.find("://");
        if (scheme == std::string::npos) return {0, "", "malformed endpoint url: " + url};
        std::size_t path_pos = url.find('/', scheme + 3);
        std::string base = path_pos == std::string::npos ? url : url.substr(0, path_pos);
        std::string path = path_pos == std::string::npos ? "/" : url.substr(path_pos);

        httplib::Client client(base);
        client.set_connection_timeout(timeout_seconds_, 0);
        client.set_read_timeout(timeout_seconds_, 0);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client.Post(path, h, body, "application/json");
        if (!res) return {0, "", httplib::to_string(res.error())};
        return {res->status, res->body, ""};
    }

private:
    int timeout_seconds_;
};

}  // namespace

std::unique_ptr<HttpTransport> make_httplib_transport(int timeout_seconds) {
    return std::make_unique<HttplibTransport>(timeout_seconds);
}

LlmGateway::Limiter::Limiter(int slots) : slots_(slots > 0 ? slots : 1) {}

void LlmGateway::Limiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
}

void LlmGateway::Limiter::release() {
    {
        std::lock_guard lock(mutex_);
        ++slots_;
    }
    cv_.notify_one();
}

LlmGateway::LlmGateway(GatewayConfig config, TranscriptStore& store,
                       std::unique_ptr<HttpTransport> transport)
    : config_(std::move(config)),
      store_(store),
      transport_(transport ? std::move(transport) : make_httplib_transport()),
      limiter_(config_.max_in_flight) {}

Completion LlmGateway::complete(const PromptRequest& request) {
    if (request.temperature < 0.0 || request.temperature > 2.0)
        throw ConfigError("temperature out of range [0, 2]");
    if (request.max_output_tokens <= 0)
        throw ConfigError("max_output_tokens must be positive");
    long estimated = static_cast<long>((request.system.size() + request.user.size()) / 4);
    if (estimated > config_.prompt_token_budget)
        throw PromptTooLarge("estimated " + std::to_string(estimated) +
                             " tokens exceeds budget " +
                             std::to_string(config_.prompt_token_budget));

    if (config_.mode == GatewayMode::Replay) {
        std::string fp = request_fingerprint(request);
        if (auto hit = store_.find(fp)) return *hit;
        throw CacheMiss(fp);
    }

    Completion completion = live_call(request);
    if (config_.mode == GatewayMode::Record) store_.put(request, completion);
    return completion;
}

Completion LlmGateway::live_call(const PromptRequest& request) {
    if (config_.endpoint.empty())
        throw ConfigError("gateway endpoint not configured for live mode");

    ordered_json body;
    body["model"] = request.model_name;
    body["messages"] = ordered_json::array({
        ordered_json{{"role", "system"}, {"content", request.system}},
        ordered_json{{"role", "user"}, {"content", request.user}},
    });
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_output_tokens;
    std::string payload = body.dump();

    std::vector<std::pair<std::string, std::string>> headers;
    if (!config_.api_key.empty())
        headers.emplace_back("Authorization", "Bearer " + config_.api_key);

    limiter_.acquire();
    struct Release {
        Limiter& l;
        ~Release() { l.release(); }
    } release{limiter_};

    std::string last_failure;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(
                static_cast<long>(config_.backoff_base_ms) * (1L << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
        HttpResponse res = transport_->post_json(config_.endpoint, headers, payload);
        if (res.status == 0) {
            last_failure = res.error.empty() ? "transport failure" : res.error;
            continue;  // timeout / connection failure: retryable
        }
        if (res.status == 429 || (res.status >= 500 && res.status <= 599)) {
            last_failure = "status " + std::to_string(res.status);
            continue;
        }
        if (res.status < 200 || res.status >= 300) throw ApiError(res.status, res.body);

        try {
            ordered_json doc = ordered_json::parse(res.body);
            Completion c;
            c.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
            if (doc.contains("usage") && doc["usage"].is_object()) {
                TokenUsage u;
                u.prompt_tokens = doc["usage"].value("prompt_tokens", 0L);
                u.completion_tokens = doc["usage"].value("completion_tokens", 0L);
                c.usage = u;
            }
            c.source = CompletionSource::Live;
            return c;
        } catch (const nlohmann::json::exception& e) {
            throw ApiError(res.status, std::string("unparseable completion body: ") + e.what());
        }
    }
    throw TransportError("exhausted " + std::to_string(config_.max_retries + 1) +
                         " attempts: " + last_failure);
}

void ScriptedClient::push_reply(std::string text) {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(text));
}

void ScriptedClient::set_reply(const std::string& fingerprint, std::string text) {
    std::lock_guard lock(mutex_);
    keyed_[fingerprint] = std::move(text);
}

Completion ScriptedClient::complete(const PromptRequest& request) {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    Completion c;
    c.source = CompletionSource::Scripted;
    auto it = keyed_.find(request_fingerprint(request));
    if (it != keyed_.end()) {
        c.text = it->second;
        return c;
    }
    if (queue_.empty())
        throw CacheMiss(request_fingerprint(request));
    c.text = std::move(queue_.front());
    queue_.pop_front();
    return c;
}

}  // namespace trace
