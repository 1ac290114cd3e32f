#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace macroalloc {

enum class Role { System, User };

struct ChatMessage {
    Role role = Role::User;
    std::string text;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::string request_tag;

    /// Length-prefixed byte serialization in fixed field order. Independent of how the
    /// request was assembled, and exact for arbitrary (even non-UTF-8) message bytes.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] std::string hash() const;
    /// Human-readable copy stored next to the response in cassettes.
    [[nodiscard]] nlohmann::json snapshot() const;
};

/// Throws ValidationError when a request breaks its invariants (no messages, negative temperature...).
void validate_request(const ChatRequest& req);

ChatRequest make_request(std::string prompt, std::string model_id, int max_output_tokens,
                         std::string request_tag);

struct ChatResponse {
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t latency_ms = 0;

    friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

class LlmGateway {
public:
    virtual ~LlmGateway() = default;
    virtual ChatResponse complete(const ChatRequest& req) = 0;
};

// ---- live transport ----

struct HttpReply {
    int status = 0;
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    /// Throws TransportError on connection failure or timeout.
    virtual HttpReply post(const std::string& url, const std::string& body, const HttpHeaders& headers,
                           std::chrono::milliseconds timeout) = 0;
};

std::unique_ptr<HttpTransport> make_http_transport();

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{500};
    double multiplier = 2.0;
    bool jitter = true;
    std::uint64_t seed = 0;
};

struct LiveConfig {
    std::string endpoint;
    std::string api_key;
    std::chrono::milliseconds timeout{120'000};
    RetryPolicy retry;
    int max_in_flight = 4;
};

/// OpenAI-style `/chat/completions` JSON body.
std::string build_chat_body(const ChatRequest& req);
/// Extracts `choices[0].message.content` and token usage.
ChatResponse parse_chat_body(const std::string& body);
/// Appends `/chat/completions` unless the endpoint already names it.
std::string chat_completions_url(const std::string& endpoint);

class OpenAiCompatibleClient final : public LlmGateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    OpenAiCompatibleClient(LiveConfig config, std::unique_ptr<HttpTransport> transport,
                           Sleeper sleeper = {});

    ChatResponse complete(const ChatRequest& req) override;
    [[nodiscard]] std::int64_t attempts() const { return attempts_.load(); }

private:
    std::chrono::milliseconds backoff(int retry_index);

    LiveConfig config_;
    std::unique_ptr<HttpTransport> transport_;
    Sleeper sleeper_;
    std::counting_semaphore<64> in_flight_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
    std::atomic<std::int64_t> attempts_{0};
};

// ---- record / replay ----

enum class CassetteMode { Record, Replay, Live };

CassetteMode parse_cassette_mode(std::string_view s);
std::string to_string(CassetteMode m);

/// Request-hash keyed recordings, persisted as JSON lines `{hash, request, response}`.
/// Later lines win when a hash repeats.
class Cassette {
public:
    Cassette() = default;
    explicit Cassette(std::filesystem::path path);

    static std::shared_ptr<Cassette> load(const std::filesystem::path& path);

    [[nodiscard]] std::optional<ChatResponse> find(const std::string& hash) const;
    /// Inserts and, when file-backed, appends one line.
    void put(const ChatRequest& req, const ChatResponse& resp);
    void put_hash(const std::string& hash, const ChatResponse& resp);

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::string content_hash() const;
    [[nodiscard]] const std::optional<std::filesystem::path>& path() const { return path_; }

private:
    std::optional<std::filesystem::path> path_;
    std::map<std::string, ChatResponse> entries_;
    mutable std::mutex mutex_;
};

class RecordReplayGateway final : public LlmGateway {
public:
    /// `live` may be null in replay mode; replay never touches it.
    RecordReplayGateway(CassetteMode mode, std::shared_ptr<Cassette> cassette,
                        std::shared_ptr<LlmGateway> live);

    ChatResponse complete(const ChatRequest& req) override;

    [[nodiscard]] CassetteMode mode() const { return mode_; }
    [[nodiscard]] std::int64_t live_calls() const { return live_calls_.load(); }
    [[nodiscard]] std::int64_t replayed() const { return replayed_.load(); }
    [[nodiscard]] std::int64_t input_tokens() const { return input_tokens_.load(); }
    [[nodiscard]] std::int64_t output_tokens() const { return output_tokens_.load(); }
    [[nodiscard]] const Cassette& cassette() const { return *cassette_; }

private:
    CassetteMode mode_;
    std::shared_ptr<Cassette> cassette_;
    std::shared_ptr<LlmGateway> live_;
    std::atomic<std::int64_t> live_calls_{0};
    std::atomic<std::int64_t> replayed_{0};
    std::atomic<std::int64_t> input_tokens_{0};
    std::atomic<std::int64_t> output_tokens_{0};
};

/// Recovers a JSON value from model output: as-is, then inside ``` fences, then the first
/// balanced top-level object or array. Throws ExtractionError carrying the raw text.
nlohmann::json extract_json(std::string_view text);

/// Completes `req` and extracts JSON from the reply. If extraction fails the request is sent
/// once more with `reminder` appended to the last message. Throws ExtractionError after that.
nlohmann::json complete_json(LlmGateway& gateway, const ChatRequest& req, std::string_view reminder);

inline constexpr std::string_view kJsonOnlyReminder =
    "\n\nRespond ONLY with valid JSON, no additional text or markdown.";

}  // namespace macroalloc
