#include "macroalloc/llm_gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/hash.hpp"
#include "macroalloc/core/text.hpp"

namespace macroalloc {

using nlohmann::json;

namespace {

const char* role_name(Role r) { return r == Role::System ? "system" : "user"; }

std::string dump_lossy(const json& j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string format_temperature(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
}

json response_to_json(const ChatResponse& r) {
    return json{{"text", r.text},
                {"input_tokens", r.input_tokens},
                {"output_tokens", r.output_tokens},
                {"latency_ms", r.latency_ms}};
}

ChatResponse response_from_json(const json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    r.input_tokens = j.value("input_tokens", std::int64_t{0});
    r.output_tokens = j.value("output_tokens", std::int64_t{0});
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    return r;
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

// ---- ChatRequest ----

std::string ChatRequest::canonical() const {
    std::string out;
    auto field = [&out](std::string_view name, std::string_view value) {
        out += name;
        out += '=';
        out += std::to_string(value.size());
        out += ':';
        out += value;
        out += '\n';
    };
    field("model", model_id);
    field("temperature", format_temperature(temperature));
    field("max_output_tokens", std::to_string(max_output_tokens));
    field("request_tag", request_tag);
    field("messages", std::to_string(messages.size()));
    for (const auto& m : messages) {
        field("role", role_name(m.role));
        field("text", m.text);
    }
    return out;
}

std::string ChatRequest::hash() const { return sha256_hex(canonical()); }

json ChatRequest::snapshot() const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", role_name(m.role)}, {"content", m.text}});
    return json{{"model", model_id},
                {"temperature", temperature},
                {"max_output_tokens", max_output_tokens},
                {"request_tag", request_tag},
                {"messages", msgs}};
}

void validate_request(const ChatRequest& req) {
    if (req.messages.empty()) throw ValidationError("chat request has no messages");
    if (!(req.temperature >= 0.0) || !std::isfinite(req.temperature)) {
        throw ValidationError("chat request temperature must be >= 0");
    }
    if (req.max_output_tokens <= 0) throw ValidationError("max_output_tokens must be positive");
}

ChatRequest make_request(std::string prompt, std::string model_id, int max_output_tokens,
                         std::string request_tag) {
    ChatRequest req;
    req.messages.push_back({Role::User, std::move(prompt)});
    req.model_id = std::move(model_id);
    req.max_output_tokens = max_output_tokens;
    req.request_tag = std::move(request_tag);
    return req;
}

// ---- HTTP ----

namespace {

class HttplibTransport final : public HttpTransport {
public:
    HttpReply post(const std::string& url, const std::string& body, const HttpHeaders& headers,
                   std::chrono::milliseconds timeout) override {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw TransportError("endpoint lacks scheme: " + url);
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(origin);
        const auto secs = static_cast<time_t>(timeout.count() / 1000);
        const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        httplib::Headers h;
        for (const auto& [k, v] : headers) h.emplace(k, v);
        auto res = client.Post(path, h, body, "application/json");
        if (!res) {
            throw TransportError("POST " + url + " failed: " + httplib::to_string(res.error()));
        }
        return HttpReply{res->status, res->body};
    }
};

}  // namespace

std::unique_ptr<HttpTransport> make_http_transport() { return std::make_unique<HttplibTransport>(); }

std::string build_chat_body(const ChatRequest& req) {
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({{"role", role_name(m.role)}, {"content", m.text}});
    json body{{"model", req.model_id},
              {"messages", msgs},
              {"temperature", req.temperature},
              {"max_tokens", req.max_output_tokens}};
    return dump_lossy(body);
}

ChatResponse parse_chat_body(const std::string& body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw TransportError("chat response is not a JSON object");
    ChatResponse r;
    try {
        const auto& content = j.at("choices").at(0).at("message").at("content");
        r.text = content.is_null() ? std::string{} : content.get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("chat response missing choices[0].message.content: ") + e.what());
    }
    if (auto it = j.find("usage"); it != j.end() && it->is_object()) {
        r.input_tokens = it->value("prompt_tokens", std::int64_t{0});
        r.output_tokens = it->value("completion_tokens", std::int64_t{0});
    }
    return r;
}

std::string chat_completions_url(const std::string& endpoint) {
    static const std::string suffix = "/chat/completions";
    std::string e = endpoint;
    while (!e.empty() && e.back() == '/') e.pop_back();
    if (e.size() >= suffix.size() && e.compare(e.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return e;
    }
    return e + suffix;
}

OpenAiCompatibleClient::OpenAiCompatibleClient(LiveConfig config, std::unique_ptr<HttpTransport> transport,
                                               Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      in_flight_(std::clamp(config_.max_in_flight, 1, 64)),
      rng_(config_.retry.seed) {
    if (config_.endpoint.empty()) throw ConfigError("live gateway requires an endpoint (LLM_ENDPOINT)");
    if (!transport_) transport_ = make_http_transport();
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::chrono::milliseconds OpenAiCompatibleClient::backoff(int retry_index) {
    const double base = static_cast<double>(config_.retry.base_delay.count()) *
                        std::pow(config_.retry.multiplier, retry_index);
    double delay = base;
    if (config_.retry.jitter && base > 0) {
        std::lock_guard lock(rng_mutex_);
        std::uniform_real_distribution<double> dist(0.5, 1.0);
        delay = base * dist(rng_);
    }
    return std::chrono::milliseconds{static_cast<std::int64_t>(delay)};
}

ChatResponse OpenAiCompatibleClient::complete(const ChatRequest& req) {
    validate_request(req);
    const std::string url = chat_completions_url(config_.endpoint);
    const std::string body = build_chat_body(req);
    HttpHeaders headers{{"Accept", "application/json"}};
    if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);

    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<64>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    const int max_attempts = 1 + std::clamp(config_.retry.max_retries, 0, 3);
    std::string last_error;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        if (attempt > 0) sleeper_(backoff(attempt - 1));
        ++attempts_;
        const auto started = std::chrono::steady_clock::now();
        try {
            HttpReply reply = transport_->post(url, body, headers, config_.timeout);
            if (reply.status >= 200 && reply.status < 300) {
                ChatResponse r = parse_chat_body(reply.body);
                r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::steady_clock::now() - started).count();
                return r;
            }
            last_error = "HTTP " + std::to_string(reply.status);
            if (!retryable_status(reply.status)) break;
        } catch (const TransportError& e) {
            last_error = e.what();
        }
        spdlog::warn("chat completion attempt {} failed: {}", attempt + 1, last_error);
    }
    throw TransportError("chat completion failed: " + last_error);
}

// ---- Cassette ----

CassetteMode parse_cassette_mode(std::string_view s) {
    const auto v = to_lower(s);
    if (v == "record") return CassetteMode::Record;
    if (v == "replay") return CassetteMode::Replay;
    if (v == "live") return CassetteMode::Live;
    throw ConfigError("unknown gateway mode '" + std::string(s) + "'");
}

std::string to_string(CassetteMode m) {
    switch (m) {
        case CassetteMode::Record: return "record";
        case CassetteMode::Replay: return "replay";
        case CassetteMode::Live: return "live";
    }
    return "?";
}

Cassette::Cassette(std::filesystem::path path) : path_(std::move(path)) {}

std::shared_ptr<Cassette> Cassette::load(const std::filesystem::path& path) {
    auto c = std::make_shared<Cassette>(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cassette " + path.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("hash") || !j.contains("response")) {
            throw ParseError(path.string(), n, "malformed cassette entry");
        }
        c->entries_[j.at("hash").get<std::string>()] = response_from_json(j.at("response"));
    }
    return c;
}

std::optional<ChatResponse> Cassette::find(const std::string& hash) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(hash);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void Cassette::put(const ChatRequest& req, const ChatResponse& resp) {
    const std::string hash = req.hash();
    std::lock_guard lock(mutex_);
    entries_[hash] = resp;
    if (path_) {
        json line{{"hash", hash}, {"request", req.snapshot()}, {"response", response_to_json(resp)}};
        append_file(*path_, dump_lossy(line) + "\n");
    }
}

void Cassette::put_hash(const std::string& hash, const ChatResponse& resp) {
    std::lock_guard lock(mutex_);
    entries_[hash] = resp;
    if (path_) {
        json line{{"hash", hash}, {"response", response_to_json(resp)}};
        append_file(*path_, dump_lossy(line) + "\n");
    }
}

std::size_t Cassette::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::string Cassette::content_hash() const {
    std::lock_guard lock(mutex_);
    Sha256 h;
    for (const auto& [hash, r] : entries_) h.field(hash).field(r.text);
    return h.hex();
}

// ---- RecordReplayGateway ----

RecordReplayGateway::RecordReplayGateway(CassetteMode mode, std::shared_ptr<Cassette> cassette,
                                         std::shared_ptr<LlmGateway> live)
    : mode_(mode), cassette_(std::move(cassette)), live_(std::move(live)) {
    if (!cassette_) cassette_ = std::make_shared<Cassette>();
    if (mode_ != CassetteMode::Replay && !live_) {
        throw ConfigError(to_string(mode_) + " mode requires a live gateway");
    }
}

ChatResponse RecordReplayGateway::complete(const ChatRequest& req) {
    validate_request(req);
    if (mode_ == CassetteMode::Replay) {
        const std::string hash = req.hash();
        auto hit = cassette_->find(hash);
        if (!hit) throw CassetteMissError("no cassette entry for request " + hash + " (" + req.request_tag + ")");
        ++replayed_;
        return *hit;
    }
    ChatResponse r = live_->complete(req);
    ++live_calls_;
    input_tokens_ += r.input_tokens;
    output_tokens_ += r.output_tokens;
    if (mode_ == CassetteMode::Record) cassette_->put(req, r);
    return r;
}

// ---- JSON extraction ----

namespace {

std::optional<json> try_parse(std::string_view s) {
    if (s.empty()) return std::nullopt;
    json j = json::parse(s.begin(), s.end(), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

std::optional<std::string_view> fenced_body(std::string_view text) {
    const auto open = text.find("```");
    if (open == std::string_view::npos) return std::nullopt;
    auto body_start = text.find('\n', open + 3);
    if (body_start == std::string_view::npos) return std::nullopt;
    ++body_start;
    const auto close = text.find("```", body_start);
    const auto end = close == std::string_view::npos ? text.size() : close;
    return text.substr(body_start, end - body_start);
}

// End index (exclusive) of the balanced value starting at `start`, honoring string literals.
std::optional<std::size_t> balanced_end(std::string_view text, std::size_t start) {
    std::vector<char> stack;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        switch (c) {
            case '"': in_string = true; break;
            case '{': stack.push_back('}'); break;
            case '[': stack.push_back(']'); break;
            case '}':
            case ']':
                if (stack.empty() || stack.back() != c) return std::nullopt;
                stack.pop_back();
                if (stack.empty()) return i + 1;
                break;
            default: break;
        }
    }
    return std::nullopt;
}

}  // namespace

json extract_json(std::string_view text) {
    const std::string trimmed = trim(text);
    if (auto j = try_parse(trimmed)) return *j;
    if (auto body = fenced_body(trimmed)) {
        if (auto j = try_parse(trim(*body))) return *j;
    }
    constexpr int kMaxCandidates = 64;
    int candidates = 0;
    for (std::size_t i = 0; i < trimmed.size() && candidates < kMaxCandidates; ++i) {
        if (trimmed[i] != '{' && trimmed[i] != '[') continue;
        ++candidates;
        auto end = balanced_end(trimmed, i);
        if (!end) continue;
        if (auto j = try_parse(std::string_view(trimmed).substr(i, *end - i))) return *j;
    }
    throw ExtractionError("no parseable JSON in model output", std::string(text));
}

json complete_json(LlmGateway& gateway, const ChatRequest& req, std::string_view reminder) {
    ChatResponse first = gateway.complete(req);
    try {
        return extract_json(first.text);
    } catch (const ExtractionError&) {
        spdlog::debug("retrying {} with JSON reminder", req.request_tag);
    }
    ChatRequest retry = req;
    retry.messages.back().text += reminder;
    retry.request_tag += ":json-retry";
    ChatResponse second = gateway.complete(retry);
    return extract_json(second.text);
}

}  // namespace macroalloc
