#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "macroalloc/cli_config.hpp"
#include "macroalloc/core/error.hpp"
#include "macroalloc/core/text.hpp"
#include "macroalloc/llm_gateway.hpp"

namespace macroalloc::test {

// Engine info and warning chatter drowns test output; errors still show.
inline const bool kQuietLogs = [] {
    spdlog::set_level(spdlog::level::err);
    return true;
}();

inline std::filesystem::path fixture_dir(const std::string& name) {
    return std::filesystem::path(MACROALLOC_FIXTURE_ROOT) / name;
}

inline std::filesystem::path golden_dir() { return std::filesystem::path(MACROALLOC_GOLDEN_ROOT); }

/// Fresh empty directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("macroalloc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Answers by request tag, then by an optional fallback function of the request.
class ScriptedGateway final : public LlmGateway {
public:
    using Fallback = std::function<std::string(const ChatRequest&)>;

    void set(const std::string& tag, std::string text) { by_tag_[tag] = std::move(text); }
    void set_fallback(Fallback f) { fallback_ = std::move(f); }

    ChatResponse complete(const ChatRequest& req) override {
        std::lock_guard lock(mutex_);
        ++calls_;
        last_request_ = req;
        auto it = by_tag_.find(req.request_tag);
        if (it != by_tag_.end()) return ChatResponse{it->second, 10, 5, 0};
        if (fallback_) return ChatResponse{fallback_(req), 10, 5, 0};
        throw GatewayError("no scripted response for " + req.request_tag);
    }

    [[nodiscard]] int calls() const { return calls_; }
    [[nodiscard]] const ChatRequest& last_request() const { return last_request_; }

private:
    std::map<std::string, std::string> by_tag_;
    Fallback fallback_;
    std::mutex mutex_;
    int calls_ = 0;
    ChatRequest last_request_;
};

/// Loads the decision script of a fixture into a scripted gateway.
inline void load_script(ScriptedGateway& g, const std::filesystem::path& script_path) {
    const auto script = nlohmann::json::parse(read_file(script_path));
    const std::string strategy = script.at("strategy").get<std::string>();
    for (const auto& day : script.at("days")) {
        const std::string date = day.at("date").get<std::string>();
        g.set("ranking:" + strategy + ":" + date, day.at("reflection").get<std::string>());
        const std::string decision = day.at("decision_response").get<std::string>();
        g.set("decision:" + strategy + ":" + date, decision);
        g.set("decision:" + strategy + ":" + date + ":json-retry", decision);
    }
}

}  // namespace macroalloc::test
