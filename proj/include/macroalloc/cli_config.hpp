#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "macroalloc/backtest_engine.hpp"
#include "macroalloc/llm_gateway.hpp"

namespace macroalloc {

struct DataPaths {
    std::filesystem::path bars;
    std::filesystem::path universe;
    std::filesystem::path macro;
    std::filesystem::path fomc_index;        // meeting_date,release_date,path
    std::filesystem::path fomc_summaries;    // JSON lines written by summarize-fomc
    std::filesystem::path news;              // JSON lines
    std::filesystem::path sentiment_memory;  // pipe table written by analyze-sentiment
    std::filesystem::path sectors;
    std::filesystem::path aliases;           // optional
    std::filesystem::path cache_dir;         // sentiment and FOMC caches
};

struct GatewaySettings {
    CassetteMode mode = CassetteMode::Replay;
    std::filesystem::path cassette;
    std::string endpoint;
    std::string api_key;  // from LLM_API_KEY only, never from the file
    std::string sentiment_model = "sentiment-model";
    std::string summary_model = "summary-model";
    int max_in_flight = 4;
    int max_retries = 3;
    int timeout_ms = 120'000;
};

struct RunConfig {
    std::filesystem::path source;  // the config file, when loaded from one
    BacktestConfig backtest;
    DataPaths data;
    GatewaySettings gateway;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;

    /// Everything that affects results, with absolute paths; the API key is omitted.
    [[nodiscard]] nlohmann::json resolved() const;
};

/// Parses a JSON config; relative paths resolve against the file's directory. Environment
/// variables LLM_ENDPOINT and LLM_API_KEY override the endpoint and supply the key.
/// Throws ConfigError naming the offending key.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Loaded stores for one run.
struct LoadedStores {
    MarketStore market;
    MacroStore macro;
    FomcStore fomc;
    SentimentMemory sentiment;
    AliasTable aliases;
    SectorMap sectors;
    std::vector<NewsArticle> news;  // empty when no news path is configured
};

/// Fails fast on the first unreadable or invalid store.
LoadedStores load_stores(const RunConfig& config);

/// Record/replay gateway over the configured cassette. Replay mode requires the cassette file
/// to exist (GatewayError otherwise); record and live modes need an endpoint.
std::shared_ptr<RecordReplayGateway> make_gateway(const RunConfig& config);

nlohmann::json gateway_usage(const RecordReplayGateway& gateway);

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitGateway = 3, kExitAudit = 4 };

/// Maps an exception from a command onto the exit-code contract.
int exit_code_for(const std::exception& e);

}  // namespace macroalloc
