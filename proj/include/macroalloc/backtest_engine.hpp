#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "macroalloc/decision_agent.hpp"
#include "macroalloc/macro_pipeline.hpp"
#include "macroalloc/market_data.hpp"
#include "macroalloc/metrics_reporting.hpp"
#include "macroalloc/portfolio_manager.hpp"
#include "macroalloc/ranking_agents.hpp"
#include "macroalloc/sentiment_pipeline.hpp"

namespace macroalloc {

struct BacktestConfig {
    Date start;
    Date end;
    Money initial_capital = Money::usd(100'000'000);
    Strategy strategy = Strategy::TopDown;
    std::int64_t commission_bps = 10;
    std::int64_t impact_bps = 10;
    double max_utilization = 0.90;
    double risk_free_rate = 0.0;  // annualized percent
    int annualization_days = 252;
    double top_down_size_cap_pct = 20.0;
    std::size_t max_sentiment_rows = 400;
    std::string ranking_model = "ranking-model";
    std::string decision_model = "decision-model";
    int ranking_max_tokens = 4096;
    int decision_max_tokens = 1024;

    /// Throws ConfigError on start >= end, negative bps or utilization outside (0, 1].
    void validate() const;
    [[nodiscard]] PortfolioRules rules() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Borrowed views of every store the loop reads. All must outlive run().
struct BacktestInputs {
    const MarketStore& market;
    const MacroStore& macro;
    const FomcStore& fomc;
    const SentimentMemory& sentiment;
    const AliasTable& aliases;
    const SectorMap& sectors;
    LlmGateway& gateway;
};

struct MacroUse {
    Indicator indicator = Indicator::CPI;
    YearMonth period;
    Date release_date;
};

enum class DayStatus { Traded, Hold };
std::string to_string(DayStatus s);

struct DayLog {
    Date date;
    DayStatus status = DayStatus::Traded;
    std::string failure;
    std::string prompt;
    std::string reflection;
    DecisionSet decisions;
    std::vector<SentimentRecord> used_records;
    std::vector<MacroUse> macro_used;
    std::optional<FomcSummary> fomc_used;
    std::vector<Fill> fills;
    std::vector<Skip> skips;
    Money equity;  // at the close
    nlohmann::json state;  // end-of-day snapshot
};

struct BacktestResult {
    BacktestConfig config;
    std::vector<DayLog> days;
    EquityCurve equity_curve;  // one point per trading day, at the close
    std::vector<double> daily_returns;
    std::vector<Fill> fills;
    std::vector<Skip> skips;
    PortfolioState final_state;
    MetricSet metrics;
    nlohmann::json manifest;
};

/// Runs the daily loop over the trading days in [start, end]. Before day 1: config validation,
/// a non-empty day range with a previous trading day, and (top-down) a sector for every
/// ticker that enters the universe. Agent failures hold the day; forced liquidations still run.
BacktestResult run_backtest(const BacktestConfig& config, const BacktestInputs& inputs);

// ---- look-ahead audit ----

struct AuditViolation {
    Date decision_date;
    std::string kind;  // prompt_date | sentiment_record | macro_release | fomc_release
    std::string item;
    std::string detail;
};

struct AuditReport {
    std::vector<AuditViolation> violations;
    std::size_t prompts_checked = 0;
    std::size_t records_checked = 0;
    std::size_t macro_checked = 0;

    [[nodiscard]] bool clean() const { return violations.empty(); }
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Reference stores the audit trusts. Any may be null; null stores are not consulted.
struct AuditStores {
    const MacroStore* macro = nullptr;
    const FomcStore* fomc = nullptr;
    /// article_ref -> publication date of the source article.
    const std::map<std::string, Date>* article_dates = nullptr;
    const SentimentMemory* sentiment = nullptr;
};

std::map<std::string, Date> article_dates(const std::vector<NewsArticle>& articles);

/// ISO dates in a prompt beyond those in its template must precede the decision date; every
/// record and release the day used must check out against the reference stores. One violation
/// per offending item.
AuditReport look_ahead_audit(const std::vector<DayLog>& days, Strategy strategy, const AuditStores& stores);

// ---- run directory ----

/// Writes config.resolved, prompts/, reflections/, decisions/, states/, days.jsonl, fills.csv,
/// skips.csv, equity.csv, metrics.json, audit.json, usage.json and manifest.json into `dir`.
/// The directory is assembled beside `dir` and renamed into place; an existing run directory
/// at `dir` is replaced, any other existing path is an IoError.
void write_run_directory(const BacktestResult& result, const AuditReport& audit,
                         const nlohmann::json& resolved_config, const nlohmann::json& usage,
                         const std::filesystem::path& dir);

/// Reloads the day logs (prompts and usage) from a run directory for a standalone audit.
std::vector<DayLog> load_day_logs(const std::filesystem::path& dir, Strategy strategy);

/// Names of required run artifacts that are absent from `dir`.
std::vector<std::string> missing_run_artifacts(const std::filesystem::path& dir);

}  // namespace macroalloc
