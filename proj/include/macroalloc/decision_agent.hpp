#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "macroalloc/core/date.hpp"
#include "macroalloc/llm_gateway.hpp"
#include "macroalloc/market_data.hpp"
#include "macroalloc/ranking_agents.hpp"

namespace macroalloc {

enum class TradeAction { OpenLong, OpenShort, Close };

std::string to_string(TradeAction a);
std::optional<TradeAction> parse_action(std::string_view s);

struct TradeDecision {
    Ticker ticker;
    TradeAction action = TradeAction::OpenLong;
    std::optional<double> size_pct;  // percent of current equity; absent for closes
    std::string rationale_ref;

    friend bool operator==(const TradeDecision&, const TradeDecision&) = default;
};

/// A decision as the model produced it, before any validation.
struct RawDecision {
    std::string ticker;
    std::string action;
    std::optional<double> size_pct;
    std::string rationale_ref;
};

struct DecisionSet {
    Date decision_date;
    std::vector<TradeDecision> decisions;
    std::string source_reflection_hash;
    bool failed = false;
    std::string failure_reason;
};

struct ValidationOptions {
    double top_down_size_cap_pct = 20.0;
    double cross_sectional_size_pct = 1.0;
};

/// Drops unknown actions and off-universe tickers, keeps the first decision per ticker (so a
/// later opposite-side duplicate loses), fixes cross-sectional sizes and clamps top-down sizes
/// into (0, cap]. Total: every drop is logged, nothing throws.
DecisionSet validate_decisions(const std::vector<RawDecision>& raw, const std::set<Ticker>& universe,
                               Strategy mode, const ValidationOptions& options = {});

/// Reads `[{ticker, action, size_pct}]` or `{"decisions": [...]}`; malformed elements are skipped.
std::vector<RawDecision> raw_decisions_from_json(const nlohmann::json& value);
std::vector<RawDecision> to_raw(const DecisionSet& set);

std::string render_decision_prompt(const RankingReflection& reflection);

struct DecisionAgentConfig {
    std::string model_id;
    int max_output_tokens = 1024;
    ValidationOptions validation;
};

/// Gateway pass over the reflection, JSON extraction, then validate_decisions. Extraction or
/// gateway failure yields an empty set with `failed` set (the day holds).
DecisionSet parse_reflection(const RankingReflection& reflection, LlmGateway& gateway,
                             const std::set<Ticker>& universe, const DecisionAgentConfig& config);

/// `{date, strategy, decisions:[{ticker, action, size_pct}]}`.
nlohmann::json decisions_to_json(const DecisionSet& set, Strategy strategy);

}  // namespace macroalloc
