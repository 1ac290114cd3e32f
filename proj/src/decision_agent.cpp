#include "macroalloc/decision_agent.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/text.hpp"

namespace macroalloc {

using nlohmann::json;

namespace {

constexpr std::string_view kDecisionInstructions =
    R"(You are a trading assistant that converts a stock ranking analysis into structured trading decisions.

Read the analysis below and output the trades it recommends as a JSON array. Each element must have the form:
{"ticker": "AAPL", "action": "open_long", "size_pct": 5}

Rules:
- "action" is one of "open_long", "open_short", "close"
- "size_pct" is the recommended position size in percent of portfolio equity; omit it for "close"
- Use "close" only for existing positions the analysis recommends exiting
- List the trades in the order the analysis ranks them
- If the analysis recommends no trades, output []
- Respond ONLY with the JSON array, no additional text or markdown

Analysis:
)";

bool plausible_ticker(const std::string& t) {
    if (t.empty() || t.size() > 10) return false;
    for (char c : t) {
        if (!((c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-')) return false;
    }
    return true;
}

}  // namespace

std::string to_string(TradeAction a) {
    switch (a) {
        case TradeAction::OpenLong: return "open_long";
        case TradeAction::OpenShort: return "open_short";
        case TradeAction::Close: return "close";
    }
    return "?";
}

std::optional<TradeAction> parse_action(std::string_view s) {
    const auto v = to_lower(trim(s));
    if (v == "open_long" || v == "long" || v == "buy") return TradeAction::OpenLong;
    if (v == "open_short" || v == "short") return TradeAction::OpenShort;
    if (v == "close" || v == "exit") return TradeAction::Close;
    return std::nullopt;
}

DecisionSet validate_decisions(const std::vector<RawDecision>& raw, const std::set<Ticker>& universe,
                               Strategy mode, const ValidationOptions& options) {
    DecisionSet out;
    std::set<Ticker> seen;
    for (const auto& r : raw) {
        const Ticker ticker = to_upper(trim(r.ticker));
        const auto action = parse_action(r.action);
        if (!action) {
            spdlog::info("decision dropped: unknown action '{}' for {}", r.action, ticker);
            continue;
        }
        if (!plausible_ticker(ticker) || universe.count(ticker) == 0) {
            spdlog::info("decision dropped: {} not in universe", ticker);
            continue;
        }
        if (seen.count(ticker) != 0) {
            spdlog::info("decision dropped: later duplicate {} {}", to_string(*action), ticker);
            continue;
        }
        TradeDecision d{ticker, *action, std::nullopt, r.rationale_ref};
        if (*action != TradeAction::Close) {
            if (mode == Strategy::CrossSectional) {
                d.size_pct = options.cross_sectional_size_pct;
            } else {
                if (!r.size_pct || !std::isfinite(*r.size_pct) || *r.size_pct <= 0.0) {
                    spdlog::info("decision dropped: {} has no positive size", ticker);
                    continue;
                }
                double size = *r.size_pct;
                if (size > options.top_down_size_cap_pct) {
                    spdlog::info("decision size for {} clamped from {} to {}", ticker, size,
                                 options.top_down_size_cap_pct);
                    size = options.top_down_size_cap_pct;
                }
                d.size_pct = size;
            }
        }
        seen.insert(ticker);
        out.decisions.push_back(std::move(d));
    }
    return out;
}

std::vector<RawDecision> raw_decisions_from_json(const json& value) {
    const json single = json::array({value});
    const json* items = &value;
    if (value.is_object()) {
        auto it = value.find("decisions");
        if (it == value.end()) it = value.find("trades");
        // Without a list key the object is taken as a single decision.
        items = it == value.end() ? &single : &*it;
    }
    std::vector<RawDecision> out;
    if (!items->is_array()) return out;
    for (const auto& item : *items) {
        if (!item.is_object()) continue;
        auto t = item.find("ticker");
        auto a = item.find("action");
        if (t == item.end() || a == item.end() || !t->is_string() || !a->is_string()) continue;
        RawDecision r;
        r.ticker = t->get<std::string>();
        r.action = a->get<std::string>();
        if (auto s = item.find("size_pct"); s != item.end() && s->is_number()) r.size_pct = s->get<double>();
        if (auto why = item.find("rationale"); why != item.end() && why->is_string()) {
            r.rationale_ref = why->get<std::string>().substr(0, 80);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RawDecision> to_raw(const DecisionSet& set) {
    std::vector<RawDecision> out;
    for (const auto& d : set.decisions) out.push_back({d.ticker, to_string(d.action), d.size_pct, d.rationale_ref});
    return out;
}

std::string render_decision_prompt(const RankingReflection& reflection) {
    return std::string(kDecisionInstructions) + reflection.raw_text + "\n";
}

DecisionSet parse_reflection(const RankingReflection& reflection, LlmGateway& gateway,
                             const std::set<Ticker>& universe, const DecisionAgentConfig& config) {
    DecisionSet failed;
    failed.decision_date = reflection.decision_date;
    failed.source_reflection_hash = reflection.prompt_hash;
    failed.failed = true;
    if (trim(reflection.raw_text).empty()) {
        failed.failure_reason = "empty reflection";
        return failed;
    }
    auto req = make_request(render_decision_prompt(reflection), config.model_id, config.max_output_tokens,
                            "decision:" + to_string(reflection.strategy) + ":" +
                                reflection.decision_date.to_string());
    json value;
    try {
        value = complete_json(gateway, req, kJsonOnlyReminder);
    } catch (const ExtractionError& e) {
        failed.failure_reason = e.what();
        return failed;
    } catch (const GatewayError& e) {
        failed.failure_reason = e.what();
        return failed;
    }
    if (!value.is_array() && !value.is_object()) {
        failed.failure_reason = "decision output is not an array or object";
        return failed;
    }
    DecisionSet set = validate_decisions(raw_decisions_from_json(value), universe, reflection.strategy,
                                         config.validation);
    set.decision_date = reflection.decision_date;
    set.source_reflection_hash = reflection.prompt_hash;
    return set;
}

json decisions_to_json(const DecisionSet& set, Strategy strategy) {
    json ds = json::array();
    for (const auto& d : set.decisions) {
        json j{{"ticker", d.ticker}, {"action", to_string(d.action)}};
        j["size_pct"] = d.size_pct ? json(*d.size_pct) : json(nullptr);
        ds.push_back(std::move(j));
    }
    json out{{"date", set.decision_date.to_string()}, {"strategy", to_string(strategy)}, {"decisions", ds}};
    if (set.failed) out["failure"] = set.failure_reason;
    return out;
}

}  // namespace macroalloc
