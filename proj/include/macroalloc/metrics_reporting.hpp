#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "macroalloc/core/date.hpp"
#include "macroalloc/core/money.hpp"
#include "macroalloc/ranking_agents.hpp"

namespace macroalloc {

using EquityCurve = std::vector<std::pair<Date, Money>>;

/// 100 · (last − first) / first. Throws ValidationError on an empty curve or non-positive start.
double pct_change(const EquityCurve& curve);
double pct_change(Money initial, Money final_equity);

/// equity_t / equity_{t−1} − 1 over consecutive points.
std::vector<double> daily_returns(const EquityCurve& curve);

/// mean(r − rf/days) / sample_stdev(r) · √days.
/// Throws InsufficientDataError below two returns, UndefinedSharpeError when the stdev is zero.
double sharpe(const std::vector<double>& returns, double risk_free_annual_pct = 0.0,
              int annualization_days = 252);

/// Largest peak-to-trough decline, as a non-negative percent.
double max_drawdown_pct(const EquityCurve& curve);

struct MetricSet {
    Strategy strategy = Strategy::TopDown;
    Date start;
    Date end;
    double pct_change = 0.0;
    std::optional<double> sharpe;  // absent when undefined
    int n_days = 0;
    Money total_costs;
    double max_drawdown = 0.0;

    friend bool operator==(const MetricSet&, const MetricSet&) = default;
};

/// pct_change is measured from `initial_capital`, so costs and moves of the first day count;
/// Sharpe uses the curve's own consecutive returns.
MetricSet compute_metrics(Strategy strategy, const EquityCurve& curve, Money initial_capital, Money total_costs,
                          double risk_free_annual_pct = 0.0, int annualization_days = 252);

nlohmann::json to_json(const MetricSet& m);
MetricSet metrics_from_json(const nlohmann::json& j);

/// Table with one row per run, labelled Cross-Momentum / Sector-Allocation.
std::string markdown_table(const std::vector<MetricSet>& runs);

/// Two runs side by side with a delta column per metric.
std::string comparison_markdown(const MetricSet& a, const MetricSet& b);
nlohmann::json comparison_json(const MetricSet& a, const MetricSet& b);

std::string equity_csv(const EquityCurve& curve);

enum class ReportFormat { Json, Csv, MarkdownTable };

/// Writes metrics.json, equity.csv or report.md under `dir`; IoError when unwritable.
void emit_report(const MetricSet& metrics, const EquityCurve& curve, ReportFormat format,
                 const std::filesystem::path& dir);

}  // namespace macroalloc
