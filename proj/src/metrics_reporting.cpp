#include "macroalloc/metrics_reporting.hpp"

#include <cmath>
#include <cstdio>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/text.hpp"

namespace macroalloc {

using nlohmann::json;

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.*f", digits, v);
    return buf;
}

std::string plain(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sharpe_cell(const std::optional<double>& s) { return s ? plain(*s, 2) : std::string("n/a"); }

}  // namespace

double pct_change(Money initial, Money final_equity) {
    if (initial.units() <= 0) throw ValidationError("initial equity must be positive");
    const Money diff = final_equity - initial;
    return 100.0 * static_cast<double>(diff.units()) / static_cast<double>(initial.units());
}

double pct_change(const EquityCurve& curve) {
    if (curve.empty()) throw ValidationError("pct_change of an empty equity curve");
    return pct_change(curve.front().second, curve.back().second);
}

std::vector<double> daily_returns(const EquityCurve& curve) {
    std::vector<double> out;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double prev = static_cast<double>(curve[i - 1].second.units());
        const double cur = static_cast<double>(curve[i].second.units());
        out.push_back(cur / prev - 1.0);
    }
    return out;
}

double sharpe(const std::vector<double>& returns, double risk_free_annual_pct, int annualization_days) {
    if (returns.size() < 2) throw InsufficientDataError("sharpe needs at least two returns");
    if (annualization_days <= 0) throw ValidationError("annualization days must be positive");
    const double n = static_cast<double>(returns.size());
    const double rf_daily = risk_free_annual_pct / 100.0 / annualization_days;
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= n;
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    // Relative floor: a constant series leaves rounding residue of order 1e-17 · |mean|.
    if (!(sd > 0.0) || sd <= 1e-14 * std::fabs(mean)) {
        throw UndefinedSharpeError("return standard deviation is zero");
    }
    return (mean - rf_daily) / sd * std::sqrt(static_cast<double>(annualization_days));
}

double max_drawdown_pct(const EquityCurve& curve) {
    double worst = 0.0;
    std::int64_t peak = 0;
    for (const auto& [d, e] : curve) {
        peak = std::max(peak, e.units());
        if (peak > 0) worst = std::max(worst, 100.0 * static_cast<double>(peak - e.units()) / peak);
    }
    return worst;
}

MetricSet compute_metrics(Strategy strategy, const EquityCurve& curve, Money initial_capital, Money total_costs,
                          double risk_free_annual_pct, int annualization_days) {
    if (curve.empty()) throw ValidationError("metrics of an empty equity curve");
    MetricSet m;
    m.strategy = strategy;
    m.start = curve.empty() ? Date{} : curve.front().first;
    m.end = curve.empty() ? Date{} : curve.back().first;
    m.pct_change = pct_change(initial_capital, curve.back().second);
    m.n_days = static_cast<int>(curve.size());
    m.total_costs = total_costs;
    m.max_drawdown = max_drawdown_pct(curve);
    try {
        m.sharpe = sharpe(daily_returns(curve), risk_free_annual_pct, annualization_days);
    } catch (const UndefinedSharpeError&) {
    } catch (const InsufficientDataError&) {
    }
    return m;
}

json to_json(const MetricSet& m) {
    return json{{"strategy", to_string(m.strategy)},
                {"start", m.start.to_string()},
                {"end", m.end.to_string()},
                {"pct_change", m.pct_change},
                {"sharpe", m.sharpe ? json(*m.sharpe) : json(nullptr)},
                {"n_days", m.n_days},
                {"total_costs", m.total_costs.to_string()},
                {"max_drawdown", m.max_drawdown}};
}

MetricSet metrics_from_json(const json& j) {
    try {
        MetricSet m;
        m.strategy = parse_strategy(j.at("strategy").get<std::string>());
        m.start = Date::parse(j.at("start").get<std::string>());
        m.end = Date::parse(j.at("end").get<std::string>());
        m.pct_change = j.at("pct_change").get<double>();
        if (!j.at("sharpe").is_null()) m.sharpe = j.at("sharpe").get<double>();
        m.n_days = j.at("n_days").get<int>();
        m.total_costs = Money::parse(j.at("total_costs").get<std::string>());
        m.max_drawdown = j.at("max_drawdown").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(std::string("metrics json: ") + e.what());
    }
}

std::string markdown_table(const std::vector<MetricSet>& runs) {
    std::string out = "| Strategy | PCT Change in Portfolio | Sharpe Ratio |\n|---|---|---|\n";
    // Cross-Momentum rows first.
    for (auto strategy : {Strategy::CrossSectional, Strategy::TopDown}) {
        for (const auto& m : runs) {
            if (m.strategy != strategy) continue;
            out += "| " + std::string(strategy_label(m.strategy)) + " | " + plain(m.pct_change, 2) + "% | " +
                   sharpe_cell(m.sharpe) + " |\n";
        }
    }
    return out;
}

std::string comparison_markdown(const MetricSet& a, const MetricSet& b) {
    auto delta_sharpe = [&]() -> std::string {
        if (!a.sharpe || !b.sharpe) return "n/a";
        return fixed(*b.sharpe - *a.sharpe, 4);
    };
    std::string out = "| Metric | " + std::string(strategy_label(a.strategy)) + " (A) | " +
                      std::string(strategy_label(b.strategy)) + " (B) | B - A |\n|---|---|---|---|\n";
    out += "| PCT Change in Portfolio | " + fixed(a.pct_change, 4) + "% | " + fixed(b.pct_change, 4) + "% | " +
           fixed(b.pct_change - a.pct_change, 4) + " |\n";
    out += "| Sharpe Ratio | " + (a.sharpe ? fixed(*a.sharpe, 4) : "n/a") + " | " +
           (b.sharpe ? fixed(*b.sharpe, 4) : "n/a") + " | " + delta_sharpe() + " |\n";
    out += "| Max Drawdown | " + fixed(a.max_drawdown, 4) + "% | " + fixed(b.max_drawdown, 4) + "% | " +
           fixed(b.max_drawdown - a.max_drawdown, 4) + " |\n";
    out += "| Total Costs | " + a.total_costs.to_string() + " | " + b.total_costs.to_string() + " | " +
           (b.total_costs - a.total_costs).to_string() + " |\n";
    return out;
}

json comparison_json(const MetricSet& a, const MetricSet& b) {
    json delta{{"pct_change", b.pct_change - a.pct_change},
               {"max_drawdown", b.max_drawdown - a.max_drawdown},
               {"total_costs", (b.total_costs - a.total_costs).to_string()}};
    delta["sharpe"] = a.sharpe && b.sharpe ? json(*b.sharpe - *a.sharpe) : json(nullptr);
    return json{{"a", to_json(a)}, {"b", to_json(b)}, {"delta", delta}};
}

std::string equity_csv(const EquityCurve& curve) {
    std::string out = "date,equity\n";
    for (const auto& [d, e] : curve) out += d.to_string() + "," + e.to_string() + "\n";
    return out;
}

void emit_report(const MetricSet& metrics, const EquityCurve& curve, ReportFormat format,
                 const std::filesystem::path& dir) {
    switch (format) {
        case ReportFormat::Json: write_file(dir / "metrics.json", to_json(metrics).dump(2) + "\n"); break;
        case ReportFormat::Csv: write_file(dir / "equity.csv", equity_csv(curve)); break;
        case ReportFormat::MarkdownTable: write_file(dir / "report.md", markdown_table({metrics})); break;
    }
}

}  // namespace macroalloc
