#pragma once

// Replays an engine run's validated decisions through the reference book, day by day, using
// only the raw synthetic inputs for prices and membership.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>

#include "macroalloc/backtest_engine.hpp"
#include "portfolio_oracle.hpp"
#include "synthetic_world.hpp"

namespace macroalloc::test {

inline std::set<Ticker> raw_universe(const SyntheticWorld& w, Date d) {
    auto events = w.events;
    std::sort(events.begin(), events.end(), [](const UniverseEvent& a, const UniverseEvent& b) {
        return std::tie(a.effective_date, a.sequence) < std::tie(b.effective_date, b.sequence);
    });
    std::set<Ticker> u = w.base;
    for (const auto& e : events) {
        if (d < e.effective_date) break;
        if (e.added) u.insert(*e.added);
        if (e.removed) u.erase(*e.removed);
    }
    return u;
}

/// Empty when every day's fills, skips and closing equity agree with the reference book.
inline std::string loop_mismatch(const SyntheticWorld& w, const BacktestResult& r) {
    std::map<Date, std::map<std::string, std::int64_t>> opens, closes;
    for (const auto& b : w.bars) {
        opens[b.date][b.ticker] = b.open.units();
        closes[b.date][b.ticker] = b.close.units();
    }
    OracleBook book(static_cast<i128>(r.config.initial_capital.units()));
    for (const auto& day : r.days) {
        const std::string at = day.date.to_string() + ": ";
        std::vector<TradeDecision> decisions;
        if (day.status == DayStatus::Traded) decisions = day.decisions.decisions;
        book.apply(decisions, opens[day.date], raw_universe(w, day.date));
        if (book.fills.size() != day.fills.size())
            return at + "fill count " + std::to_string(day.fills.size()) + " vs " + std::to_string(book.fills.size());
        for (std::size_t i = 0; i < book.fills.size(); ++i) {
            const Fill& f = day.fills[i];
            const OracleFill& o = book.fills[i];
            if (f.ticker != o.ticker || (f.side == Side::Long) != o.is_long ||
                (f.action == FillAction::Open) != o.is_open || f.quantity != o.qty || f.price.units() != o.px ||
                f.commission.units() != o.cost_each || f.impact.units() != o.cost_each)
                return at + "fill " + std::to_string(i) + " differs on " + f.ticker;
        }
        if (book.skips.size() != day.skips.size())
            return at + "skip count " + std::to_string(day.skips.size()) + " vs " + std::to_string(book.skips.size());
        for (std::size_t i = 0; i < book.skips.size(); ++i) {
            if (day.skips[i].ticker != book.skips[i].ticker || to_string(day.skips[i].reason) != book.skips[i].reason)
                return at + "skip " + std::to_string(i) + " differs on " + day.skips[i].ticker;
        }
        book.mark(closes[day.date]);
        if (book.equity({}) != static_cast<i128>(day.equity.units())) return at + "closing equity differs";
    }
    return {};
}

}  // namespace macroalloc::test
