#include "macroalloc/portfolio_manager.hpp"

#include <cstdio>

#include <spdlog/spdlog.h>

namespace macroalloc {

using nlohmann::json;

namespace {

using i128 = __int128;

class Batch {
public:
    Batch(BatchOutcome& out, Date date, const std::map<Ticker, Price>& prices, const PortfolioRules& rules)
        : out_(out), s_(out.state), date_(date), prices_(prices), rules_(rules) {}

    std::optional<Price> execution_price(const Ticker& t) const {
        auto it = prices_.find(t);
        if (it == prices_.end()) return std::nullopt;
        return it->second;
    }

    void close(const Ticker& ticker, Price price, CloseCause cause) {
        const Position p = s_.positions.at(ticker);
        const Money pre = equity_at(s_, prices_);
        const Money n = notional(p.quantity, price);
        const Money commission = basis_points_of(n, rules_.commission_bps);
        const Money impact = basis_points_of(n, rules_.impact_bps);
        const Money entry = notional(p.quantity, p.entry_price);
        s_.cash += position_value(p, price) - commission - impact;
        s_.realized_pnl += p.side == Side::Long ? n - entry : entry - n;
        s_.cumulative_costs += commission + impact;
        s_.positions.erase(ticker);
        out_.fills.push_back({date_, ticker, p.side, FillAction::Close, cause, p.quantity, price, commission, impact, pre});
    }

    void open(const TradeDecision& d) {
        const Side side = d.action == TradeAction::OpenLong ? Side::Long : Side::Short;
        const auto price = execution_price(d.ticker);
        if (!price) return skip(d, SkipReason::DataGap);
        const Money equity = equity_at(s_, prices_);
        const std::int64_t qty = shares_for_fraction(equity, percent_to_micro(d.size_pct.value_or(0.0)), *price);
        if (qty <= 0) return skip(d, SkipReason::ZeroSize);

        const Money n = notional(qty, *price);
        const Money commission = basis_points_of(n, rules_.commission_bps);
        const Money impact = basis_points_of(n, rules_.impact_bps);
        const Money gross_after = gross_exposure_at(s_, prices_) + n;
        const Money equity_after = equity - commission - impact;
        if (equity_after.units() <= 0 ||
            static_cast<i128>(gross_after.units()) * 10'000 >
                static_cast<i128>(equity_after.units()) * rules_.max_utilization_bp) {
            return skip(d, SkipReason::Cap);
        }
        if (s_.cash < n + commission + impact) return skip(d, SkipReason::InsufficientCash);

        s_.cash -= n + commission + impact;
        s_.cumulative_costs += commission + impact;
        s_.positions[d.ticker] = Position{d.ticker, side, qty, *price, date_, *price};
        out_.fills.push_back({date_, d.ticker, side, FillAction::Open, CloseCause::None, qty, *price, commission,
                              impact, equity});
    }

    void skip(const TradeDecision& d, SkipReason reason) {
        spdlog::debug("{} skip {} {}: {}", date_.to_string(), to_string(d.action), d.ticker, to_string(reason));
        out_.skips.push_back({date_, d.ticker, d.action, reason});
    }

private:
    BatchOutcome& out_;
    PortfolioState& s_;
    Date date_;
    const std::map<Ticker, Price>& prices_;
    const PortfolioRules& rules_;
};

bool opposes(const Position& p, TradeAction a) {
    return (a == TradeAction::OpenLong && p.side == Side::Short) ||
           (a == TradeAction::OpenShort && p.side == Side::Long);
}

}  // namespace

std::string to_string(Side s) { return s == Side::Long ? "long" : "short"; }
std::string to_string(FillAction a) { return a == FillAction::Open ? "open" : "close"; }

std::string to_string(CloseCause c) {
    switch (c) {
        case CloseCause::None: return "none";
        case CloseCause::Explicit: return "explicit";
        case CloseCause::Reversal: return "reversal";
        case CloseCause::Delisting: return "delisting";
    }
    return "?";
}

std::string to_string(SkipReason r) {
    switch (r) {
        case SkipReason::Conflict: return "conflict";
        case SkipReason::Cap: return "cap";
        case SkipReason::DataGap: return "data_gap";
        case SkipReason::ZeroSize: return "zero_size";
        case SkipReason::ReversalCooldown: return "reversal_cooldown";
        case SkipReason::NoPosition: return "no_position";
        case SkipReason::InsufficientCash: return "insufficient_cash";
        case SkipReason::NotInUniverse: return "not_in_universe";
    }
    return "?";
}

PortfolioState PortfolioState::with_cash(Money initial) {
    PortfolioState s;
    s.cash = initial;
    return s;
}

Money position_value(const Position& p, Price px) {
    if (p.side == Side::Long) return notional(p.quantity, px);
    return notional(p.quantity, p.entry_price) + notional(p.quantity, p.entry_price) - notional(p.quantity, px);
}

Money equity_at(const PortfolioState& state, const std::map<Ticker, Price>& prices) {
    Money e = state.cash;
    for (const auto& [t, p] : state.positions) {
        auto it = prices.find(t);
        e += position_value(p, it == prices.end() ? p.last_mark : it->second);
    }
    return e;
}

Money gross_exposure_at(const PortfolioState& state, const std::map<Ticker, Price>& prices) {
    Money g;
    for (const auto& [t, p] : state.positions) {
        auto it = prices.find(t);
        g += notional(p.quantity, it == prices.end() ? p.last_mark : it->second);
    }
    return g;
}

BatchOutcome apply_decisions(PortfolioState state, const DecisionSet& decisions, Date date,
                             const std::map<Ticker, Price>& execution_prices, const std::set<Ticker>& universe,
                             const PortfolioRules& rules) {
    BatchOutcome out{std::move(state), {}, {}};
    Batch batch(out, date, execution_prices, rules);
    PortfolioState& s = out.state;

    // (1) Holdings that left the index.
    std::vector<Ticker> delisted;
    for (const auto& [t, p] : s.positions) {
        if (universe.count(t) == 0) delisted.push_back(t);
    }
    for (const auto& t : delisted) {
        auto px = batch.execution_price(t);
        if (!px) {
            spdlog::warn("{} forced liquidation of {} at last mark (no execution price)", date.to_string(), t);
            px = s.positions.at(t).last_mark;
        }
        batch.close(t, *px, CloseCause::Delisting);
    }

    // (2) Explicit closes.
    for (const auto& d : decisions.decisions) {
        if (d.action != TradeAction::Close) continue;
        if (s.positions.count(d.ticker) == 0) {
            batch.skip(d, SkipReason::NoPosition);
            continue;
        }
        const auto px = batch.execution_price(d.ticker);
        if (!px) {
            batch.skip(d, SkipReason::DataGap);
            continue;
        }
        batch.close(d.ticker, *px, CloseCause::Explicit);
    }

    // (3) Opposite-side opens liquidate the existing position; the open itself waits.
    std::set<Ticker> handled;
    for (const auto& d : decisions.decisions) {
        if (d.action == TradeAction::Close) continue;
        auto it = s.positions.find(d.ticker);
        if (it == s.positions.end() || !opposes(it->second, d.action)) continue;
        handled.insert(d.ticker);
        const auto px = batch.execution_price(d.ticker);
        if (!px) {
            batch.skip(d, SkipReason::DataGap);
            continue;
        }
        batch.close(d.ticker, *px, CloseCause::Reversal);
        batch.skip(d, SkipReason::ReversalCooldown);
    }

    // (4) Opens in decision order.
    for (const auto& d : decisions.decisions) {
        if (d.action == TradeAction::Close || handled.count(d.ticker) != 0) continue;
        if (universe.count(d.ticker) == 0) {
            batch.skip(d, SkipReason::NotInUniverse);
        } else if (s.positions.count(d.ticker) != 0) {
            batch.skip(d, SkipReason::Conflict);
        } else {
            batch.open(d);
        }
    }
    return out;
}

Money mark_to_market(PortfolioState& state, const std::map<Ticker, Price>& closes) {
    for (auto& [t, p] : state.positions) {
        auto it = closes.find(t);
        if (it == closes.end()) {
            spdlog::warn("no close for {}; carrying mark {}", t, p.last_mark.to_string());
            continue;
        }
        p.last_mark = it->second;
    }
    return equity_at(state, {});
}

PortfolioView portfolio_view(const PortfolioState& state) {
    PortfolioView v;
    const double equity = equity_at(state, {}).to_double();
    if (equity <= 0.0) return v;
    for (const auto& [t, p] : state.positions) {
        const double pct = 100.0 * notional(p.quantity, p.last_mark).to_double() / equity;
        (p.side == Side::Long ? v.longs : v.shorts).emplace_back(t, pct);
    }
    return v;
}

std::string fill_csv_row(const Fill& f) {
    return f.date.to_string() + "," + f.ticker + "," + to_string(f.side) + "," + to_string(f.action) + "," +
           std::to_string(f.quantity) + "," + f.price.to_string() + "," + f.commission.to_string() + "," +
           f.impact.to_string();
}

json state_to_json(const PortfolioState& state, Date date, Money equity) {
    json positions = json::array();
    for (const auto& [t, p] : state.positions) {
        positions.push_back({{"ticker", t},
                             {"side", to_string(p.side)},
                             {"quantity", p.quantity},
                             {"entry_price", p.entry_price.to_string()},
                             {"entry_date", p.entry_date.to_string()},
                             {"mark", p.last_mark.to_string()}});
    }
    return json{{"date", date.to_string()},
                {"cash", state.cash.to_string()},
                {"equity", equity.to_string()},
                {"cumulative_costs", state.cumulative_costs.to_string()},
                {"realized_pnl", state.realized_pnl.to_string()},
                {"positions", positions}};
}

}  // namespace macroalloc
