#pragma once

// Reference book for order-processing checks. Works in raw integers (price 1e-4 USD, money 1e-8 USD)
// straight from the processing rules; it shares no code with the portfolio manager.

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "macroalloc/decision_agent.hpp"
#include "macroalloc/portfolio_manager.hpp"

namespace macroalloc::test {

using i128 = __int128;

struct OraclePos {
    bool is_long = true;
    std::int64_t qty = 0;
    std::int64_t entry = 0;  // price units
    std::int64_t mark = 0;
};

struct OracleFill {
    std::string ticker;
    bool is_long = true;
    bool is_open = true;
    std::int64_t qty = 0;
    std::int64_t px = 0;
    i128 cost_each = 0;  // commission (== impact) in money units
};

struct OracleSkip {
    std::string ticker;
    std::string reason;
};

class OracleBook {
public:
    explicit OracleBook(i128 cash) : cash_(cash) {}

    // One unit of price times one share is 1e4 money units.
    static i128 notional(std::int64_t q, std::int64_t px) { return static_cast<i128>(q) * px * 10'000; }

    [[nodiscard]] i128 value(const OraclePos& p, std::int64_t px) const {
        return p.is_long ? notional(p.qty, px) : notional(p.qty, p.entry) * 2 - notional(p.qty, px);
    }
    [[nodiscard]] i128 equity(const std::map<std::string, std::int64_t>& px) const {
        i128 e = cash_;
        for (const auto& [t, p] : pos_) e += value(p, px.count(t) ? px.at(t) : p.mark);
        return e;
    }
    [[nodiscard]] i128 gross(const std::map<std::string, std::int64_t>& px) const {
        i128 g = 0;
        for (const auto& [t, p] : pos_) g += notional(p.qty, px.count(t) ? px.at(t) : p.mark);
        return g;
    }

    void apply(const std::vector<TradeDecision>& decisions, const std::map<std::string, std::int64_t>& px,
               const std::set<std::string>& universe) {
        fills.clear();
        skips.clear();
        std::vector<std::string> gone;
        for (const auto& [t, p] : pos_)
            if (!universe.count(t)) gone.push_back(t);
        for (const auto& t : gone) close(t, px.count(t) ? px.at(t) : pos_.at(t).mark);

        for (const auto& d : decisions) {
            if (d.action != TradeAction::Close) continue;
            if (!pos_.count(d.ticker)) skips.push_back({d.ticker, "no_position"});
            else if (!px.count(d.ticker)) skips.push_back({d.ticker, "data_gap"});
            else close(d.ticker, px.at(d.ticker));
        }
        std::set<std::string> reversed;
        for (const auto& d : decisions) {
            if (d.action == TradeAction::Close || !pos_.count(d.ticker)) continue;
            const bool want_long = d.action == TradeAction::OpenLong;
            if (pos_.at(d.ticker).is_long == want_long) continue;
            reversed.insert(d.ticker);
            if (!px.count(d.ticker)) {
                skips.push_back({d.ticker, "data_gap"});
                continue;
            }
            close(d.ticker, px.at(d.ticker));
            skips.push_back({d.ticker, "reversal_cooldown"});
        }
        for (const auto& d : decisions) {
            if (d.action == TradeAction::Close || reversed.count(d.ticker)) continue;
            if (!universe.count(d.ticker)) skips.push_back({d.ticker, "not_in_universe"});
            else if (pos_.count(d.ticker)) skips.push_back({d.ticker, "conflict"});
            else if (!px.count(d.ticker)) skips.push_back({d.ticker, "data_gap"});
            else open(d, px);
        }
    }

    void mark(const std::map<std::string, std::int64_t>& closes) {
        for (auto& [t, p] : pos_)
            if (closes.count(t)) p.mark = closes.at(t);
    }

    [[nodiscard]] i128 cash() const { return cash_; }
    [[nodiscard]] i128 costs() const { return costs_; }
    [[nodiscard]] const std::map<std::string, OraclePos>& positions() const { return pos_; }

    std::vector<OracleFill> fills;
    std::vector<OracleSkip> skips;

private:
    void close(const std::string& t, std::int64_t price) {
        const OraclePos p = pos_.at(t);
        const i128 c = static_cast<i128>(p.qty) * price * 10;  // 10 bps of notional
        cash_ += value(p, price) - 2 * c;
        costs_ += 2 * c;
        pos_.erase(t);
        fills.push_back({t, p.is_long, false, p.qty, price, c});
    }

    void open(const TradeDecision& d, const std::map<std::string, std::int64_t>& px) {
        const std::int64_t price = px.at(d.ticker);
        const i128 eq = equity(px);
        // size in millionths of a percent: shares = floor(eq * micro / 1e8 / notional_per_share)
        const i128 micro = static_cast<i128>(std::llround(d.size_pct.value_or(0.0) * 1e6));
        i128 q = 0;
        if (eq > 0 && micro > 0) q = (eq * micro) / (static_cast<i128>(100'000'000) * price * 10'000);
        if (q <= 0) {
            skips.push_back({d.ticker, "zero_size"});
            return;
        }
        const i128 n = notional(static_cast<std::int64_t>(q), price);
        const i128 c = q * price * 10;
        const i128 eq_after = eq - 2 * c;
        if (eq_after <= 0 || (gross(px) + n) * 10 > eq_after * 9) {
            skips.push_back({d.ticker, "cap"});
            return;
        }
        if (cash_ < n + 2 * c) {
            skips.push_back({d.ticker, "insufficient_cash"});
            return;
        }
        cash_ -= n + 2 * c;
        costs_ += 2 * c;
        pos_[d.ticker] = OraclePos{d.action == TradeAction::OpenLong, static_cast<std::int64_t>(q), price, price};
        fills.push_back({d.ticker, d.action == TradeAction::OpenLong, true, static_cast<std::int64_t>(q), price, c});
    }

    i128 cash_;
    i128 costs_ = 0;
    std::map<std::string, OraclePos> pos_;
};

/// One randomized day: universe, opens, closes and a decision batch over a fixed ticker pool.
struct RandomDay {
    std::set<Ticker> universe;
    std::map<Ticker, Price> opens;
    std::map<Ticker, Price> closes;
    DecisionSet decisions;
};

class RandomMarketWalk {
public:
    RandomMarketWalk(std::uint64_t seed, int n_tickers, Strategy mode, bool allow_gaps = true)
        : rng_(seed), mode_(mode), allow_gaps_(allow_gaps) {
        std::uniform_int_distribution<std::int64_t> px(5 * 10'000, 900 * 10'000);
        for (int i = 0; i < n_tickers; ++i) {
            const Ticker t = "T" + std::to_string(i);
            tickers_.push_back(t);
            last_[t] = px(rng_);
            if (i < n_tickers * 3 / 4) universe_.insert(t);
        }
    }

    RandomDay next(const PortfolioState& held) {
        RandomDay day;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng_) < 0.3) {
            const Ticker& t = tickers_[rng_() % tickers_.size()];
            if (universe_.count(t)) universe_.erase(t);
            else universe_.insert(t);
        }
        day.universe = universe_;
        std::normal_distribution<double> ret(0.0, 0.03);
        for (const auto& t : tickers_) {
            const double open = static_cast<double>(last_[t]) * std::exp(ret(rng_));
            const double close = open * std::exp(ret(rng_));
            const std::int64_t o = std::max<std::int64_t>(1, std::llround(open));
            const std::int64_t c = std::max<std::int64_t>(1, std::llround(close));
            last_[t] = c;
            if (allow_gaps_ && u(rng_) < 0.03) continue;
            day.opens[t] = Price::from_units(o);
            day.closes[t] = Price::from_units(c);
        }
        // Decisions on unique tickers, drawn from universe members and current holdings.
        std::vector<Ticker> pool(universe_.begin(), universe_.end());
        for (const auto& [t, p] : held.positions) pool.push_back(t);
        std::shuffle(pool.begin(), pool.end(), rng_);
        std::set<Ticker> used;
        const std::size_t n = rng_() % 9;
        std::uniform_int_distribution<int> size_cents(1, 2500);  // 0.01% .. 25.00%
        for (const auto& t : pool) {
            if (day.decisions.decisions.size() >= n) break;
            if (!used.insert(t).second) continue;
            TradeDecision d;
            d.ticker = t;
            const auto r = rng_() % 10;
            d.action = r < 4 ? TradeAction::OpenLong : r < 8 ? TradeAction::OpenShort : TradeAction::Close;
            if (d.action != TradeAction::Close) {
                d.size_pct = mode_ == Strategy::CrossSectional ? 1.0 : size_cents(rng_) / 100.0;
            }
            day.decisions.decisions.push_back(d);
        }
        return day;
    }

    std::mt19937_64& rng() { return rng_; }

private:
    std::mt19937_64 rng_;
    Strategy mode_;
    bool allow_gaps_;
    std::vector<Ticker> tickers_;
    std::map<Ticker, std::int64_t> last_;
    std::set<Ticker> universe_;
};

inline std::map<std::string, std::int64_t> raw_prices(const std::map<Ticker, Price>& px) {
    std::map<std::string, std::int64_t> out;
    for (const auto& [t, p] : px) out[t] = p.units();
    return out;
}

/// Empty when the engine's batch outcome agrees with the oracle's, else the first difference.
inline std::string compare_batch(const BatchOutcome& got, const OracleBook& want) {
    if (got.fills.size() != want.fills.size())
        return "fill count " + std::to_string(got.fills.size()) + " vs " + std::to_string(want.fills.size());
    for (std::size_t i = 0; i < got.fills.size(); ++i) {
        const Fill& f = got.fills[i];
        const OracleFill& o = want.fills[i];
        if (f.ticker != o.ticker || (f.side == Side::Long) != o.is_long || (f.action == FillAction::Open) != o.is_open ||
            f.quantity != o.qty || f.price.units() != o.px || f.commission.units() != o.cost_each ||
            f.impact.units() != o.cost_each)
            return "fill " + std::to_string(i) + " differs on " + f.ticker;
    }
    if (got.skips.size() != want.skips.size())
        return "skip count " + std::to_string(got.skips.size()) + " vs " + std::to_string(want.skips.size());
    for (std::size_t i = 0; i < got.skips.size(); ++i) {
        if (got.skips[i].ticker != want.skips[i].ticker || to_string(got.skips[i].reason) != want.skips[i].reason)
            return "skip " + std::to_string(i) + " differs: " + got.skips[i].ticker + " " +
                   to_string(got.skips[i].reason) + " vs " + want.skips[i].reason;
    }
    if (got.state.cash.units() != want.cash()) return "cash differs";
    if (got.state.cumulative_costs.units() != want.costs()) return "costs differ";
    if (got.state.positions.size() != want.positions().size()) return "position count differs";
    for (const auto& [t, p] : got.state.positions) {
        auto it = want.positions().find(t);
        if (it == want.positions().end() || it->second.qty != p.quantity || it->second.entry != p.entry_price.units() ||
            it->second.is_long != (p.side == Side::Long))
            return "position differs on " + t;
    }
    return {};
}

}  // namespace macroalloc::test
