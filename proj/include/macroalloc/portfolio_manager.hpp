#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "macroalloc/core/date.hpp"
#include "macroalloc/core/money.hpp"
#include "macroalloc/decision_agent.hpp"
#include "macroalloc/market_data.hpp"
#include "macroalloc/ranking_agents.hpp"

namespace macroalloc {

enum class Side { Long, Short };
std::string to_string(Side s);

struct Position {
    Ticker ticker;
    Side side = Side::Long;
    std::int64_t quantity = 0;
    Price entry_price;
    Date entry_date;
    Price last_mark;  // most recent valuation price
};

struct PortfolioState {
    Money cash;
    std::map<Ticker, Position> positions;
    Money cumulative_costs;
    Money realized_pnl;

    static PortfolioState with_cash(Money initial);
};

/// Integer rates keep cost arithmetic exact.
struct PortfolioRules {
    std::int64_t commission_bps = 10;
    std::int64_t impact_bps = 10;
    std::int64_t max_utilization_bp = 9000;  // of equity, in basis points
};

enum class FillAction { Open, Close };
enum class CloseCause { None, Explicit, Reversal, Delisting };

std::string to_string(FillAction a);
std::string to_string(CloseCause c);

struct Fill {
    Date date;
    Ticker ticker;
    Side side = Side::Long;
    FillAction action = FillAction::Open;
    CloseCause cause = CloseCause::None;
    std::int64_t quantity = 0;
    Price price;
    Money commission;
    Money impact;
    Money pre_trade_equity;  // equity at execution prices just before this fill

    [[nodiscard]] Money notional() const { return macroalloc::notional(quantity, price); }
    [[nodiscard]] Money costs() const { return commission + impact; }
};

enum class SkipReason { Conflict, Cap, DataGap, ZeroSize, ReversalCooldown, NoPosition, InsufficientCash, NotInUniverse };
std::string to_string(SkipReason r);

struct Skip {
    Date date;
    Ticker ticker;
    TradeAction action = TradeAction::OpenLong;
    SkipReason reason = SkipReason::Conflict;
};

struct BatchOutcome {
    PortfolioState state;
    std::vector<Fill> fills;
    std::vector<Skip> skips;
};

/// Value a position contributes to equity at `px`: long q·px, short q·(2·entry − px).
Money position_value(const Position& p, Price px);

/// Executes one day's decisions at `execution_prices` (the day's opens).
/// Order: forced liquidations of holdings outside `universe`, explicit closes, reversal closes,
/// then opens in decision order. Each open is sized from equity at execution prices at that
/// moment and skipped if it would lift gross exposure above the utilization limit.
/// Holdings without an execution price are valued at their last mark; a forced liquidation
/// without one executes at the last mark.
BatchOutcome apply_decisions(PortfolioState state, const DecisionSet& decisions, Date date,
                             const std::map<Ticker, Price>& execution_prices, const std::set<Ticker>& universe,
                             const PortfolioRules& rules = {});

/// Updates marks from `closes` (missing tickers keep their last mark) and returns equity.
Money mark_to_market(PortfolioState& state, const std::map<Ticker, Price>& closes);

/// Equity and gross exposure at the given prices, falling back to each position's last mark.
Money equity_at(const PortfolioState& state, const std::map<Ticker, Price>& prices);
Money gross_exposure_at(const PortfolioState& state, const std::map<Ticker, Price>& prices);

/// Holdings as percent of equity at the current marks, for the ranking prompt.
PortfolioView portfolio_view(const PortfolioState& state);

inline constexpr const char* kFillCsvHeader = "date,ticker,side,action,quantity,price,commission,impact";
std::string fill_csv_row(const Fill& f);
nlohmann::json state_to_json(const PortfolioState& state, Date date, Money equity);

}  // namespace macroalloc
