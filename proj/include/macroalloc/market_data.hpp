#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "macroalloc/core/date.hpp"
#include "macroalloc/core/money.hpp"

namespace macroalloc {

using Ticker = std::string;

struct Bar {
    Ticker ticker;
    Date date;
    Price open;
    Price high;
    Price low;
    Price close;
    std::int64_t volume = 0;
};

/// Throws ValidationError naming ticker and date when OHLC bounds or positivity fail.
void validate_bar(const Bar& bar);

struct UniverseEvent {
    Date effective_date;
    std::optional<Ticker> added;
    std::optional<Ticker> removed;
    std::size_t sequence = 0;
};

class TradingCalendar {
public:
    TradingCalendar() = default;
    /// Sorts and deduplicates.
    explicit TradingCalendar(std::vector<Date> dates);

    [[nodiscard]] bool empty() const { return dates_.empty(); }
    [[nodiscard]] std::size_t size() const { return dates_.size(); }
    [[nodiscard]] Date first() const;
    [[nodiscard]] Date last() const;
    [[nodiscard]] bool contains(Date d) const;
    [[nodiscard]] const std::vector<Date>& dates() const { return dates_; }

    /// Greatest member strictly less than `d`; BoundaryError when none exists.
    [[nodiscard]] Date previous_trading_day(Date d) const;
    /// Members in the closed interval [start, end].
    [[nodiscard]] std::vector<Date> between(Date start, Date end) const;

private:
    std::vector<Date> dates_;
};

struct IngestRejection {
    std::size_t line = 0;
    std::string reason;
};

/// Accepted rows plus per-line diagnostics, for ingestion reports that must list every rejection.
template <class Row>
struct IngestReport {
    std::vector<Row> rows;
    std::vector<IngestRejection> rejected;
};

enum class UniverseAction { Base, Add, Remove };

struct UniverseRow {
    Date effective_date;
    UniverseAction action = UniverseAction::Add;
    Ticker ticker;
};

/// `ticker,date,open,high,low,close,volume`; duplicates of (ticker, date) are rejected.
IngestReport<Bar> read_bars_csv(std::istream& in, const std::string& source);
/// `effective_date,action,ticker` with action ADD, REMOVE, or BASE (base membership snapshot).
IngestReport<UniverseRow> read_universe_csv(std::istream& in, const std::string& source);

/// Immutable point-in-time store of daily bars and index membership.
class MarketStore {
public:
    MarketStore() = default;

    /// Validates every bar and rejects duplicate (ticker, date) pairs.
    static MarketStore build(std::vector<Bar> bars, std::set<Ticker> base,
                             std::vector<UniverseEvent> events);

    [[nodiscard]] std::size_t size() const { return bar_count_; }
    [[nodiscard]] const TradingCalendar& calendar() const { return calendar_; }
    [[nodiscard]] const std::set<Ticker>& base_universe() const { return base_; }
    [[nodiscard]] const std::vector<UniverseEvent>& events() const { return events_; }
    [[nodiscard]] std::vector<Ticker> tickers() const;
    [[nodiscard]] std::vector<Bar> all_bars() const;

    /// Base membership with every event effective on or before `d` applied in order.
    [[nodiscard]] std::set<Ticker> universe_as_of(Date d) const;

    [[nodiscard]] const Bar* find(const Ticker& ticker, Date d) const;
    /// The day's open. Throws DataGapError when no bar exists.
    [[nodiscard]] Price execution_price(const Ticker& ticker, Date d) const;
    [[nodiscard]] std::optional<Price> close_price(const Ticker& ticker, Date d) const;
    [[nodiscard]] std::optional<Price> last_close_on_or_before(const Ticker& ticker, Date d) const;

    /// Digest over bars and events in canonical order.
    [[nodiscard]] std::string content_hash() const;

private:
    std::map<Ticker, std::vector<Bar>> bars_;
    std::size_t bar_count_ = 0;
    std::set<Ticker> base_;
    std::vector<UniverseEvent> events_;
    TradingCalendar calendar_;
};

/// Parses both CSV streams and builds the store; the first bad row aborts with its line number.
MarketStore load_market_data(std::istream& bar_records, std::istream& universe_events,
                             const std::string& bar_source = "bars",
                             const std::string& universe_source = "universe");

std::string to_string(UniverseAction a);

}  // namespace macroalloc
