#include "macroalloc/market_data.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/hash.hpp"
#include "macroalloc/core/text.hpp"

namespace macroalloc {

namespace {

std::string bar_label(const Bar& b) { return b.ticker + " " + b.date.to_string(); }

bool valid_ticker(std::string_view t) {
    if (t.empty() || t.size() > 16) return false;
    return std::all_of(t.begin(), t.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '-';
    });
}

std::int64_t parse_volume(const std::string& text) {
    if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw ParseError("invalid volume '" + text + "'");
    }
    try {
        return std::stoll(text);
    } catch (const std::exception&) {
        throw ParseError("volume out of range '" + text + "'");
    }
}

}  // namespace

void validate_bar(const Bar& b) {
    if (!valid_ticker(b.ticker)) throw ValidationError("invalid ticker '" + b.ticker + "'");
    if (b.open.units() <= 0 || b.high.units() <= 0 || b.low.units() <= 0 || b.close.units() <= 0) {
        throw ValidationError(bar_label(b) + ": prices must be positive");
    }
    if (b.volume < 0) throw ValidationError(bar_label(b) + ": negative volume");
    if (b.low > b.high) throw ValidationError(bar_label(b) + ": low above high");
    if (b.high < std::max(b.open, b.close)) {
        throw ValidationError(bar_label(b) + ": high below max(open, close)");
    }
    if (b.low > std::min(b.open, b.close)) {
        throw ValidationError(bar_label(b) + ": low above min(open, close)");
    }
}

std::string to_string(UniverseAction a) {
    switch (a) {
        case UniverseAction::Base: return "BASE";
        case UniverseAction::Add: return "ADD";
        case UniverseAction::Remove: return "REMOVE";
    }
    return "?";
}

// ---- TradingCalendar ----

TradingCalendar::TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
    std::sort(dates_.begin(), dates_.end());
    dates_.erase(std::unique(dates_.begin(), dates_.end()), dates_.end());
}

Date TradingCalendar::first() const {
    if (dates_.empty()) throw RangeError("empty trading calendar");
    return dates_.front();
}

Date TradingCalendar::last() const {
    if (dates_.empty()) throw RangeError("empty trading calendar");
    return dates_.back();
}

bool TradingCalendar::contains(Date d) const {
    return std::binary_search(dates_.begin(), dates_.end(), d);
}

Date TradingCalendar::previous_trading_day(Date d) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.begin()) {
        throw BoundaryError("no trading day before " + d.to_string());
    }
    return *std::prev(it);
}

std::vector<Date> TradingCalendar::between(Date start, Date end) const {
    auto lo = std::lower_bound(dates_.begin(), dates_.end(), start);
    auto hi = std::upper_bound(dates_.begin(), dates_.end(), end);
    if (lo >= hi) return {};
    return {lo, hi};
}

// ---- CSV ingestion ----

IngestReport<Bar> read_bars_csv(std::istream& in, const std::string& source) {
    IngestReport<Bar> report;
    CsvReader reader(in, source, {"ticker", "date", "open", "high", "low", "close", "volume"});
    std::set<std::pair<Ticker, Date>> seen;
    while (true) {
        std::optional<CsvRow> row;
        try {
            row = reader.next();
        } catch (const ParseError& e) {
            report.rejected.push_back({e.line(), e.what()});
            continue;
        }
        if (!row) break;
        const auto& f = row->fields;
        try {
            Bar bar;
            bar.ticker = f[0];
            bar.date = Date::parse(f[1]);
            bar.open = Price::parse(f[2]);
            bar.high = Price::parse(f[3]);
            bar.low = Price::parse(f[4]);
            bar.close = Price::parse(f[5]);
            bar.volume = parse_volume(f[6]);
            validate_bar(bar);
            if (!seen.emplace(bar.ticker, bar.date).second) {
                throw ValidationError("duplicate bar for " + bar_label(bar));
            }
            report.rows.push_back(std::move(bar));
        } catch (const Error& e) {
            report.rejected.push_back({row->line, e.what()});
        }
    }
    return report;
}

IngestReport<UniverseRow> read_universe_csv(std::istream& in, const std::string& source) {
    IngestReport<UniverseRow> report;
    CsvReader reader(in, source, {"effective_date", "action", "ticker"});
    while (true) {
        std::optional<CsvRow> row;
        try {
            row = reader.next();
        } catch (const ParseError& e) {
            report.rejected.push_back({e.line(), e.what()});
            continue;
        }
        if (!row) break;
        const auto& f = row->fields;
        try {
            UniverseRow u;
            u.effective_date = Date::parse(f[0]);
            const auto action = to_upper(f[1]);
            if (action == "ADD") u.action = UniverseAction::Add;
            else if (action == "REMOVE") u.action = UniverseAction::Remove;
            else if (action == "BASE") u.action = UniverseAction::Base;
            else throw ParseError("unknown action '" + f[1] + "'");
            if (!valid_ticker(f[2])) throw ValidationError("invalid ticker '" + f[2] + "'");
            u.ticker = f[2];
            report.rows.push_back(std::move(u));
        } catch (const Error& e) {
            report.rejected.push_back({row->line, e.what()});
        }
    }
    return report;
}

// ---- MarketStore ----

MarketStore MarketStore::build(std::vector<Bar> bars, std::set<Ticker> base,
                               std::vector<UniverseEvent> events) {
    MarketStore store;
    std::vector<Date> dates;
    dates.reserve(bars.size());
    for (auto& bar : bars) {
        validate_bar(bar);
        dates.push_back(bar.date);
        store.bars_[bar.ticker].push_back(std::move(bar));
    }
    for (auto& [ticker, series] : store.bars_) {
        std::sort(series.begin(), series.end(),
                  [](const Bar& a, const Bar& b) { return a.date < b.date; });
        for (std::size_t i = 1; i < series.size(); ++i) {
            if (series[i].date == series[i - 1].date) {
                throw ValidationError("duplicate bar for " + bar_label(series[i]));
            }
        }
        store.bar_count_ += series.size();
    }
    for (const auto& ev : events) {
        if (!ev.added && !ev.removed) {
            throw ValidationError("universe event on " + ev.effective_date.to_string() +
                                  " adds and removes nothing");
        }
    }
    std::stable_sort(events.begin(), events.end(), [](const UniverseEvent& a, const UniverseEvent& b) {
        return std::tie(a.effective_date, a.sequence) < std::tie(b.effective_date, b.sequence);
    });
    store.base_ = std::move(base);
    store.events_ = std::move(events);
    store.calendar_ = TradingCalendar(std::move(dates));
    return store;
}

std::vector<Ticker> MarketStore::tickers() const {
    std::vector<Ticker> out;
    out.reserve(bars_.size());
    for (const auto& [t, _] : bars_) out.push_back(t);
    return out;
}

std::vector<Bar> MarketStore::all_bars() const {
    std::vector<Bar> out;
    out.reserve(bar_count_);
    for (const auto& [_, series] : bars_) out.insert(out.end(), series.begin(), series.end());
    return out;
}

std::set<Ticker> MarketStore::universe_as_of(Date d) const {
    if (!calendar_.empty() && (d < calendar_.first() || d > calendar_.last())) {
        throw RangeError("date " + d.to_string() + " outside loaded range " +
                         calendar_.first().to_string() + ".." + calendar_.last().to_string());
    }
    std::set<Ticker> members = base_;
    for (const auto& ev : events_) {
        if (ev.effective_date > d) break;
        if (ev.removed) members.erase(*ev.removed);
        if (ev.added) members.insert(*ev.added);
    }
    return members;
}

const Bar* MarketStore::find(const Ticker& ticker, Date d) const {
    auto it = bars_.find(ticker);
    if (it == bars_.end()) return nullptr;
    const auto& series = it->second;
    auto pos = std::lower_bound(series.begin(), series.end(), d,
                                [](const Bar& b, Date date) { return b.date < date; });
    if (pos == series.end() || pos->date != d) return nullptr;
    return &*pos;
}

Price MarketStore::execution_price(const Ticker& ticker, Date d) const {
    const Bar* bar = find(ticker, d);
    if (bar == nullptr) throw DataGapError("no bar for " + ticker + " on " + d.to_string());
    return bar->open;
}

std::optional<Price> MarketStore::close_price(const Ticker& ticker, Date d) const {
    const Bar* bar = find(ticker, d);
    if (bar == nullptr) return std::nullopt;
    return bar->close;
}

std::optional<Price> MarketStore::last_close_on_or_before(const Ticker& ticker, Date d) const {
    auto it = bars_.find(ticker);
    if (it == bars_.end()) return std::nullopt;
    const auto& series = it->second;
    auto pos = std::upper_bound(series.begin(), series.end(), d,
                                [](Date date, const Bar& b) { return date < b.date; });
    if (pos == series.begin()) return std::nullopt;
    return std::prev(pos)->close;
}

std::string MarketStore::content_hash() const {
    Sha256 h;
    for (const auto& [ticker, series] : bars_) {
        for (const auto& b : series) {
            h.field(b.ticker).field(b.date.to_string()).field(b.open.to_string())
                .field(b.high.to_string()).field(b.low.to_string()).field(b.close.to_string())
                .field(std::to_string(b.volume));
        }
    }
    h.field("base");
    for (const auto& t : base_) h.field(t);
    h.field("events");
    for (const auto& ev : events_) {
        h.field(ev.effective_date.to_string()).field(ev.added.value_or("")).field(ev.removed.value_or(""));
    }
    return h.hex();
}

MarketStore load_market_data(std::istream& bar_records, std::istream& universe_events,
                             const std::string& bar_source, const std::string& universe_source) {
    auto bars = read_bars_csv(bar_records, bar_source);
    if (!bars.rejected.empty()) {
        const auto& r = bars.rejected.front();
        throw ValidationError(bar_source + ":" + std::to_string(r.line) + ": " + r.reason);
    }
    auto universe = read_universe_csv(universe_events, universe_source);
    if (!universe.rejected.empty()) {
        const auto& r = universe.rejected.front();
        throw ValidationError(universe_source + ":" + std::to_string(r.line) + ": " + r.reason);
    }
    std::set<Ticker> base;
    std::vector<UniverseEvent> events;
    std::size_t seq = 0;
    for (auto& row : universe.rows) {
        switch (row.action) {
            case UniverseAction::Base:
                base.insert(row.ticker);
                break;
            case UniverseAction::Add:
                events.push_back({row.effective_date, row.ticker, std::nullopt, seq++});
                break;
            case UniverseAction::Remove:
                events.push_back({row.effective_date, std::nullopt, row.ticker, seq++});
                break;
        }
    }
    return MarketStore::build(std::move(bars.rows), std::move(base), std::move(events));
}

}  // namespace macroalloc
