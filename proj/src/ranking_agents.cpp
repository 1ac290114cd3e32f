#include "macroalloc/ranking_agents.hpp"

#include <algorithm>
#include <cstdio>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/hash.hpp"
#include "macroalloc/core/text.hpp"
#include "macroalloc/prompt_templates.hpp"

namespace macroalloc {

namespace {

constexpr std::string_view kRowIndent = "            ";
constexpr std::string_view kTopDownRowsAnchor = "- Format: date|ticker|aspect_sentiment_pairs\n";
constexpr std::string_view kCrossUniverseAnchor = "- All stocks are assumed to start with the same score\n";
constexpr std::string_view kCrossRowsAnchor = "(published_date|stock|aspect_sentiment_pairs)\n";
constexpr std::string_view kPositionsSlot = "[(TICKER, weight)]";
constexpr std::string_view kNoRows = "(no sentiment records for the previous trading day)";

void replace_next(std::string& text, std::size_t& cursor, std::string_view slot, std::string_view value) {
    const auto pos = text.find(slot, cursor);
    if (pos == std::string::npos) throw Error("template slot missing: " + std::string(slot));
    text.replace(pos, slot.size(), value);
    cursor = pos + value.size();
}

void insert_after(std::string& text, std::string_view anchor, std::string_view block) {
    const auto pos = text.find(anchor);
    if (pos == std::string::npos) throw Error("template anchor missing: " + std::string(anchor));
    text.insert(pos + anchor.size(), block);
}

// Fills the five trend slots and the FOMC slot shared by both ranking templates.
void fill_macro_slots(std::string& text, const MacroSnapshot& snapshot) {
    std::size_t cursor = 0;
    for (const auto& v : trend_slot_values(snapshot)) replace_next(text, cursor, "{value}", v);
    cursor = 0;
    replace_next(text, cursor, "{key_points}", fomc_slot_value(snapshot));
}

std::string render_positions(const std::vector<std::pair<Ticker, double>>& positions) {
    std::string out = "[";
    char buf[64];
    for (std::size_t i = 0; i < positions.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.1f%%", positions[i].second);
        if (i > 0) out += ", ";
        out += "(" + positions[i].first + ", " + buf + ")";
    }
    out += "]";
    return out;
}

std::string rows_block(const std::vector<SentimentRecord>& records) {
    std::string block;
    if (records.empty()) {
        block += kRowIndent;
        block += kNoRows;
        block += "\n";
        return block;
    }
    for (const auto& r : records) {
        block += kRowIndent;
        block += format_sentiment_row(r);
        block += "\n";
    }
    return block;
}

}  // namespace

std::string_view sector_name(GicsSector s) {
    switch (s) {
        case GicsSector::InformationTechnology: return "Information Technology";
        case GicsSector::Financials: return "Financials";
        case GicsSector::Healthcare: return "Healthcare";
        case GicsSector::ConsumerDiscretionary: return "Consumer Discretionary";
        case GicsSector::ConsumerStaples: return "Consumer Staples";
        case GicsSector::Industrials: return "Industrials";
        case GicsSector::Energy: return "Energy";
        case GicsSector::Materials: return "Materials";
        case GicsSector::CommunicationServices: return "Communication Services";
        case GicsSector::Utilities: return "Utilities";
        case GicsSector::RealEstate: return "Real Estate";
    }
    return "?";
}

GicsSector parse_sector(std::string_view s) {
    const auto v = to_lower(trim(s));
    if (v == "health care") return GicsSector::Healthcare;
    for (auto sector : kSectors) {
        if (to_lower(sector_name(sector)) == v) return sector;
    }
    throw ParseError("unknown GICS sector '" + std::string(s) + "'");
}

SectorMap SectorMap::load_csv(std::istream& in, const std::string& source) {
    SectorMap m;
    CsvReader reader(in, source, {"ticker", "sector"});
    while (auto row = reader.next()) {
        try {
            if (m.sector_of(row->fields[0])) throw ValidationError("ticker mapped twice: " + row->fields[0]);
            m.add(row->fields[0], parse_sector(row->fields[1]));
        } catch (const Error& e) {
            throw ParseError(source, row->line, e.what());
        }
    }
    return m;
}

void SectorMap::add(Ticker ticker, GicsSector sector) { sectors_[std::move(ticker)] = sector; }

std::optional<GicsSector> SectorMap::sector_of(const Ticker& ticker) const {
    auto it = sectors_.find(ticker);
    if (it == sectors_.end()) return std::nullopt;
    return it->second;
}

std::string SectorMap::content_hash() const {
    Sha256 h;
    for (const auto& [t, s] : sectors_) h.field(t).field(sector_name(s));
    return h.hex();
}

std::string to_string(Strategy s) { return s == Strategy::TopDown ? "top_down" : "cross_sectional"; }

Strategy parse_strategy(std::string_view s) {
    const auto v = to_lower(trim(s));
    if (v == "top_down") return Strategy::TopDown;
    if (v == "cross_sectional") return Strategy::CrossSectional;
    throw ConfigError("unknown strategy '" + std::string(s) + "' (expected top_down or cross_sectional)");
}

std::string_view strategy_label(Strategy s) {
    return s == Strategy::TopDown ? "Sector-Allocation" : "Cross-Momentum";
}

std::vector<std::string> trend_slot_values(const MacroSnapshot& snapshot) {
    std::vector<std::string> out;
    for (auto ind : kIndicators) {
        auto it = snapshot.trends.find(ind);
        out.push_back(it == snapshot.trends.end() ? std::string("unavailable") : format_trend(it->second.pct));
    }
    return out;
}

std::string fomc_slot_value(const MacroSnapshot& snapshot) {
    if (!snapshot.fomc) return "no recent FOMC summary available";
    return snapshot.fomc->text;
}

std::string format_sentiment_row(const SentimentRecord& r) {
    return r.published_date.to_string() + "|" + r.ticker + "|" + format_pairs(r.pairs);
}

std::vector<SentimentRecord> cap_sentiment_rows(const std::vector<SentimentRecord>& records, std::size_t cap) {
    if (records.size() <= cap) return records;
    std::map<Ticker, std::size_t> counts;
    for (const auto& r : records) ++counts[r.ticker];
    std::vector<std::pair<Ticker, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::map<Ticker, std::size_t> quota;
    std::size_t remaining = cap;
    for (const auto& [ticker, n] : ranked) {
        const std::size_t take = std::min(n, remaining);
        if (take == 0) break;
        quota[ticker] = take;
        remaining -= take;
    }
    std::vector<SentimentRecord> out;
    out.reserve(cap);
    for (const auto& r : records) {
        auto it = quota.find(r.ticker);
        if (it == quota.end() || it->second == 0) continue;
        --it->second;
        out.push_back(r);
    }
    return out;
}

std::string build_topdown_prompt(const MacroSnapshot& snapshot, const std::vector<SentimentRecord>& records,
                                 const PortfolioView& portfolio, const SectorMap& sectors,
                                 const PromptOptions& options) {
    for (const auto& r : records) {
        if (!sectors.sector_of(r.ticker)) {
            throw ValidationError("no GICS sector mapping for " + r.ticker);
        }
    }
    const auto kept = cap_sentiment_rows(records, options.max_sentiment_rows);

    std::string block;
    if (kept.empty()) {
        block = rows_block(kept);
    } else {
        for (auto sector : kSectors) {
            std::vector<SentimentRecord> in_sector;
            for (const auto& r : kept) {
                if (sectors.sector_of(r.ticker) == sector) in_sector.push_back(r);
            }
            if (in_sector.empty()) continue;
            block += kRowIndent;
            block += "[" + std::string(sector_name(sector)) + "]\n";
            block += rows_block(in_sector);
        }
    }

    // Data blocks go in before the macro slots so summary text can never be mistaken for an anchor.
    std::string text(templates::kTopDownRanking);
    insert_after(text, kTopDownRowsAnchor, block);
    std::size_t cursor = text.find("[CURRENT PORTFOLIO]");
    replace_next(text, cursor, kPositionsSlot, render_positions(portfolio.longs));
    replace_next(text, cursor, kPositionsSlot, render_positions(portfolio.shorts));
    fill_macro_slots(text, snapshot);
    return text;
}

std::string build_cross_sectional_prompt(const std::set<Ticker>& universe,
                                         const std::vector<SentimentRecord>& records,
                                         const MacroSnapshot& snapshot, const PromptOptions& options) {
    std::string list;
    for (const auto& t : universe) list += (list.empty() ? "" : ", ") + t;
    if (list.empty()) list = "(no tradable stocks)";
    std::string universe_block = std::string(kRowIndent) + list + "\n";

    std::string text(templates::kCrossSectionalRanking);
    insert_after(text, kCrossRowsAnchor, rows_block(cap_sentiment_rows(records, options.max_sentiment_rows)));
    insert_after(text, kCrossUniverseAnchor, universe_block);
    fill_macro_slots(text, snapshot);
    return text;
}

RankingReflection generate_reflection(const std::string& prompt, LlmGateway& gateway, Date decision_date,
                                      Strategy strategy, const std::string& model_id, int max_output_tokens) {
    if (trim(prompt).empty()) throw ValidationError("empty ranking prompt");
    RankingReflection r;
    r.strategy = strategy;
    r.decision_date = decision_date;
    r.prompt_hash = sha256_hex(prompt);
    auto req = make_request(prompt, model_id, max_output_tokens,
                            "ranking:" + to_string(strategy) + ":" + decision_date.to_string());
    try {
        r.raw_text = gateway.complete(req).text;
    } catch (const GatewayError& e) {
        throw ReflectionFailure(std::string("ranking call failed: ") + e.what());
    }
    if (trim(r.raw_text).empty()) throw ReflectionFailure("empty ranking reflection");
    return r;
}

}  // namespace macroalloc
