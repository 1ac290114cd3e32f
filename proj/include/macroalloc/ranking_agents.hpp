#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "macroalloc/llm_gateway.hpp"
#include "macroalloc/macro_pipeline.hpp"
#include "macroalloc/market_data.hpp"
#include "macroalloc/sentiment_pipeline.hpp"

namespace macroalloc {

/// The 11 GICS sectors, in the order the ranking prompt lists them.
enum class GicsSector {
    InformationTechnology,
    Financials,
    Healthcare,
    ConsumerDiscretionary,
    ConsumerStaples,
    Industrials,
    Energy,
    Materials,
    CommunicationServices,
    Utilities,
    RealEstate,
};

inline constexpr std::array<GicsSector, 11> kSectors{
    GicsSector::InformationTechnology, GicsSector::Financials,        GicsSector::Healthcare,
    GicsSector::ConsumerDiscretionary, GicsSector::ConsumerStaples,   GicsSector::Industrials,
    GicsSector::Energy,                GicsSector::Materials,         GicsSector::CommunicationServices,
    GicsSector::Utilities,             GicsSector::RealEstate};

std::string_view sector_name(GicsSector s);
/// Accepts the listed names case-insensitively, plus "Health Care".
GicsSector parse_sector(std::string_view s);

class SectorMap {
public:
    static SectorMap load_csv(std::istream& in, const std::string& source);
    void add(Ticker ticker, GicsSector sector);
    [[nodiscard]] std::optional<GicsSector> sector_of(const Ticker& ticker) const;
    [[nodiscard]] std::size_t size() const { return sectors_.size(); }
    [[nodiscard]] std::string content_hash() const;

private:
    std::map<Ticker, GicsSector> sectors_;
};

enum class Strategy { TopDown, CrossSectional };

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view s);
/// Row label used in comparison tables: "Sector-Allocation" / "Cross-Momentum".
std::string_view strategy_label(Strategy s);

/// Current holdings as percent of total equity.
struct PortfolioView {
    std::vector<std::pair<Ticker, double>> longs;
    std::vector<std::pair<Ticker, double>> shorts;
};

struct PromptOptions {
    std::size_t max_sentiment_rows = 400;
};

/// `CPI +0.20%, PPI -0.10%, ...`; missing indicators render as `PMI unavailable`.
std::vector<std::string> trend_slot_values(const MacroSnapshot& snapshot);
std::string fomc_slot_value(const MacroSnapshot& snapshot);

/// `date|ticker|aspect_sentiment_pairs`.
std::string format_sentiment_row(const SentimentRecord& record);

/// Keeps at most `cap` records, favouring tickers with the most articles; preserves input order.
std::vector<SentimentRecord> cap_sentiment_rows(const std::vector<SentimentRecord>& records, std::size_t cap);

/// Fills the top-down template. Throws ValidationError if a record's ticker has no sector.
std::string build_topdown_prompt(const MacroSnapshot& snapshot, const std::vector<SentimentRecord>& records,
                                 const PortfolioView& portfolio, const SectorMap& sectors,
                                 const PromptOptions& options = {});

std::string build_cross_sectional_prompt(const std::set<Ticker>& universe,
                                         const std::vector<SentimentRecord>& records,
                                         const MacroSnapshot& snapshot, const PromptOptions& options = {});

struct RankingReflection {
    Strategy strategy = Strategy::TopDown;
    Date decision_date;
    std::string raw_text;
    std::string prompt_hash;
};

/// One gateway call. Gateway errors and empty replies surface as ReflectionFailure.
RankingReflection generate_reflection(const std::string& prompt, LlmGateway& gateway, Date decision_date,
                                      Strategy strategy, const std::string& model_id,
                                      int max_output_tokens = 4096);

}  // namespace macroalloc
