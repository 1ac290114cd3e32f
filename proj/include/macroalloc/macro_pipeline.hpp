#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "macroalloc/core/date.hpp"
#include "macroalloc/llm_gateway.hpp"
#include "macroalloc/market_data.hpp"

namespace macroalloc {

enum class Indicator { CPI, PPI, PCE, NFP, PMI };

inline constexpr std::array<Indicator, 5> kIndicators{Indicator::CPI, Indicator::PPI, Indicator::PCE,
                                                      Indicator::NFP, Indicator::PMI};

std::string to_string(Indicator i);
Indicator parse_indicator(std::string_view s);

struct MacroObservation {
    Indicator indicator = Indicator::CPI;
    YearMonth reference_period;
    Date release_date;
    double value = 0.0;
};

/// Release must not precede the end of the reference month (PMI exempt); value finite.
void validate_observation(const MacroObservation& obs);

/// First-print indicator observations keyed by release date.
class MacroStore {
public:
    MacroStore() = default;
    /// Throws ValidationError on an invalid or duplicate (indicator, reference_period) row.
    static MacroStore build(std::vector<MacroObservation> observations);

    /// Observations for one indicator, sorted by reference period.
    [[nodiscard]] std::span<const MacroObservation> series(Indicator i) const;
    [[nodiscard]] const MacroObservation* find(Indicator i, YearMonth period) const;
    [[nodiscard]] std::vector<MacroObservation> all() const;
    [[nodiscard]] std::string content_hash() const;

private:
    std::map<Indicator, std::vector<MacroObservation>> series_;
};

IngestReport<MacroObservation> read_macro_csv(std::istream& in, const std::string& source);

struct TrendReading {
    double pct = 0.0;
    YearMonth latest_period;
    YearMonth previous_period;
    Date latest_release;
    Date previous_release;
};

/// Month-over-month change between the two most recent reference periods released by `as_of`.
/// Throws InsufficientDataError with fewer than two such observations.
TrendReading compute_trend(std::span<const MacroObservation> series, Date as_of);
double mom_pct_change(std::span<const MacroObservation> series, Date as_of);

/// Signed, two decimals, percent sign: `+0.20%`, `-1.05%`.
std::string format_trend(double pct);

struct FomcSummary {
    Date meeting_date;
    Date release_date;
    std::string text;
};

class FomcStore {
public:
    FomcStore() = default;
    static FomcStore build(std::vector<FomcSummary> summaries);

    /// Most recent summary whose minutes were published on or before `as_of`.
    [[nodiscard]] const FomcSummary* latest_released(Date as_of) const;
    [[nodiscard]] const FomcSummary* find_meeting(Date meeting) const;
    [[nodiscard]] const std::vector<FomcSummary>& all() const { return summaries_; }
    [[nodiscard]] std::string content_hash() const;

private:
    std::vector<FomcSummary> summaries_;  // by (release_date, meeting_date)
};

/// Macro Memory view for one decision date.
struct MacroSnapshot {
    Date as_of;
    std::map<Indicator, TrendReading> trends;
    std::map<Indicator, std::string> missing;  // indicator -> reason
    std::optional<FomcSummary> fomc;

    [[nodiscard]] nlohmann::json to_json() const;
    /// Canonical bytes; identical inputs give identical output.
    [[nodiscard]] std::string serialize() const;
};

MacroSnapshot build_snapshot(const MacroStore& series, const FomcStore& fomc, Date as_of);

// ---- FOMC minutes ----

struct FomcIndexEntry {
    Date meeting_date;
    Date release_date;
    std::filesystem::path path;
};

/// `meeting_date,release_date,path`; relative paths resolve against `base_dir`.
IngestReport<FomcIndexEntry> read_fomc_index(std::istream& in, const std::string& source,
                                             const std::filesystem::path& base_dir);

std::string render_fomc_prompt(std::string_view minutes_text);

/// Throws ValidationError on empty minutes and EmptyResponseError on an empty reply.
FomcSummary summarize_fomc(std::string_view minutes_text, Date meeting_date, Date release_date,
                           LlmGateway& gateway, const std::string& model_id,
                           int max_output_tokens = 4096);

/// Summaries persisted as JSON lines `{meeting_date, release_date, text}`.
std::vector<FomcSummary> load_fomc_summaries(const std::filesystem::path& path);
void save_fomc_summaries(const std::filesystem::path& path, const std::vector<FomcSummary>& summaries);

/// summarize_fomc with an on-disk cache keyed by the hash of prompt and model.
class FomcSummarizer {
public:
    FomcSummarizer(LlmGateway& gateway, std::string model_id, std::filesystem::path cache_dir,
                   int max_output_tokens = 4096);

    FomcSummary summarize(const FomcIndexEntry& entry);
    [[nodiscard]] int cache_hits() const { return hits_; }
    [[nodiscard]] int gateway_calls() const { return calls_; }

private:
    LlmGateway& gateway_;
    std::string model_id_;
    std::filesystem::path cache_dir_;
    int max_output_tokens_;
    int hits_ = 0;
    int calls_ = 0;
};

}  // namespace macroalloc
