#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "macroalloc/core/date.hpp"
#include "macroalloc/llm_gateway.hpp"
#include "macroalloc/market_data.hpp"

namespace macroalloc {

struct NewsArticle {
    Date published_date;
    std::string title;
    std::string description;
    std::string content;
    std::string source_id;
};

/// One JSON object per line: `{published_date, title, description, content, source_id}`.
IngestReport<NewsArticle> read_news_jsonl(std::istream& in, const std::string& source);
void validate_article(const NewsArticle& article);
std::string article_content_hash(const NewsArticle& article);
/// Stable reference: source_id, or a content-hash prefix when it is empty.
std::string article_ref_for(const NewsArticle& article);

/// The fourteen canonical aspect names, in listing order.
extern const std::array<std::string_view, 14> kAspectVocabulary;

struct AspectSentiment {
    std::string aspect;
    int sentiment = 0;
    bool canonical = true;

    friend bool operator==(const AspectSentiment&, const AspectSentiment&) = default;
};

struct SentimentRecord {
    Date published_date;
    std::string ticker;  // resolved symbol or the raw name the model produced
    std::vector<AspectSentiment> pairs;
    std::string article_ref;

    friend bool operator==(const SentimentRecord&, const SentimentRecord&) = default;
};

inline constexpr std::size_t kMaxAspectPairs = 5;

struct NormalizedAspect {
    std::string name;  // lowercase snake_case; empty if nothing usable remains
    bool canonical = false;
};

/// Lowercases, snake-cases and maps synonyms ("sales" -> "revenue") onto the vocabulary.
/// Names outside it pass through flagged non-canonical.
NormalizedAspect normalize_aspect(std::string_view raw);

std::string render_sentiment_prompt(const NewsArticle& article);

/// Validates a parsed gateway reply against `article`. Returns nullopt when no entity is named.
/// Throws ValidationError on sentiments outside {-1, 0, 1} or a malformed shape.
std::optional<SentimentRecord> sentiment_from_json(const nlohmann::json& reply, const NewsArticle& article);

/// One gateway call (plus at most one JSON-only retry) per article.
std::optional<SentimentRecord> analyze_article(const NewsArticle& article, LlmGateway& gateway,
                                               const std::string& model_id, int max_output_tokens = 1024);

/// Case-insensitive company name -> symbol map, loaded from `name,ticker` CSV.
class AliasTable {
public:
    AliasTable() = default;
    static AliasTable load_csv(std::istream& in, const std::string& source);
    void add(std::string_view name, Ticker ticker);
    [[nodiscard]] std::optional<Ticker> lookup(std::string_view name) const;
    [[nodiscard]] std::size_t size() const { return names_.size(); }

private:
    static std::string key(std::string_view name);
    std::map<std::string, Ticker> names_;
};

/// Exact member symbol, else an alias that maps to a member, else nullopt.
std::optional<Ticker> resolve_ticker(std::string_view raw, const std::set<Ticker>& universe,
                                     const AliasTable& aliases);

/// Sentiment Memory: records keyed by article reference, retrievable by decision date.
class SentimentMemory {
public:
    /// False when a record with the same article_ref is already stored.
    bool store_record(SentimentRecord record);

    /// Records published on the trading day before `decision_date` whose ticker resolves into
    /// the decision-date universe; tickers are replaced by the resolved symbol and the result is
    /// ordered by (ticker, article_ref).
    [[nodiscard]] std::vector<SentimentRecord> retrieve_for_decision(Date decision_date,
                                                                     const MarketStore& market,
                                                                     const AliasTable& aliases) const;

    [[nodiscard]] const std::vector<SentimentRecord>& records() const { return records_; }
    [[nodiscard]] const SentimentRecord* find(std::string_view article_ref) const;
    [[nodiscard]] std::size_t size() const { return records_.size(); }
    [[nodiscard]] std::string content_hash() const;

    /// Pipe-delimited table `published_date|ticker|aspect|sentiment|article_ref`, one line per pair.
    [[nodiscard]] std::string to_table() const;
    static SentimentMemory from_table(std::istream& in, const std::string& source);
    static SentimentMemory load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    std::vector<SentimentRecord> records_;
    std::map<std::string, std::size_t, std::less<>> by_ref_;
};

/// Renders `[[revenue, 1],[growth, -1]]`.
std::string format_pairs(const std::vector<AspectSentiment>& pairs);

struct SentimentBatchStats {
    std::size_t articles = 0;
    std::size_t cached = 0;
    std::size_t analyzed = 0;
    std::size_t stored = 0;
    std::size_t no_entity = 0;
    std::size_t rejected = 0;
    std::size_t non_canonical_aspects = 0;
};

/// Offline batch analysis with a JSON-lines cache keyed by article content hash. Gateway
/// failures stop the batch after checkpointing completed articles, so a rerun resumes.
class SentimentBatchAnalyzer {
public:
    SentimentBatchAnalyzer(LlmGateway& gateway, std::string model_id, std::filesystem::path cache_path,
                           int max_in_flight = 4, int max_output_tokens = 1024);

    SentimentBatchStats run(const std::vector<NewsArticle>& articles, SentimentMemory& memory);

private:
    LlmGateway& gateway_;
    std::string model_id_;
    std::filesystem::path cache_path_;
    int max_in_flight_;
    int max_output_tokens_;
};

}  // namespace macroalloc
