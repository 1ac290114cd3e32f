#include "macroalloc/sentiment_pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/hash.hpp"
#include "macroalloc/core/text.hpp"
#include "macroalloc/prompt_templates.hpp"

namespace macroalloc {

using nlohmann::json;

const std::array<std::string_view, 14> kAspectVocabulary{
    "revenue",     "earnings",   "market_share", "product_performance",   "management",
    "growth",      "competition", "regulatory",  "innovation",            "customer_demand",
    "operational_efficiency", "partnerships", "risk", "strategy"};

namespace {

const std::map<std::string, std::string, std::less<>>& synonyms() {
    static const std::map<std::string, std::string, std::less<>> table{
        {"revenue/sales", "revenue"},   {"sales", "revenue"},          {"revenues", "revenue"},
        {"top_line", "revenue"},        {"earnings/profit", "earnings"}, {"profit", "earnings"},
        {"profits", "earnings"},        {"profitability", "earnings"}, {"net_income", "earnings"},
        {"eps", "earnings"},            {"market_position", "market_share"},
        {"products", "product_performance"}, {"product", "product_performance"},
        {"product_sales", "product_performance"}, {"regulation", "regulatory"},
        {"demand", "customer_demand"},  {"consumer_demand", "customer_demand"},
        {"efficiency", "operational_efficiency"}, {"operations", "operational_efficiency"},
        {"partnership", "partnerships"}, {"partners", "partnerships"}, {"risks", "risk"},
        {"strategic_direction", "strategy"}};
    return table;
}

bool is_placeholder_entity(const std::string& s) {
    const auto v = to_lower(s);
    return v.empty() || v == "none" || v == "null" || v == "n/a" || v == "na" || v == "unknown";
}

std::string table_safe(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c == '|' || c == '\n' || c == '\r') c = ' ';
    }
    return trim(out);
}

json record_to_json(const SentimentRecord& r) {
    json pairs = json::array();
    for (const auto& p : r.pairs) pairs.push_back(json::array({p.aspect, p.sentiment}));
    return json{{"published_date", r.published_date.to_string()},
                {"ticker", r.ticker},
                {"pairs", pairs},
                {"article_ref", r.article_ref}};
}

SentimentRecord record_from_json(const json& j) {
    SentimentRecord r;
    r.published_date = Date::parse(j.at("published_date").get<std::string>());
    r.ticker = j.at("ticker").get<std::string>();
    r.article_ref = j.at("article_ref").get<std::string>();
    for (const auto& p : j.at("pairs")) {
        auto norm = normalize_aspect(p.at(0).get<std::string>());
        r.pairs.push_back({norm.name, p.at(1).get<int>(), norm.canonical});
    }
    return r;
}

}  // namespace

std::string article_ref_for(const NewsArticle& a) {
    return a.source_id.empty() ? article_content_hash(a).substr(0, 16) : a.source_id;
}

// ---- news ingestion ----

void validate_article(const NewsArticle& a) {
    if (trim(a.title).empty()) throw ValidationError("article " + a.source_id + " has an empty title");
}

std::string article_content_hash(const NewsArticle& a) {
    return Sha256{}
        .field(a.published_date.to_string())
        .field(a.title)
        .field(a.description)
        .field(a.content)
        .field(a.source_id)
        .hex();
}

IngestReport<NewsArticle> read_news_jsonl(std::istream& in, const std::string& source) {
    IngestReport<NewsArticle> report;
    std::set<std::string> seen;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) throw ParseError("not a JSON object");
            NewsArticle a;
            if (!j.contains("published_date")) throw ParseError("missing published_date");
            a.published_date = Date::parse(j.at("published_date").get<std::string>());
            a.title = j.value("title", std::string{});
            a.description = j.value("description", std::string{});
            a.content = j.value("content", std::string{});
            a.source_id = j.value("source_id", std::string{});
            validate_article(a);
            if (!a.source_id.empty() && !seen.insert(a.source_id).second) {
                throw ValidationError("duplicate source_id " + a.source_id);
            }
            report.rows.push_back(std::move(a));
        } catch (const json::exception& e) {
            report.rejected.push_back({n, std::string("bad field type: ") + e.what()});
        } catch (const Error& e) {
            report.rejected.push_back({n, e.what()});
        }
    }
    (void)source;
    return report;
}

// ---- aspects & prompt ----

NormalizedAspect normalize_aspect(std::string_view raw) {
    std::string s;
    bool pending_sep = false;
    for (char ch : to_lower(trim(raw))) {
        const bool keep = (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '/';
        if (keep) {
            if (pending_sep && !s.empty() && s.back() != '/' && ch != '/') s.push_back('_');
            s.push_back(ch);
            pending_sep = false;
        } else {
            pending_sep = true;
        }
    }
    if (auto it = synonyms().find(s); it != synonyms().end()) s = it->second;
    // Free-form names must stay snake_case: collapse any remaining '/' into '_'.
    std::replace(s.begin(), s.end(), '/', '_');
    const bool canonical =
        std::find(kAspectVocabulary.begin(), kAspectVocabulary.end(), s) != kAspectVocabulary.end();
    return {s, canonical};
}

std::string render_sentiment_prompt(const NewsArticle& a) {
    std::string prompt(templates::kSentimentAnalysis);
    prompt += "\n\nInput:\nTitle: ";
    prompt += a.title;
    prompt += "\nDescription: ";
    prompt += a.description;
    prompt += "\nContent: ";
    prompt += a.content;
    prompt += "\n\nOutput:\n";
    return prompt;
}

std::optional<SentimentRecord> sentiment_from_json(const json& reply, const NewsArticle& article) {
    if (!reply.is_object()) throw ValidationError("sentiment reply is not a JSON object");
    auto stock_it = reply.find("stock");
    if (stock_it == reply.end() || stock_it->is_null()) return std::nullopt;
    if (!stock_it->is_string()) throw ValidationError("sentiment reply 'stock' is not a string");
    std::string stock = trim(stock_it->get<std::string>());
    if (is_placeholder_entity(stock)) return std::nullopt;

    auto pairs_it = reply.find("aspect_sentiment_pairs");
    if (pairs_it == reply.end() || !pairs_it->is_array()) {
        throw ValidationError("sentiment reply lacks an aspect_sentiment_pairs array");
    }

    SentimentRecord rec;
    rec.published_date = article.published_date;
    rec.ticker = table_safe(stock);
    rec.article_ref = article_ref_for(article);
    std::set<std::string> seen;
    for (const auto& item : *pairs_it) {
        json aspect_v;
        json sentiment_v;
        if (item.is_array() && item.size() == 2) {
            aspect_v = item[0];
            sentiment_v = item[1];
        } else if (item.is_object() && item.contains("aspect") && item.contains("sentiment")) {
            aspect_v = item["aspect"];
            sentiment_v = item["sentiment"];
        } else {
            throw ValidationError("malformed aspect pair " + item.dump(-1, ' ', false, json::error_handler_t::replace));
        }
        if (!aspect_v.is_string()) throw ValidationError("aspect name is not a string");
        if (!sentiment_v.is_number()) throw ValidationError("sentiment is not a number");
        const double value = sentiment_v.get<double>();
        if (!(value == -1.0 || value == 0.0 || value == 1.0)) {
            throw ValidationError("sentiment " + sentiment_v.dump() + " outside {-1, 0, 1}");
        }
        auto norm = normalize_aspect(aspect_v.get<std::string>());
        if (norm.name.empty()) continue;
        if (!seen.insert(norm.name).second) {
            spdlog::debug("{}: dropping duplicate aspect {}", rec.article_ref, norm.name);
            continue;
        }
        if (!norm.canonical) {
            spdlog::info("{}: non-canonical aspect '{}' kept", rec.article_ref, norm.name);
        }
        rec.pairs.push_back({norm.name, static_cast<int>(value), norm.canonical});
    }
    if (rec.pairs.empty()) throw ValidationError("sentiment reply has no usable aspect pairs");
    if (rec.pairs.size() > kMaxAspectPairs) {
        spdlog::info("{}: truncating {} aspect pairs to {}", rec.article_ref, rec.pairs.size(), kMaxAspectPairs);
        rec.pairs.resize(kMaxAspectPairs);
    }
    return rec;
}

std::optional<SentimentRecord> analyze_article(const NewsArticle& article, LlmGateway& gateway,
                                               const std::string& model_id, int max_output_tokens) {
    validate_article(article);
    auto req = make_request(render_sentiment_prompt(article), model_id, max_output_tokens,
                            "sentiment:" + article_ref_for(article));
    json reply = complete_json(gateway, req, kJsonOnlyReminder);
    return sentiment_from_json(reply, article);
}

// ---- ticker resolution ----

std::string AliasTable::key(std::string_view name) {
    std::string k;
    bool space = false;
    for (char c : to_lower(trim(name))) {
        if (c == ' ' || c == '\t') {
            space = true;
            continue;
        }
        if (space && !k.empty()) k.push_back(' ');
        space = false;
        k.push_back(c);
    }
    return k;
}

void AliasTable::add(std::string_view name, Ticker ticker) { names_[key(name)] = std::move(ticker); }

std::optional<Ticker> AliasTable::lookup(std::string_view name) const {
    auto it = names_.find(key(name));
    if (it == names_.end()) return std::nullopt;
    return it->second;
}

AliasTable AliasTable::load_csv(std::istream& in, const std::string& source) {
    AliasTable t;
    CsvReader reader(in, source, {"name", "ticker"});
    while (auto row = reader.next()) {
        if (row->fields[0].empty() || row->fields[1].empty()) {
            throw ParseError(source, row->line, "empty alias field");
        }
        t.add(row->fields[0], to_upper(row->fields[1]));
    }
    return t;
}

std::optional<Ticker> resolve_ticker(std::string_view raw, const std::set<Ticker>& universe,
                                     const AliasTable& aliases) {
    const std::string t = trim(raw);
    if (t.empty()) return std::nullopt;
    if (universe.count(t) != 0) return t;
    if (auto upper = to_upper(t); universe.count(upper) != 0) return upper;
    if (auto alias = aliases.lookup(t); alias && universe.count(*alias) != 0) return alias;
    return std::nullopt;
}

// ---- memory ----

bool SentimentMemory::store_record(SentimentRecord record) {
    if (by_ref_.count(record.article_ref) != 0) return false;
    if (record.pairs.empty() || record.pairs.size() > kMaxAspectPairs) {
        throw ValidationError("record " + record.article_ref + " must carry 1-5 aspect pairs");
    }
    std::set<std::string> seen;
    for (const auto& p : record.pairs) {
        if (p.sentiment < -1 || p.sentiment > 1) {
            throw ValidationError("record " + record.article_ref + " sentiment out of range");
        }
        if (!seen.insert(p.aspect).second) {
            throw ValidationError("record " + record.article_ref + " repeats aspect " + p.aspect);
        }
    }
    by_ref_.emplace(record.article_ref, records_.size());
    records_.push_back(std::move(record));
    return true;
}

const SentimentRecord* SentimentMemory::find(std::string_view article_ref) const {
    auto it = by_ref_.find(article_ref);
    return it == by_ref_.end() ? nullptr : &records_[it->second];
}

std::vector<SentimentRecord> SentimentMemory::retrieve_for_decision(Date decision_date,
                                                                    const MarketStore& market,
                                                                    const AliasTable& aliases) const {
    const Date previous = market.calendar().previous_trading_day(decision_date);
    const auto universe = market.universe_as_of(decision_date);
    std::vector<SentimentRecord> out;
    for (const auto& r : records_) {
        if (r.published_date != previous) continue;
        auto symbol = resolve_ticker(r.ticker, universe, aliases);
        if (!symbol) continue;
        SentimentRecord copy = r;
        copy.ticker = *symbol;
        out.push_back(std::move(copy));
    }
    std::sort(out.begin(), out.end(), [](const SentimentRecord& a, const SentimentRecord& b) {
        return std::tie(a.ticker, a.article_ref) < std::tie(b.ticker, b.article_ref);
    });
    return out;
}

std::string SentimentMemory::content_hash() const { return sha256_hex(to_table()); }

std::string SentimentMemory::to_table() const {
    std::string out = "published_date|ticker|aspect|sentiment|article_ref\n";
    for (const auto& r : records_) {
        for (const auto& p : r.pairs) {
            out += r.published_date.to_string() + "|" + table_safe(r.ticker) + "|" + p.aspect + "|" +
                   std::to_string(p.sentiment) + "|" + table_safe(r.article_ref) + "\n";
        }
    }
    return out;
}

SentimentMemory SentimentMemory::from_table(std::istream& in, const std::string& source) {
    SentimentMemory mem;
    std::vector<SentimentRecord> pending;
    std::map<std::string, std::size_t> index;
    std::string line;
    std::size_t n = 0;
    bool header = true;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (header) {
            header = false;
            if (line == "published_date|ticker|aspect|sentiment|article_ref") continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string part;
        while (std::getline(ss, part, '|')) f.push_back(part);
        if (f.size() != 5) throw ParseError(source, n, "expected 5 '|' separated fields");
        SentimentRecord* rec = nullptr;
        Date d;
        try {
            d = Date::parse(f[0]);
        } catch (const ParseError& e) {
            throw ParseError(source, n, e.what());
        }
        int sentiment = 0;
        if (f[3] == "1") sentiment = 1;
        else if (f[3] == "0") sentiment = 0;
        else if (f[3] == "-1") sentiment = -1;
        else throw ParseError(source, n, "sentiment must be -1, 0 or 1");
        auto it = index.find(f[4]);
        if (it == index.end()) {
            index.emplace(f[4], pending.size());
            pending.push_back(SentimentRecord{d, f[1], {}, f[4]});
            rec = &pending.back();
        } else {
            rec = &pending[it->second];
            if (rec->published_date != d || rec->ticker != f[1]) {
                throw ParseError(source, n, "rows for " + f[4] + " disagree on date or ticker");
            }
        }
        auto norm = normalize_aspect(f[2]);
        rec->pairs.push_back({norm.name, sentiment, norm.canonical});
    }
    for (auto& r : pending) mem.store_record(std::move(r));
    return mem;
}

SentimentMemory SentimentMemory::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open sentiment memory " + path.string());
    return from_table(in, path.string());
}

void SentimentMemory::save(const std::filesystem::path& path) const { write_file(path, to_table()); }

std::string format_pairs(const std::vector<AspectSentiment>& pairs) {
    std::string out = "[";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i > 0) out += ",";
        out += "[" + pairs[i].aspect + ", " + std::to_string(pairs[i].sentiment) + "]";
    }
    out += "]";
    return out;
}

// ---- batch ----

SentimentBatchAnalyzer::SentimentBatchAnalyzer(LlmGateway& gateway, std::string model_id,
                                               std::filesystem::path cache_path, int max_in_flight,
                                               int max_output_tokens)
    : gateway_(gateway),
      model_id_(std::move(model_id)),
      cache_path_(std::move(cache_path)),
      max_in_flight_(std::max(1, max_in_flight)),
      max_output_tokens_(max_output_tokens) {}

SentimentBatchStats SentimentBatchAnalyzer::run(const std::vector<NewsArticle>& articles,
                                                SentimentMemory& memory) {
    struct Outcome {
        std::string status;  // ok | no_entity | rejected
        std::optional<SentimentRecord> record;
    };

    std::map<std::string, Outcome> cache;
    if (std::filesystem::exists(cache_path_)) {
        std::ifstream in(cache_path_, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.is_object()) continue;  // torn final line after a crash
            Outcome o{j.value("status", std::string{}), std::nullopt};
            if (o.status == "ok") o.record = record_from_json(j.at("record"));
            cache[j.value("key", std::string{})] = std::move(o);
        }
    }

    SentimentBatchStats stats;
    stats.articles = articles.size();
    std::vector<std::string> keys;
    keys.reserve(articles.size());
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < articles.size(); ++i) {
        keys.push_back(Sha256{}.field(model_id_).field(article_content_hash(articles[i])).hex());
        if (cache.count(keys.back()) != 0) ++stats.cached;
        else todo.push_back(i);
    }

    std::mutex write_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::string gateway_failure;
    auto worker = [&] {
        while (!stop) {
            const std::size_t slot = next++;
            if (slot >= todo.size()) return;
            const std::size_t i = todo[slot];
            Outcome o;
            try {
                auto rec = analyze_article(articles[i], gateway_, model_id_, max_output_tokens_);
                o.status = rec ? "ok" : "no_entity";
                o.record = std::move(rec);
            } catch (const GatewayError& e) {
                std::lock_guard lock(write_mutex);
                if (gateway_failure.empty()) gateway_failure = e.what();
                stop = true;
                return;
            } catch (const ExtractionError& e) {
                spdlog::warn("article {}: {}", articles[i].source_id, e.what());
                o.status = "rejected";
            } catch (const ValidationError& e) {
                spdlog::warn("article {}: {}", articles[i].source_id, e.what());
                o.status = "rejected";
            }
            json line{{"key", keys[i]}, {"status", o.status}};
            if (o.record) line["record"] = record_to_json(*o.record);
            std::lock_guard lock(write_mutex);
            append_file(cache_path_, line.dump(-1, ' ', false, json::error_handler_t::replace) + "\n");
            cache[keys[i]] = std::move(o);
            ++stats.analyzed;
        }
    };

    const int threads = std::min<int>(max_in_flight_, static_cast<int>(std::max<std::size_t>(todo.size(), 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < articles.size(); ++i) {
        auto it = cache.find(keys[i]);
        if (it == cache.end()) continue;
        const auto& o = it->second;
        if (o.status == "no_entity") ++stats.no_entity;
        else if (o.status == "rejected") ++stats.rejected;
        else if (o.record) {
            for (const auto& p : o.record->pairs) stats.non_canonical_aspects += p.canonical ? 0 : 1;
            if (memory.store_record(*o.record)) ++stats.stored;
        }
    }
    if (!gateway_failure.empty()) {
        throw GatewayError("sentiment batch stopped after " + std::to_string(stats.analyzed) +
                           " new articles (checkpoint kept): " + gateway_failure);
    }
    return stats;
}

}  // namespace macroalloc
