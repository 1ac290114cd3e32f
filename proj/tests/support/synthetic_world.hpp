#pragma once

// Randomized point-in-time stores and prompt-driven gateways for whole-loop properties.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include <json.hpp>

#include "macroalloc/backtest_engine.hpp"
#include "macroalloc/core/hash.hpp"

namespace macroalloc::test {

struct SyntheticWorld {
    std::vector<Bar> bars;
    std::set<Ticker> base;
    std::vector<UniverseEvent> events;
    std::vector<MacroObservation> macro_obs;
    std::vector<FomcSummary> minutes;
    std::vector<SentimentRecord> records;
    std::vector<NewsArticle> news;
    std::vector<Ticker> tickers;
    std::vector<Date> days;
    AliasTable aliases;
    SectorMap sectors;

    // Built stores.
    MarketStore market;
    MacroStore macro;
    FomcStore fomc;
    SentimentMemory sentiment;

    void build() {
        market = MarketStore::build(bars, base, events);
        macro = MacroStore::build(macro_obs);
        fomc = FomcStore::build(minutes);
        sentiment = SentimentMemory{};
        for (const auto& r : records) sentiment.store_record(r);
    }

    [[nodiscard]] BacktestInputs inputs(LlmGateway& g) const {
        return BacktestInputs{market, macro, fomc, sentiment, aliases, sectors, g};
    }
};

inline std::string company_name(const Ticker& t) { return "Company " + t + " Holdings"; }

inline SyntheticWorld make_world(std::uint64_t seed, int n_tickers = 12, int n_days = 24) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SyntheticWorld w;
    for (Date d = Date::parse("2019-01-02"); static_cast<int>(w.days.size()) < n_days; d = d.plus_days(1)) {
        const unsigned wd = std::chrono::weekday{d.sys_days()}.c_encoding();
        if (wd != 0 && wd != 6) w.days.push_back(d);
    }
    for (int i = 0; i < n_tickers; ++i) {
        const Ticker t = "K" + std::string(1, static_cast<char>('A' + i)) + "X";
        w.tickers.push_back(t);
        w.sectors.add(t, kSectors[i % kSectors.size()]);
        w.aliases.add(company_name(t), t);
        if (i < n_tickers - 2) w.base.insert(t);
    }
    // One addition and one removal inside the window.
    const Date add_day = w.days[3 + rng() % (w.days.size() / 2)];
    const Date drop_day = w.days[3 + rng() % (w.days.size() / 2)];
    w.events.push_back({add_day, w.tickers[n_tickers - 1], std::nullopt, 0});
    w.events.push_back({drop_day, std::nullopt, w.tickers[rng() % (n_tickers - 2)], 1});

    std::normal_distribution<double> ret(0.0002, 0.02);
    for (const auto& t : w.tickers) {
        double px = 20.0 + 400.0 * u(rng);
        const bool delisted = t == *w.events[1].removed;
        for (const auto& d : w.days) {
            if (delisted && !(d < drop_day) && u(rng) < 0.5) continue;  // sometimes no bars after removal
            const double open = px * std::exp(ret(rng));
            const double close = open * std::exp(ret(rng));
            px = close;
            if (u(rng) < 0.02) continue;  // sporadic gap
            const auto o = Price::from_double(open), c = Price::from_double(close);
            const Price hi = std::max(o, c), lo = std::min(o, c);
            w.bars.push_back(Bar{t, d, o, Price::from_units(hi.units() + 100), Price::from_units(std::max<std::int64_t>(
                                                                                   1, lo.units() - 100)),
                                 c, 1000 + static_cast<std::int64_t>(rng() % 100000)});
        }
    }

    std::size_t ref = 0;
    for (const auto& d : w.days) {
        const std::size_t n = rng() % 6;
        for (std::size_t k = 0; k < n; ++k) {
            const Ticker& t = w.tickers[rng() % w.tickers.size()];
            SentimentRecord r;
            r.published_date = d;
            r.ticker = u(rng) < 0.3 ? company_name(t) : t;
            r.article_ref = "art" + std::to_string(ref++);
            std::vector<std::string> aspects{"revenue", "growth", "risk", "management", "supply_chain"};
            std::shuffle(aspects.begin(), aspects.end(), rng);
            for (std::size_t j = 0, m = 1 + rng() % 3; j < m; ++j) {
                r.pairs.push_back({aspects[j], static_cast<int>(rng() % 3) - 1, aspects[j] != "supply_chain"});
            }
            w.records.push_back(r);
            w.news.push_back(NewsArticle{d, "Headline " + r.article_ref, "desc", "body", r.article_ref});
        }
    }

    for (Indicator ind : kIndicators) {
        double level = ind == Indicator::NFP ? 150000.0 : ind == Indicator::PMI ? 54.0 : 250.0;
        for (int m = 0; m < 9; ++m) {
            const YearMonth p{2018, static_cast<unsigned>(m + 4)};  // 2018-04 .. 2018-12
            level *= 1.0 + (u(rng) - 0.5) * 0.01;
            const Date rel = p.last_day().plus_days(5 + static_cast<int>(rng() % 40));
            w.macro_obs.push_back({ind, p, rel, level});
        }
    }
    for (int k = 0; k < 6; ++k) {
        const Date meet = Date::parse("2018-09-26").plus_days(21 * k + static_cast<int>(rng() % 5));
        w.minutes.push_back({meet, meet.plus_days(21), "Committee summary " + std::to_string(k)});
    }
    w.build();
    return w;
}

/// Everything released, published or effective after `d` removed.
inline SyntheticWorld truncate_after(const SyntheticWorld& in, Date d) {
    SyntheticWorld w = in;
    auto keep = [&](Date x) { return !(d < x); };
    std::erase_if(w.bars, [&](const Bar& b) { return !keep(b.date); });
    std::erase_if(w.events, [&](const UniverseEvent& e) { return !keep(e.effective_date); });
    std::erase_if(w.macro_obs, [&](const MacroObservation& o) { return !keep(o.release_date); });
    std::erase_if(w.minutes, [&](const FomcSummary& s) { return !keep(s.release_date); });
    std::erase_if(w.records, [&](const SentimentRecord& r) { return !keep(r.published_date); });
    std::erase_if(w.news, [&](const NewsArticle& a) { return !keep(a.published_date); });
    std::erase_if(w.days, [&](Date x) { return !keep(x); });
    w.build();
    return w;
}

/// Replies are a pure function of the request: ranking replies name candidates picked by the
/// prompt's hash, decision replies transcribe the candidate lines found in the prompt as JSON.
class PromptHashGateway final : public LlmGateway {
public:
    explicit PromptHashGateway(std::vector<Ticker> pool) : pool_(std::move(pool)) {}

    ChatResponse complete(const ChatRequest& req) override {
        const std::string& prompt = req.messages.back().text;
        const std::string h = sha256_hex(prompt);
        if (req.request_tag.rfind("ranking:", 0) == 0) {
            std::string text = "REFLECTION " + h.substr(0, 16) + "\n";
            for (std::size_t i = 0; i + 3 < 24; i += 3) {
                const unsigned v = std::stoul(h.substr(i, 3), nullptr, 16);
                const Ticker& t = pool_[v % pool_.size()];
                const char* action = (v / 7) % 5 < 2 ? "LONG" : (v / 7) % 5 < 4 ? "SHORT" : "CLOSE";
                text += std::string(action) + " " + t + " " + std::to_string(1 + (v % 150) / 10.0) + "\n";
            }
            return ChatResponse{text, 1, 1, 0};
        }
        static const std::regex line(R"((LONG|SHORT|CLOSE) ([A-Z]+) ([0-9.]+))");
        nlohmann::json out = nlohmann::json::array();
        for (std::sregex_iterator it(prompt.begin(), prompt.end(), line), end; it != end; ++it) {
            const std::string a = (*it)[1];
            nlohmann::json d{{"ticker", (*it)[2].str()},
                             {"action", a == "LONG" ? "open_long" : a == "SHORT" ? "open_short" : "close"}};
            if (a != "CLOSE") d["size_pct"] = std::stod((*it)[3].str());
            out.push_back(d);
        }
        return ChatResponse{out.dump(), 1, 1, 0};
    }

private:
    std::vector<Ticker> pool_;
};

/// Arbitrary replies: random bytes, broken JSON and hostile but well-formed JSON.
class FuzzGateway final : public LlmGateway {
public:
    FuzzGateway(std::uint64_t seed, std::vector<Ticker> pool) : rng_(seed), pool_(std::move(pool)) {}

    ChatResponse complete(const ChatRequest&) override {
        ++calls_;
        return ChatResponse{next(), 0, 0, 0};
    }
    [[nodiscard]] std::size_t calls() const { return calls_; }

    std::string next() {
        std::uniform_int_distribution<int> kind(0, 9);
        switch (kind(rng_)) {
            case 0: {
                std::string s(rng_() % 300, '\0');
                for (auto& c : s) c = static_cast<char>(rng_() % 256);
                return s;
            }
            case 1: return "";
            case 2: return "```json\n[{\"ticker\": \"" + pick() + "\", \"action\": \"open_long\", \"size_pct\": ";
            case 3: return R"([{"ticker": null, "action": 5}, {"ticker": [], "size_pct": "x"}])";
            case 4: {
                nlohmann::json a = nlohmann::json::array();
                for (int i = 0, n = static_cast<int>(rng_() % 40); i < n; ++i) {
                    a.push_back({{"ticker", pick()},
                                 {"action", actions()[rng_() % actions().size()]},
                                 {"size_pct", sizes()[rng_() % sizes().size()]}});
                }
                return a.dump();
            }
            case 5: return "{\"decisions\": {\"ticker\": \"" + pick() + "\"}}";
            case 6: return std::string(rng_() % 50, '[') + std::string(rng_() % 50, ']');
            case 7: return "LONG " + pick() + " 1e308\nSHORT " + pick() + " -3\n{\"a\":";
            case 8: return R"({"ticker":")" + pick() + R"(","action":"open_short","size_pct":1e999})";
            default: {
                nlohmann::json o{{"ticker", pick() + "\xff"}, {"action", "close"}, {"size_pct", -0.0}};
                return "prefix " + o.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + " suffix }";
            }
        }
    }

private:
    std::string pick() { return pool_[rng_() % pool_.size()]; }
    static const std::vector<std::string>& actions() {
        static const std::vector<std::string> a{"open_long", "open_short", "close", "LONG", "sell", "", "hold"};
        return a;
    }
    static const std::vector<double>& sizes() {
        static const std::vector<double> s{1.0, 0.0, -5.0, 1e-9, 19.99, 20.0, 25.0, 1e12};
        return s;
    }

    std::mt19937_64 rng_;
    std::vector<Ticker> pool_;
    std::size_t calls_ = 0;
};

inline BacktestConfig world_config(const SyntheticWorld& w, Strategy s, Date end) {
    BacktestConfig c;
    c.strategy = s;
    c.start = w.days[1];
    c.end = end;
    return c;
}

}  // namespace macroalloc::test
