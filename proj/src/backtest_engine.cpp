#include "macroalloc/backtest_engine.hpp"

#include <cmath>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/hash.hpp"
#include "macroalloc/core/text.hpp"
#include "macroalloc/prompt_templates.hpp"

namespace macroalloc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string day_stem(Date d, Strategy s) { return d.to_string() + "_" + to_string(s); }

std::map<Ticker, Price> opens_for(const MarketStore& market, Date d, const std::set<Ticker>& tickers) {
    std::map<Ticker, Price> out;
    for (const auto& t : tickers) {
        if (const Bar* b = market.find(t, d)) out.emplace(t, b->open);
    }
    return out;
}

std::map<Ticker, Price> closes_for(const MarketStore& market, Date d, const PortfolioState& state) {
    std::map<Ticker, Price> out;
    for (const auto& [t, p] : state.positions) {
        if (auto c = market.close_price(t, d)) out.emplace(t, *c);
    }
    return out;
}

void check_sector_coverage(const std::vector<Date>& days, const MarketStore& market, const SectorMap& sectors) {
    std::set<Ticker> seen;
    for (Date d : days) {
        for (const auto& t : market.universe_as_of(d)) seen.insert(t);
    }
    std::vector<Ticker> unmapped;
    for (const auto& t : seen) {
        if (!sectors.sector_of(t)) unmapped.push_back(t);
    }
    if (unmapped.empty()) return;
    std::string list;
    for (const auto& t : unmapped) list += (list.empty() ? "" : ", ") + t;
    throw ValidationError("tickers without a GICS sector: " + list);
}

std::vector<MacroUse> macro_uses(const MacroSnapshot& snap) {
    std::vector<MacroUse> out;
    for (const auto& [ind, tr] : snap.trends) {
        out.push_back({ind, tr.previous_period, tr.previous_release});
        out.push_back({ind, tr.latest_period, tr.latest_release});
    }
    return out;
}

std::map<Date, int> iso_dates(std::string_view text) {
    static const std::regex pattern(R"((\d{4})-(\d{2})-(\d{2}))");
    std::map<Date, int> out;
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), pattern); it != std::sregex_iterator(); ++it) {
        Date d;
        if (Date::try_parse(it->str(), d)) ++out[d];
    }
    return out;
}

std::string_view ranking_template(Strategy s) {
    return s == Strategy::TopDown ? templates::kTopDownRanking : templates::kCrossSectionalRanking;
}

json record_json(const SentimentRecord& r) {
    return json{{"published_date", r.published_date.to_string()},
                {"ticker", r.ticker},
                {"article_ref", r.article_ref},
                {"pairs", format_pairs(r.pairs)}};
}

json day_json(const DayLog& d) {
    json records = json::array();
    for (const auto& r : d.used_records) records.push_back(record_json(r));
    json macro = json::array();
    for (const auto& u : d.macro_used) {
        macro.push_back({{"indicator", to_string(u.indicator)},
                         {"period", u.period.to_string()},
                         {"release_date", u.release_date.to_string()}});
    }
    json fomc = nullptr;
    if (d.fomc_used) {
        fomc = {{"meeting_date", d.fomc_used->meeting_date.to_string()},
                {"release_date", d.fomc_used->release_date.to_string()}};
    }
    return json{{"date", d.date.to_string()},   {"status", to_string(d.status)},  {"failure", d.failure},
                {"prompt_sha256", sha256_hex(d.prompt)}, {"used_records", records}, {"macro_used", macro},
                {"fomc_used", fomc},            {"equity", d.equity.to_string()}};
}

std::string skip_csv_row(const Skip& s) {
    return s.date.to_string() + "," + s.ticker + "," + to_string(s.action) + "," + to_string(s.reason);
}

std::string result_digest(const BacktestResult& r) {
    Sha256 h;
    h.field(equity_csv(r.equity_curve));
    for (const auto& f : r.fills) h.field(fill_csv_row(f));
    for (const auto& s : r.skips) h.field(skip_csv_row(s));
    for (const auto& d : r.days) {
        h.field(d.date.to_string()).field(to_string(d.status)).field(sha256_hex(d.prompt)).field(d.reflection);
        h.field(decisions_to_json(d.decisions, r.config.strategy).dump());
    }
    return h.hex();
}

}  // namespace

std::string to_string(DayStatus s) { return s == DayStatus::Traded ? "traded" : "hold"; }

void BacktestConfig::validate() const {
    if (!(start < end)) throw ConfigError("start must precede end");
    if (commission_bps < 0 || impact_bps < 0) throw ConfigError("cost rates must be non-negative");
    if (!(max_utilization > 0.0 && max_utilization <= 1.0)) throw ConfigError("max_utilization must lie in (0, 1]");
    if (initial_capital.units() <= 0) throw ConfigError("initial_capital must be positive");
    if (annualization_days <= 0) throw ConfigError("annualization_days must be positive");
    if (!(top_down_size_cap_pct > 0.0 && top_down_size_cap_pct <= 100.0)) {
        throw ConfigError("top_down_size_cap_pct must lie in (0, 100]");
    }
    if (max_sentiment_rows == 0) throw ConfigError("max_sentiment_rows must be positive");
}

PortfolioRules BacktestConfig::rules() const {
    return PortfolioRules{commission_bps, impact_bps, std::llround(max_utilization * 10'000.0)};
}

json BacktestConfig::to_json() const {
    return json{{"start", start.to_string()},
                {"end", end.to_string()},
                {"initial_capital", initial_capital.to_string()},
                {"strategy", macroalloc::to_string(strategy)},
                {"commission_bps", commission_bps},
                {"impact_bps", impact_bps},
                {"max_utilization", max_utilization},
                {"risk_free_rate", risk_free_rate},
                {"annualization_days", annualization_days},
                {"top_down_size_cap_pct", top_down_size_cap_pct},
                {"max_sentiment_rows", max_sentiment_rows},
                {"ranking_model", ranking_model},
                {"decision_model", decision_model},
                {"ranking_max_tokens", ranking_max_tokens},
                {"decision_max_tokens", decision_max_tokens}};
}

BacktestResult run_backtest(const BacktestConfig& config, const BacktestInputs& in) {
    config.validate();
    const auto days = in.market.calendar().between(config.start, config.end);
    if (days.empty()) throw ConfigError("no trading days between " + config.start.to_string() + " and " +
                                        config.end.to_string());
    (void)in.market.calendar().previous_trading_day(days.front());
    if (config.strategy == Strategy::TopDown) check_sector_coverage(days, in.market, in.sectors);

    const PortfolioRules rules = config.rules();
    const PromptOptions prompt_options{config.max_sentiment_rows};
    const DecisionAgentConfig decision_config{config.decision_model, config.decision_max_tokens,
                                              ValidationOptions{config.top_down_size_cap_pct, 1.0}};

    BacktestResult result;
    result.config = config;
    PortfolioState state = PortfolioState::with_cash(config.initial_capital);

    for (Date d : days) {
        DayLog log;
        log.date = d;
        const auto universe = in.market.universe_as_of(d);
        log.used_records = in.sentiment.retrieve_for_decision(d, in.market, in.aliases);
        const MacroSnapshot snapshot = build_snapshot(in.macro, in.fomc, d);
        log.macro_used = macro_uses(snapshot);
        log.fomc_used = snapshot.fomc;

        try {
            log.prompt = config.strategy == Strategy::TopDown
                             ? build_topdown_prompt(snapshot, log.used_records, portfolio_view(state), in.sectors,
                                                    prompt_options)
                             : build_cross_sectional_prompt(universe, log.used_records, snapshot, prompt_options);
            const RankingReflection reflection =
                generate_reflection(log.prompt, in.gateway, d, config.strategy, config.ranking_model,
                                    config.ranking_max_tokens);
            log.reflection = reflection.raw_text;
            log.decisions = parse_reflection(reflection, in.gateway, universe, decision_config);
            if (log.decisions.failed) {
                log.status = DayStatus::Hold;
                log.failure = log.decisions.failure_reason;
            }
        } catch (const Error& e) {
            log.status = DayStatus::Hold;
            log.failure = e.what();
            log.decisions = DecisionSet{};
            log.decisions.decision_date = d;
            log.decisions.failed = true;
            log.decisions.failure_reason = e.what();
        }
        if (log.status == DayStatus::Hold) spdlog::warn("{} hold: {}", d.to_string(), log.failure);

        std::set<Ticker> priced = universe;
        for (const auto& [t, p] : state.positions) priced.insert(t);
        DecisionSet to_execute = log.decisions;
        if (log.status == DayStatus::Hold) to_execute.decisions.clear();
        BatchOutcome outcome =
            apply_decisions(std::move(state), to_execute, d, opens_for(in.market, d, priced), universe, rules);
        state = std::move(outcome.state);
        log.fills = outcome.fills;
        log.skips = outcome.skips;
        log.equity = mark_to_market(state, closes_for(in.market, d, state));
        log.state = state_to_json(state, d, log.equity);

        result.equity_curve.emplace_back(d, log.equity);
        result.fills.insert(result.fills.end(), log.fills.begin(), log.fills.end());
        result.skips.insert(result.skips.end(), log.skips.begin(), log.skips.end());
        result.days.push_back(std::move(log));
    }

    result.final_state = state;
    result.daily_returns = daily_returns(result.equity_curve);
    result.metrics = compute_metrics(config.strategy, result.equity_curve, config.initial_capital,
                                     state.cumulative_costs, config.risk_free_rate, config.annualization_days);
    result.manifest = json{{"config_sha256", sha256_hex(config.to_json().dump())},
                           {"inputs",
                            {{"market", in.market.content_hash()},
                             {"macro", in.macro.content_hash()},
                             {"fomc", in.fomc.content_hash()},
                             {"sentiment", in.sentiment.content_hash()},
                             {"sectors", in.sectors.content_hash()}}},
                           {"result_sha256", result_digest(result)}};
    return result;
}

// ---- audit ----

json AuditReport::to_json() const {
    json v = json::array();
    for (const auto& x : violations) {
        v.push_back({{"decision_date", x.decision_date.to_string()},
                     {"kind", x.kind},
                     {"item", x.item},
                     {"detail", x.detail}});
    }
    return json{{"clean", clean()},
                {"prompts_checked", prompts_checked},
                {"records_checked", records_checked},
                {"macro_checked", macro_checked},
                {"violations", v}};
}

std::map<std::string, Date> article_dates(const std::vector<NewsArticle>& articles) {
    std::map<std::string, Date> out;
    for (const auto& a : articles) out.emplace(article_ref_for(a), a.published_date);
    return out;
}

AuditReport look_ahead_audit(const std::vector<DayLog>& days, Strategy strategy, const AuditStores& stores) {
    AuditReport report;
    std::set<std::pair<std::string, std::string>> reported;
    auto flag = [&](Date d, std::string kind, std::string item, std::string detail) {
        if (!reported.emplace(kind, item).second) return;
        report.violations.push_back({d, std::move(kind), std::move(item), std::move(detail)});
    };
    const auto template_dates = iso_dates(ranking_template(strategy));

    for (const auto& day : days) {
        const Date d = day.date;
        if (!day.prompt.empty()) {
            ++report.prompts_checked;
            for (const auto& [date, count] : iso_dates(day.prompt)) {
                auto t = template_dates.find(date);
                const int from_template = t == template_dates.end() ? 0 : t->second;
                if (count > from_template && !(date < d)) {
                    flag(d, "prompt_date", d.to_string() + ":" + date.to_string(),
                         "prompt embeds " + date.to_string() + " on or after its decision date");
                }
            }
        }
        for (const auto& r : day.used_records) {
            ++report.records_checked;
            if (!(r.published_date < d)) {
                flag(d, "sentiment_record", r.article_ref, "published " + r.published_date.to_string());
                continue;
            }
            if (stores.article_dates) {
                auto it = stores.article_dates->find(r.article_ref);
                if (it != stores.article_dates->end() && !(it->second < d)) {
                    flag(d, "sentiment_record", r.article_ref,
                         "source article published " + it->second.to_string() + ", record dated " +
                             r.published_date.to_string());
                    continue;
                }
            }
            if (stores.sentiment) {
                const SentimentRecord* s = stores.sentiment->find(r.article_ref);
                if (s && !(s->published_date < d)) {
                    flag(d, "sentiment_record", r.article_ref, "memory dates it " + s->published_date.to_string());
                }
            }
        }
        for (const auto& u : day.macro_used) {
            ++report.macro_checked;
            const std::string item = to_string(u.indicator) + ":" + u.period.to_string();
            if (d < u.release_date) {
                flag(d, "macro_release", item, "released " + u.release_date.to_string());
                continue;
            }
            if (stores.macro) {
                const MacroObservation* obs = stores.macro->find(u.indicator, u.period);
                if (obs == nullptr) {
                    flag(d, "macro_release", item, "observation absent from reference store");
                } else if (d < obs->release_date) {
                    flag(d, "macro_release", item, "reference store releases it " + obs->release_date.to_string());
                }
            }
        }
        if (day.fomc_used) {
            const std::string item = "FOMC:" + day.fomc_used->meeting_date.to_string();
            if (d < day.fomc_used->release_date) {
                flag(d, "fomc_release", item, "released " + day.fomc_used->release_date.to_string());
            } else if (stores.fomc) {
                const FomcSummary* s = stores.fomc->find_meeting(day.fomc_used->meeting_date);
                if (s && d < s->release_date) {
                    flag(d, "fomc_release", item, "reference store releases it " + s->release_date.to_string());
                }
            }
        }
    }
    return report;
}

// ---- run directory ----

void write_run_directory(const BacktestResult& result, const AuditReport& audit, const json& resolved_config,
                         const json& usage, const fs::path& dir) {
    if (fs::exists(dir) && !fs::exists(dir / "manifest.json")) {
        throw IoError("refusing to replace " + dir.string() + ": not a run directory");
    }
    fs::path tmp = dir;
    tmp += ".partial";
    std::error_code ec;
    fs::remove_all(tmp, ec);
    const Strategy s = result.config.strategy;

    write_file(tmp / "config.resolved", resolved_config.dump(2) + "\n");
    std::string days_jsonl;
    for (const auto& d : result.days) {
        const std::string stem = day_stem(d.date, s);
        write_file(tmp / "prompts" / (stem + ".txt"), d.prompt);
        write_file(tmp / "reflections" / (stem + ".txt"), d.reflection);
        write_file(tmp / "decisions" / (stem + ".json"), decisions_to_json(d.decisions, s).dump(2) + "\n");
        write_file(tmp / "states" / (d.date.to_string() + ".json"), d.state.dump(2) + "\n");
        days_jsonl += day_json(d).dump() + "\n";
    }
    write_file(tmp / "days.jsonl", days_jsonl);

    std::string fills = std::string(kFillCsvHeader) + "\n";
    for (const auto& f : result.fills) fills += fill_csv_row(f) + "\n";
    write_file(tmp / "fills.csv", fills);
    std::string skips = "date,ticker,action,reason\n";
    for (const auto& k : result.skips) skips += skip_csv_row(k) + "\n";
    write_file(tmp / "skips.csv", skips);

    emit_report(result.metrics, result.equity_curve, ReportFormat::Json, tmp);
    emit_report(result.metrics, result.equity_curve, ReportFormat::Csv, tmp);
    emit_report(result.metrics, result.equity_curve, ReportFormat::MarkdownTable, tmp);
    write_file(tmp / "audit.json", audit.to_json().dump(2) + "\n");
    write_file(tmp / "usage.json", usage.dump(2) + "\n");
    write_file(tmp / "manifest.json", result.manifest.dump(2) + "\n");

    if (fs::exists(dir)) fs::remove_all(dir);
    fs::rename(tmp, dir);
}

std::vector<DayLog> load_day_logs(const fs::path& dir, Strategy strategy) {
    std::vector<DayLog> out;
    const fs::path days_path = dir / "days.jsonl";
    std::istringstream in(read_file(days_path));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        try {
            const json j = json::parse(line);
            DayLog d;
            d.date = Date::parse(j.at("date").get<std::string>());
            d.status = j.at("status").get<std::string>() == "hold" ? DayStatus::Hold : DayStatus::Traded;
            d.failure = j.value("failure", "");
            const fs::path prompt = dir / "prompts" / (day_stem(d.date, strategy) + ".txt");
            if (fs::exists(prompt)) d.prompt = read_file(prompt);
            for (const auto& r : j.at("used_records")) {
                SentimentRecord rec;
                rec.published_date = Date::parse(r.at("published_date").get<std::string>());
                rec.ticker = r.at("ticker").get<std::string>();
                rec.article_ref = r.at("article_ref").get<std::string>();
                d.used_records.push_back(std::move(rec));
            }
            for (const auto& u : j.at("macro_used")) {
                d.macro_used.push_back({parse_indicator(u.at("indicator").get<std::string>()),
                                        YearMonth::parse(u.at("period").get<std::string>()),
                                        Date::parse(u.at("release_date").get<std::string>())});
            }
            if (const auto& f = j.at("fomc_used"); !f.is_null()) {
                d.fomc_used = FomcSummary{Date::parse(f.at("meeting_date").get<std::string>()),
                                          Date::parse(f.at("release_date").get<std::string>()), ""};
            }
            d.equity = Money::parse(j.at("equity").get<std::string>());
            out.push_back(std::move(d));
        } catch (const json::exception& e) {
            throw ParseError(days_path.string(), n, e.what());
        }
    }
    return out;
}

std::vector<std::string> missing_run_artifacts(const fs::path& dir) {
    static const char* kRequired[] = {"config.resolved", "prompts",      "reflections", "decisions", "days.jsonl",
                                      "fills.csv",       "equity.csv",   "metrics.json", "audit.json",
                                      "manifest.json"};
    std::vector<std::string> missing;
    for (const char* name : kRequired) {
        if (!fs::exists(dir / name)) missing.emplace_back(name);
    }
    return missing;
}

}  // namespace macroalloc
