// Operator entry point: ingest, cached analysis passes, backtest, compare, audit.
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "macroalloc/backtest_engine.hpp"
#include "macroalloc/cli_config.hpp"
#include "macroalloc/core/error.hpp"
#include "macroalloc/core/hash.hpp"
#include "macroalloc/core/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace macroalloc;

namespace {

std::ifstream open_input(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    return in;
}

template <class Row>
int report(const IngestReport<Row>& r, const fs::path& src) {
    std::printf("%s: %zu accepted, %zu rejected\n", src.string().c_str(), r.rows.size(), r.rejected.size());
    for (const auto& x : r.rejected) std::printf("  line %zu: %s\n", x.line, x.reason.c_str());
    return r.rejected.empty() ? kExitOk : kExitData;
}

std::string double_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int cmd_ingest(const std::string& kind, const fs::path& input, const fs::path& out_dir) {
    auto in = open_input(input);
    const std::string src = input.string();
    std::string canonical;
    int code = kExitOk;
    if (kind == "bars") {
        auto r = read_bars_csv(in, src);
        code = report(r, input);
        canonical = "ticker,date,open,high,low,close,volume\n";
        for (const auto& b : r.rows) {
            canonical += b.ticker + "," + b.date.to_string() + "," + b.open.to_string() + "," + b.high.to_string() +
                         "," + b.low.to_string() + "," + b.close.to_string() + "," + std::to_string(b.volume) + "\n";
        }
    } else if (kind == "universe") {
        auto r = read_universe_csv(in, src);
        code = report(r, input);
        canonical = "effective_date,action,ticker\n";
        for (const auto& u : r.rows) {
            canonical += u.effective_date.to_string() + "," + to_string(u.action) + "," + u.ticker + "\n";
        }
    } else if (kind == "macro") {
        auto r = read_macro_csv(in, src);
        code = report(r, input);
        canonical = "indicator,reference_period,release_date,value\n";
        for (const auto& m : r.rows) {
            canonical += to_string(m.indicator) + "," + m.reference_period.to_string() + "," +
                         m.release_date.to_string() + "," + double_text(m.value) + "\n";
        }
    } else if (kind == "fomc") {
        auto r = read_fomc_index(in, src, fs::absolute(input).parent_path());
        code = report(r, input);
        canonical = "meeting_date,release_date,path\n";
        for (const auto& f : r.rows) {
            canonical += f.meeting_date.to_string() + "," + f.release_date.to_string() + "," +
                         csv_escape(f.path.string()) + "\n";
        }
    } else if (kind == "news") {
        auto r = read_news_jsonl(in, src);
        code = report(r, input);
        for (const auto& a : r.rows) {
            canonical += json{{"published_date", a.published_date.to_string()},
                              {"title", a.title},
                              {"description", a.description},
                              {"content", a.content},
                              {"source_id", a.source_id}}
                             .dump(-1, ' ', false, json::error_handler_t::replace) +
                         "\n";
        }
    } else {
        throw ConfigError("unknown ingest kind '" + kind + "' (bars, universe, macro, fomc, news)");
    }
    if (!out_dir.empty()) {
        const fs::path target = out_dir / (kind + (kind == "news" ? ".jsonl" : ".csv"));
        write_file(target, canonical);
        std::printf("wrote %s\n", target.string().c_str());
    }
    return code;
}

int cmd_analyze_sentiment(const RunConfig& cfg) {
    if (cfg.data.news.empty() || cfg.data.sentiment_memory.empty()) {
        throw ConfigError("analyze-sentiment needs data.news and data.sentiment_memory");
    }
    auto in = open_input(cfg.data.news);
    auto ingest = read_news_jsonl(in, cfg.data.news.string());
    if (!ingest.rejected.empty()) return report(ingest, cfg.data.news);
    auto gateway = make_gateway(cfg);
    SentimentMemory memory;
    const fs::path cache = (cfg.data.cache_dir.empty() ? cfg.data.sentiment_memory.parent_path() : cfg.data.cache_dir) /
                           "sentiment_cache.jsonl";
    SentimentBatchAnalyzer analyzer(*gateway, cfg.gateway.sentiment_model, cache, cfg.gateway.max_in_flight);
    const auto stats = analyzer.run(ingest.rows, memory);
    memory.save(cfg.data.sentiment_memory);
    const json usage = gateway_usage(*gateway);
    std::printf("articles %zu, cached %zu, analyzed %zu, stored %zu, no_entity %zu, rejected %zu\n", stats.articles,
                stats.cached, stats.analyzed, stats.stored, stats.no_entity, stats.rejected);
    std::printf("gateway: %s\n", usage.dump().c_str());
    return kExitOk;
}

int cmd_summarize_fomc(const RunConfig& cfg) {
    if (cfg.data.fomc_index.empty() || cfg.data.fomc_summaries.empty()) {
        throw ConfigError("summarize-fomc needs data.fomc_index and data.fomc_summaries");
    }
    auto in = open_input(cfg.data.fomc_index);
    auto index = read_fomc_index(in, cfg.data.fomc_index.string(), cfg.data.fomc_index.parent_path());
    if (!index.rejected.empty()) return report(index, cfg.data.fomc_index);
    auto gateway = make_gateway(cfg);
    const fs::path cache = (cfg.data.cache_dir.empty() ? cfg.data.fomc_summaries.parent_path() : cfg.data.cache_dir) /
                           "fomc_cache";
    FomcSummarizer summarizer(*gateway, cfg.gateway.summary_model, cache);
    std::vector<FomcSummary> out;
    for (const auto& entry : index.rows) out.push_back(summarizer.summarize(entry));
    save_fomc_summaries(cfg.data.fomc_summaries, out);
    std::printf("summaries %zu (cache hits %d, gateway calls %d)\n", out.size(), summarizer.cache_hits(),
                summarizer.gateway_calls());
    return kExitOk;
}

AuditStores audit_stores(const LoadedStores& s, const std::map<std::string, Date>& dates) {
    AuditStores a;
    a.macro = &s.macro;
    a.fomc = &s.fomc;
    a.sentiment = &s.sentiment;
    if (!s.news.empty()) a.article_dates = &dates;
    return a;
}

int cmd_backtest(RunConfig cfg, const fs::path& out_override) {
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (cfg.output_dir.empty()) throw ConfigError("no output directory (output_dir or --out)");
    // Everything that can fail before day 1 happens before the run directory exists.
    const LoadedStores stores = load_stores(cfg);
    auto gateway = make_gateway(cfg);
    const BacktestInputs inputs{stores.market, stores.macro, stores.fomc, stores.sentiment,
                                stores.aliases, stores.sectors, *gateway};
    BacktestResult result = run_backtest(cfg.backtest, inputs);
    result.manifest["inputs"]["cassette"] = gateway->cassette().content_hash();
    result.manifest["seed"] = cfg.seed;
    const auto dates = article_dates(stores.news);
    const AuditReport audit = look_ahead_audit(result.days, cfg.backtest.strategy, audit_stores(stores, dates));
    write_run_directory(result, audit, cfg.resolved(), gateway_usage(*gateway), cfg.output_dir);

    std::printf("%s", markdown_table({result.metrics}).c_str());
    std::printf("run directory: %s\n", cfg.output_dir.string().c_str());
    std::printf("audit: %zu violation(s)\n", audit.violations.size());
    return audit.clean() ? kExitOk : kExitAudit;
}

MetricSet load_metrics(const fs::path& run) {
    const auto missing = missing_run_artifacts(run);
    if (!missing.empty()) throw IoError("run directory " + run.string() + " is missing " + missing.front());
    try {
        return metrics_from_json(json::parse(read_file(run / "metrics.json")));
    } catch (const json::exception& e) {
        throw ParseError((run / "metrics.json").string(), 0, e.what());
    }
}

int cmd_compare(const fs::path& a, const fs::path& b, const fs::path& out) {
    const MetricSet ma = load_metrics(a);
    const MetricSet mb = load_metrics(b);
    const std::string table = markdown_table({ma, mb}) + "\n" + comparison_markdown(ma, mb);
    std::printf("%s", table.c_str());
    if (!out.empty()) {
        write_file(out / "comparison.md", table);
        write_file(out / "comparison.json", comparison_json(ma, mb).dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_audit(const RunConfig& cfg, const fs::path& run) {
    const auto missing = missing_run_artifacts(run);
    if (!missing.empty()) throw IoError("run directory " + run.string() + " is missing " + missing.front());
    const LoadedStores stores = load_stores(cfg);
    const auto dates = article_dates(stores.news);
    const auto days = load_day_logs(run, cfg.backtest.strategy);
    const AuditReport audit = look_ahead_audit(days, cfg.backtest.strategy, audit_stores(stores, dates));
    std::printf("%s\n", audit.to_json().dump(2).c_str());
    return audit.clean() ? kExitOk : kExitAudit;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"macroalloc: macro-aware LLM allocation backtester"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_dir;
    std::string log_level = "warn";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

    auto* ingest = app.add_subcommand("ingest", "Validate one input file and write its canonical form");
    std::string kind, input;
    ingest->add_option("--kind", kind, "bars, universe, macro, fomc or news")->required();
    ingest->add_option("--input", input, "file to ingest")->required();
    ingest->add_option("--out", out_dir, "directory for the canonical store");

    auto* sentiment = app.add_subcommand("analyze-sentiment", "Cached batch sentiment analysis of the news store");
    sentiment->add_option("--config", config_path)->required();

    auto* fomc = app.add_subcommand("summarize-fomc", "Cached FOMC minutes summarization");
    fomc->add_option("--config", config_path)->required();

    auto* backtest = app.add_subcommand("backtest", "Run the daily loop and write a run directory");
    backtest->add_option("--config", config_path)->required();
    backtest->add_option("--out", out_dir, "run directory (overrides output_dir)");

    auto* compare = app.add_subcommand("compare", "Side-by-side metrics of two run directories");
    std::vector<std::string> runs;
    compare->add_option("runs", runs, "two run directories")->required()->expected(2);
    compare->add_option("--out", out_dir, "directory for comparison.md and comparison.json");

    auto* audit = app.add_subcommand("audit", "Re-run the look-ahead audit over a run directory");
    audit->add_option("--config", config_path)->required();
    std::string run_dir;
    audit->add_option("run", run_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (ingest->parsed()) return cmd_ingest(kind, input, out_dir);
        if (compare->parsed()) return cmd_compare(runs.at(0), runs.at(1), out_dir);
        const RunConfig cfg = load_run_config(config_path);
        if (sentiment->parsed()) return cmd_analyze_sentiment(cfg);
        if (fomc->parsed()) return cmd_summarize_fomc(cfg);
        if (backtest->parsed()) return cmd_backtest(cfg, out_dir);
        if (audit->parsed()) return cmd_audit(cfg, run_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    }
    return kExitUsage;
}
