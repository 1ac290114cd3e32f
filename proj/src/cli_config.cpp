#include "macroalloc/cli_config.hpp"

#include <cstdlib>
#include <fstream>

#include <spdlog/spdlog.h>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/text.hpp"

namespace macroalloc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw ConfigError(std::string("'") + key + "' must be a path string");
    fs::path p = it->get<std::string>();
    if (p.empty()) return {};
    return (p.is_absolute() ? p : base / p).lexically_normal();
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("'") + key + "' has the wrong type");
    }
}

std::int64_t get_bps(const json& j, const char* key, std::int64_t fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer basis-point rate");
    return it->get<std::int64_t>();
}

Date get_date(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw ConfigError(std::string("missing date '") + key + "'");
    Date d;
    if (!Date::try_parse(it->get<std::string>(), d)) {
        throw ConfigError(std::string("'") + key + "' is not a YYYY-MM-DD date");
    }
    return d;
}

std::ifstream open_or_throw(const fs::path& p, const char* what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError(std::string("cannot open ") + what + " file " + p.string());
    return in;
}

template <class Row>
std::vector<Row> strict_rows(IngestReport<Row> report, const fs::path& p) {
    if (!report.rejected.empty()) {
        const auto& r = report.rejected.front();
        throw ParseError(p.string(), r.line, r.reason + " (" + std::to_string(report.rejected.size()) +
                                                  " rejected rows; run ingest for the full list)");
    }
    return std::move(report.rows);
}

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
}

std::string path_string(const fs::path& p) { return p.empty() ? std::string() : p.string(); }

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    BacktestConfig& b = c.backtest;
    b.start = get_date(j, "start");
    b.end = get_date(j, "end");
    b.strategy = parse_strategy(get_or<std::string>(j, "strategy", "top_down"));
    if (auto it = j.find("initial_capital"); it != j.end()) {
        try {
            b.initial_capital = it->is_string() ? Money::parse(it->get<std::string>())
                                                : Money::usd(it->get<std::int64_t>());
        } catch (const std::exception&) {
            throw ConfigError("'initial_capital' must be a decimal string or whole dollars");
        }
    }
    b.commission_bps = get_bps(j, "commission_bps", b.commission_bps);
    b.impact_bps = get_bps(j, "impact_bps", b.impact_bps);
    b.max_utilization = get_or<double>(j, "max_utilization", b.max_utilization);
    b.risk_free_rate = get_or<double>(j, "risk_free_rate", b.risk_free_rate);
    b.annualization_days = get_or<int>(j, "annualization_days", b.annualization_days);
    b.top_down_size_cap_pct = get_or<double>(j, "top_down_size_cap_pct", b.top_down_size_cap_pct);
    b.max_sentiment_rows = get_or<std::size_t>(j, "max_sentiment_rows", b.max_sentiment_rows);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);

    const json data = j.value("data", json::object());
    c.data.bars = resolve(base_dir, data, "bars");
    c.data.universe = resolve(base_dir, data, "universe");
    c.data.macro = resolve(base_dir, data, "macro");
    c.data.fomc_index = resolve(base_dir, data, "fomc_index");
    c.data.fomc_summaries = resolve(base_dir, data, "fomc_summaries");
    c.data.news = resolve(base_dir, data, "news");
    c.data.sentiment_memory = resolve(base_dir, data, "sentiment_memory");
    c.data.sectors = resolve(base_dir, data, "sectors");
    c.data.aliases = resolve(base_dir, data, "aliases");
    c.data.cache_dir = resolve(base_dir, data, "cache_dir");

    const json gw = j.value("gateway", json::object());
    try {
        c.gateway.mode = parse_cassette_mode(get_or<std::string>(gw, "mode", "replay"));
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    c.gateway.cassette = resolve(base_dir, gw, "cassette");
    c.gateway.endpoint = get_or<std::string>(gw, "endpoint", "");
    c.gateway.sentiment_model = get_or<std::string>(gw, "sentiment_model", c.gateway.sentiment_model);
    c.gateway.summary_model = get_or<std::string>(gw, "summary_model", c.gateway.summary_model);
    b.ranking_model = get_or<std::string>(gw, "ranking_model", b.ranking_model);
    b.decision_model = get_or<std::string>(gw, "decision_model", b.decision_model);
    b.ranking_max_tokens = get_or<int>(gw, "ranking_max_tokens", b.ranking_max_tokens);
    b.decision_max_tokens = get_or<int>(gw, "decision_max_tokens", b.decision_max_tokens);
    c.gateway.max_in_flight = get_or<int>(gw, "max_in_flight", c.gateway.max_in_flight);
    c.gateway.max_retries = get_or<int>(gw, "max_retries", c.gateway.max_retries);
    c.gateway.timeout_ms = get_or<int>(gw, "timeout_ms", c.gateway.timeout_ms);
    if (auto e = env_or_empty("LLM_ENDPOINT"); !e.empty()) c.gateway.endpoint = e;
    c.gateway.api_key = env_or_empty("LLM_API_KEY");
    if (c.gateway.max_in_flight < 1) throw ConfigError("'max_in_flight' must be at least 1");
    if (c.gateway.mode != CassetteMode::Live && c.gateway.cassette.empty()) {
        throw ConfigError("gateway.cassette is required in record and replay modes");
    }

    c.output_dir = resolve(base_dir, j, "output_dir");
    b.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    RunConfig c = parse_run_config(j, fs::absolute(path).parent_path());
    c.source = fs::absolute(path);
    return c;
}

json RunConfig::resolved() const {
    json j = backtest.to_json();
    j["seed"] = seed;
    j["data"] = {{"bars", path_string(data.bars)},
                 {"universe", path_string(data.universe)},
                 {"macro", path_string(data.macro)},
                 {"fomc_index", path_string(data.fomc_index)},
                 {"fomc_summaries", path_string(data.fomc_summaries)},
                 {"news", path_string(data.news)},
                 {"sentiment_memory", path_string(data.sentiment_memory)},
                 {"sectors", path_string(data.sectors)},
                 {"aliases", path_string(data.aliases)},
                 {"cache_dir", path_string(data.cache_dir)}};
    j["gateway"] = {{"mode", to_string(gateway.mode)},
                    {"cassette", path_string(gateway.cassette)},
                    {"endpoint", gateway.endpoint},
                    {"sentiment_model", gateway.sentiment_model},
                    {"summary_model", gateway.summary_model},
                    {"max_in_flight", gateway.max_in_flight},
                    {"max_retries", gateway.max_retries},
                    {"timeout_ms", gateway.timeout_ms}};
    j["output_dir"] = path_string(output_dir);
    return j;
}

LoadedStores load_stores(const RunConfig& c) {
    LoadedStores s;
    if (c.data.bars.empty() || c.data.universe.empty()) throw ConfigError("data.bars and data.universe are required");
    {
        auto bars = open_or_throw(c.data.bars, "bars");
        auto uni = open_or_throw(c.data.universe, "universe");
        s.market = load_market_data(bars, uni, c.data.bars.string(), c.data.universe.string());
    }
    if (!c.data.macro.empty()) {
        auto in = open_or_throw(c.data.macro, "macro");
        s.macro = MacroStore::build(strict_rows(read_macro_csv(in, c.data.macro.string()), c.data.macro));
    }
    if (!c.data.fomc_summaries.empty()) {
        if (!fs::exists(c.data.fomc_summaries)) throw IoError("missing FOMC summaries " + c.data.fomc_summaries.string());
        s.fomc = FomcStore::build(load_fomc_summaries(c.data.fomc_summaries));
    }
    if (!c.data.sentiment_memory.empty()) s.sentiment = SentimentMemory::load(c.data.sentiment_memory);
    if (!c.data.sectors.empty()) {
        auto in = open_or_throw(c.data.sectors, "sectors");
        s.sectors = SectorMap::load_csv(in, c.data.sectors.string());
    }
    if (!c.data.aliases.empty()) {
        auto in = open_or_throw(c.data.aliases, "aliases");
        s.aliases = AliasTable::load_csv(in, c.data.aliases.string());
    }
    if (!c.data.news.empty() && fs::exists(c.data.news)) {
        auto in = open_or_throw(c.data.news, "news");
        s.news = strict_rows(read_news_jsonl(in, c.data.news.string()), c.data.news);
    }
    return s;
}

std::shared_ptr<RecordReplayGateway> make_gateway(const RunConfig& c) {
    std::shared_ptr<Cassette> cassette;
    if (c.gateway.mode == CassetteMode::Replay) {
        if (!fs::exists(c.gateway.cassette)) {
            throw GatewayError("cassette " + c.gateway.cassette.string() + " not found (replay mode)");
        }
        cassette = Cassette::load(c.gateway.cassette);
    } else if (c.gateway.mode == CassetteMode::Record) {
        cassette = fs::exists(c.gateway.cassette) ? Cassette::load(c.gateway.cassette)
                                                  : std::make_shared<Cassette>(c.gateway.cassette);
    } else {
        cassette = std::make_shared<Cassette>();
    }

    std::shared_ptr<LlmGateway> live;
    if (c.gateway.mode != CassetteMode::Replay) {
        if (c.gateway.endpoint.empty()) throw ConfigError("record and live modes need gateway.endpoint or LLM_ENDPOINT");
        LiveConfig lc;
        lc.endpoint = c.gateway.endpoint;
        lc.api_key = c.gateway.api_key;
        lc.timeout = std::chrono::milliseconds(c.gateway.timeout_ms);
        lc.max_in_flight = c.gateway.max_in_flight;
        lc.retry.max_retries = c.gateway.max_retries;
        lc.retry.seed = c.seed;
        live = std::make_shared<OpenAiCompatibleClient>(lc, make_http_transport());
    }
    return std::make_shared<RecordReplayGateway>(c.gateway.mode, std::move(cassette), std::move(live));
}

json gateway_usage(const RecordReplayGateway& g) {
    return json{{"mode", to_string(g.mode())},
                {"live_calls", g.live_calls()},
                {"replayed", g.replayed()},
                {"input_tokens", g.input_tokens()},
                {"output_tokens", g.output_tokens()}};
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
    if (dynamic_cast<const GatewayError*>(&e)) return kExitGateway;
    if (dynamic_cast<const Error*>(&e)) return kExitData;
    return kExitData;
}

}  // namespace macroalloc
