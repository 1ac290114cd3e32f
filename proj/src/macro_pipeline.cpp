#include "macroalloc/macro_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "macroalloc/core/error.hpp"
#include "macroalloc/core/hash.hpp"
#include "macroalloc/core/text.hpp"
#include "macroalloc/prompt_templates.hpp"

namespace macroalloc {

using nlohmann::json;

std::string to_string(Indicator i) {
    switch (i) {
        case Indicator::CPI: return "CPI";
        case Indicator::PPI: return "PPI";
        case Indicator::PCE: return "PCE";
        case Indicator::NFP: return "NFP";
        case Indicator::PMI: return "PMI";
    }
    return "?";
}

Indicator parse_indicator(std::string_view s) {
    const auto v = to_upper(trim(s));
    for (auto i : kIndicators) {
        if (to_string(i) == v) return i;
    }
    throw ParseError("unknown indicator '" + std::string(s) + "'");
}

void validate_observation(const MacroObservation& obs) {
    if (!std::isfinite(obs.value)) {
        throw ValidationError(to_string(obs.indicator) + " " + obs.reference_period.to_string() +
                              ": non-finite value");
    }
    if (obs.indicator != Indicator::PMI && obs.release_date < obs.reference_period.last_day()) {
        throw ValidationError(to_string(obs.indicator) + " " + obs.reference_period.to_string() +
                              ": released " + obs.release_date.to_string() +
                              " before the reference month ended");
    }
}

// ---- MacroStore ----

MacroStore MacroStore::build(std::vector<MacroObservation> observations) {
    MacroStore store;
    for (auto& obs : observations) {
        validate_observation(obs);
        store.series_[obs.indicator].push_back(obs);
    }
    for (auto& [ind, s] : store.series_) {
        std::sort(s.begin(), s.end(), [](const MacroObservation& a, const MacroObservation& b) {
            return a.reference_period < b.reference_period;
        });
        for (std::size_t k = 1; k < s.size(); ++k) {
            if (s[k].reference_period == s[k - 1].reference_period) {
                throw ValidationError("duplicate " + to_string(ind) + " observation for " +
                                      s[k].reference_period.to_string());
            }
        }
    }
    return store;
}

std::span<const MacroObservation> MacroStore::series(Indicator i) const {
    auto it = series_.find(i);
    if (it == series_.end()) return {};
    return it->second;
}

const MacroObservation* MacroStore::find(Indicator i, YearMonth period) const {
    for (const auto& obs : series(i)) {
        if (obs.reference_period == period) return &obs;
    }
    return nullptr;
}

std::vector<MacroObservation> MacroStore::all() const {
    std::vector<MacroObservation> out;
    for (const auto& [_, s] : series_) out.insert(out.end(), s.begin(), s.end());
    return out;
}

std::string MacroStore::content_hash() const {
    Sha256 h;
    char buf[40];
    for (const auto& obs : all()) {
        std::snprintf(buf, sizeof buf, "%.17g", obs.value);
        h.field(to_string(obs.indicator)).field(obs.reference_period.to_string())
            .field(obs.release_date.to_string()).field(buf);
    }
    return h.hex();
}

IngestReport<MacroObservation> read_macro_csv(std::istream& in, const std::string& source) {
    IngestReport<MacroObservation> report;
    CsvReader reader(in, source, {"indicator", "reference_period", "release_date", "value"});
    std::set<std::pair<Indicator, int>> seen;
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
            MacroObservation obs;
            obs.indicator = parse_indicator(f[0]);
            obs.reference_period = YearMonth::parse(f[1]);
            obs.release_date = Date::parse(f[2]);
            std::size_t used = 0;
            try {
                obs.value = std::stod(f[3], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != f[3].size()) throw ParseError("invalid value '" + f[3] + "'");
            validate_observation(obs);
            if (!seen.emplace(obs.indicator, obs.reference_period.index()).second) {
                throw ValidationError("duplicate " + to_string(obs.indicator) + " observation for " +
                                      obs.reference_period.to_string());
            }
            report.rows.push_back(obs);
        } catch (const Error& e) {
            report.rejected.push_back({row->line, e.what()});
        }
    }
    return report;
}

// ---- trends ----

TrendReading compute_trend(std::span<const MacroObservation> series, Date as_of) {
    const MacroObservation* latest = nullptr;
    const MacroObservation* previous = nullptr;
    for (const auto& obs : series) {
        if (obs.release_date > as_of) continue;
        if (latest == nullptr || obs.reference_period > latest->reference_period) {
            previous = latest;
            latest = &obs;
        } else if (previous == nullptr || obs.reference_period > previous->reference_period) {
            previous = &obs;
        }
    }
    if (latest == nullptr || previous == nullptr) {
        throw InsufficientDataError("fewer than two observations released by " + as_of.to_string());
    }
    if (previous->value == 0.0) {
        throw InsufficientDataError("previous observation is zero; change undefined");
    }
    TrendReading r;
    r.pct = 100.0 * (latest->value - previous->value) / previous->value;
    r.latest_period = latest->reference_period;
    r.previous_period = previous->reference_period;
    r.latest_release = latest->release_date;
    r.previous_release = previous->release_date;
    return r;
}

double mom_pct_change(std::span<const MacroObservation> series, Date as_of) {
    return compute_trend(series, as_of).pct;
}

std::string format_trend(double pct) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", pct);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    if (s.front() != '-') s.insert(s.begin(), '+');
    return s + "%";
}

// ---- FOMC store ----

FomcStore FomcStore::build(std::vector<FomcSummary> summaries) {
    for (const auto& s : summaries) {
        if (s.release_date < s.meeting_date) {
            throw ValidationError("FOMC minutes for " + s.meeting_date.to_string() +
                                  " released before the meeting");
        }
        if (trim(s.text).empty()) {
            throw ValidationError("empty FOMC summary for " + s.meeting_date.to_string());
        }
    }
    std::sort(summaries.begin(), summaries.end(), [](const FomcSummary& a, const FomcSummary& b) {
        return std::tie(a.release_date, a.meeting_date) < std::tie(b.release_date, b.meeting_date);
    });
    for (std::size_t k = 1; k < summaries.size(); ++k) {
        if (summaries[k].meeting_date == summaries[k - 1].meeting_date) {
            throw ValidationError("duplicate FOMC summary for " + summaries[k].meeting_date.to_string());
        }
    }
    FomcStore store;
    store.summaries_ = std::move(summaries);
    return store;
}

const FomcSummary* FomcStore::latest_released(Date as_of) const {
    const FomcSummary* best = nullptr;
    for (const auto& s : summaries_) {
        if (s.release_date <= as_of) best = &s;
    }
    return best;
}

const FomcSummary* FomcStore::find_meeting(Date meeting) const {
    for (const auto& s : summaries_) {
        if (s.meeting_date == meeting) return &s;
    }
    return nullptr;
}

std::string FomcStore::content_hash() const {
    Sha256 h;
    for (const auto& s : summaries_) {
        h.field(s.meeting_date.to_string()).field(s.release_date.to_string()).field(s.text);
    }
    return h.hex();
}

// ---- snapshot ----

json MacroSnapshot::to_json() const {
    json trends_j = json::object();
    for (const auto& [ind, r] : trends) {
        trends_j[to_string(ind)] = {{"pct", r.pct},
                                    {"latest_period", r.latest_period.to_string()},
                                    {"previous_period", r.previous_period.to_string()},
                                    {"latest_release", r.latest_release.to_string()},
                                    {"previous_release", r.previous_release.to_string()}};
    }
    json missing_j = json::object();
    for (const auto& [ind, why] : missing) missing_j[to_string(ind)] = why;
    json j{{"as_of", as_of.to_string()}, {"trends", trends_j}, {"missing", missing_j}};
    if (fomc) {
        j["fomc"] = {{"meeting_date", fomc->meeting_date.to_string()},
                     {"release_date", fomc->release_date.to_string()},
                     {"text", fomc->text}};
    } else {
        j["fomc"] = nullptr;
    }
    return j;
}

std::string MacroSnapshot::serialize() const {
    return to_json().dump(-1, ' ', false, json::error_handler_t::replace);
}

MacroSnapshot build_snapshot(const MacroStore& series, const FomcStore& fomc, Date as_of) {
    MacroSnapshot snap;
    snap.as_of = as_of;
    for (auto ind : kIndicators) {
        try {
            snap.trends.emplace(ind, compute_trend(series.series(ind), as_of));
        } catch (const InsufficientDataError& e) {
            snap.missing.emplace(ind, e.what());
        }
    }
    if (const auto* s = fomc.latest_released(as_of)) snap.fomc = *s;
    return snap;
}

// ---- FOMC minutes ----

IngestReport<FomcIndexEntry> read_fomc_index(std::istream& in, const std::string& source,
                                             const std::filesystem::path& base_dir) {
    IngestReport<FomcIndexEntry> report;
    CsvReader reader(in, source, {"meeting_date", "release_date", "path"});
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
            FomcIndexEntry e;
            e.meeting_date = Date::parse(f[0]);
            e.release_date = Date::parse(f[1]);
            if (e.release_date < e.meeting_date) {
                throw ValidationError("minutes released before meeting " + f[0]);
            }
            std::filesystem::path p(f[2]);
            e.path = p.is_absolute() ? p : base_dir / p;
            if (!std::filesystem::exists(e.path)) throw IoError("missing minutes file " + e.path.string());
            report.rows.push_back(std::move(e));
        } catch (const Error& e) {
            report.rejected.push_back({row->line, e.what()});
        }
    }
    return report;
}

std::string render_fomc_prompt(std::string_view minutes_text) {
    std::string prompt(templates::kFomcSummary);
    const auto pos = prompt.find("{text}");
    prompt.replace(pos, 6, minutes_text);
    return prompt;
}

FomcSummary summarize_fomc(std::string_view minutes_text, Date meeting_date, Date release_date,
                           LlmGateway& gateway, const std::string& model_id, int max_output_tokens) {
    if (trim(minutes_text).empty()) throw ValidationError("empty FOMC minutes text");
    if (release_date < meeting_date) throw ValidationError("minutes release precedes meeting");
    auto req = make_request(render_fomc_prompt(minutes_text), model_id, max_output_tokens,
                            "fomc:" + meeting_date.to_string());
    ChatResponse resp = gateway.complete(req);
    if (trim(resp.text).empty()) {
        throw EmptyResponseError("empty FOMC summary for meeting " + meeting_date.to_string());
    }
    return FomcSummary{meeting_date, release_date, resp.text};
}

std::vector<FomcSummary> load_fomc_summaries(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open FOMC summaries " + path.string());
    std::vector<FomcSummary> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        try {
            if (j.is_discarded()) throw ParseError("not JSON");
            out.push_back(FomcSummary{Date::parse(j.at("meeting_date").get<std::string>()),
                                      Date::parse(j.at("release_date").get<std::string>()),
                                      j.at("text").get<std::string>()});
        } catch (const std::exception& e) {
            throw ParseError(path.string(), n, std::string("malformed FOMC summary: ") + e.what());
        }
    }
    return out;
}

void save_fomc_summaries(const std::filesystem::path& path, const std::vector<FomcSummary>& summaries) {
    std::string out;
    for (const auto& s : summaries) {
        json j{{"meeting_date", s.meeting_date.to_string()},
               {"release_date", s.release_date.to_string()},
               {"text", s.text}};
        out += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
    }
    write_file(path, out);
}

FomcSummarizer::FomcSummarizer(LlmGateway& gateway, std::string model_id, std::filesystem::path cache_dir,
                               int max_output_tokens)
    : gateway_(gateway),
      model_id_(std::move(model_id)),
      cache_dir_(std::move(cache_dir)),
      max_output_tokens_(max_output_tokens) {}

FomcSummary FomcSummarizer::summarize(const FomcIndexEntry& entry) {
    const std::string minutes = read_file(entry.path);
    const std::string key = Sha256{}.field(model_id_).field(render_fomc_prompt(minutes)).hex();
    const auto cached = cache_dir_ / (key + ".txt");
    if (std::filesystem::exists(cached)) {
        ++hits_;
        return FomcSummary{entry.meeting_date, entry.release_date, read_file(cached)};
    }
    ++calls_;
    FomcSummary s = summarize_fomc(minutes, entry.meeting_date, entry.release_date, gateway_, model_id_,
                                   max_output_tokens_);
    write_file(cached, s.text);
    spdlog::info("summarized FOMC minutes {}", entry.meeting_date.to_string());
    return s;
}

}  // namespace macroalloc
