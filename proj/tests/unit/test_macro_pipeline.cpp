#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "macroalloc/core/error.hpp"
#include "macroalloc/macro_pipeline.hpp"
#include "test_support.hpp"

using namespace macroalloc;

namespace {

MacroObservation obs(Indicator i, const char* period, const char* release, double value) {
    return MacroObservation{i, YearMonth::parse(period), Date::parse(release), value};
}

FomcSummary summary(const char* meeting, const char* release, const char* text) {
    return FomcSummary{Date::parse(meeting), Date::parse(release), text};
}

}  // namespace

TEST(MomPctChange, OnePercentRise) {
    const std::vector<MacroObservation> s{obs(Indicator::CPI, "2018-11", "2018-12-12", 100.0),
                                          obs(Indicator::CPI, "2018-12", "2019-01-11", 101.0)};
    EXPECT_NEAR(mom_pct_change(s, Date::parse("2019-01-11")), 1.0, 1e-12);
    EXPECT_EQ(format_trend(mom_pct_change(s, Date::parse("2019-01-11"))), "+1.00%");
}

TEST(MomPctChange, LatePceFallsBackToPreviousMonths) {
    const std::vector<MacroObservation> s{obs(Indicator::PCE, "2018-10", "2018-11-29", 139.1),
                                          obs(Indicator::PCE, "2018-11", "2018-12-21", 139.3),
                                          obs(Indicator::PCE, "2018-12", "2019-03-01", 139.0)};
    const TrendReading r = compute_trend(s, Date::parse("2019-02-01"));
    EXPECT_EQ(r.latest_period.to_string(), "2018-11");
    EXPECT_EQ(r.previous_period.to_string(), "2018-10");
    EXPECT_NEAR(r.pct, 100.0 * (139.3 - 139.1) / 139.1, 1e-12);
}

TEST(MomPctChange, ConstantSeriesIsZero) {
    const std::vector<MacroObservation> s{obs(Indicator::PPI, "2018-11", "2018-12-11", 250.0),
                                          obs(Indicator::PPI, "2018-12", "2019-01-15", 250.0)};
    EXPECT_EQ(mom_pct_change(s, Date::parse("2019-02-01")), 0.0);
}

TEST(MomPctChange, FewerThanTwoReleasedIsInsufficient) {
    const std::vector<MacroObservation> s{obs(Indicator::PPI, "2018-11", "2018-12-11", 250.0),
                                          obs(Indicator::PPI, "2018-12", "2019-01-15", 251.0)};
    EXPECT_THROW(mom_pct_change(s, Date::parse("2019-01-14")), InsufficientDataError);
    EXPECT_THROW(mom_pct_change({}, Date::parse("2019-01-14")), InsufficientDataError);
}

TEST(MomPctChange, ScaleInvariant) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> value(50.0, 300.0), scale(1e-3, 1e3);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<MacroObservation> s, scaled;
        const double k = scale(rng);
        for (int m = 1; m <= 6; ++m) {
            const double v = value(rng);
            const std::string period = "2018-" + std::string(m < 10 ? "0" : "") + std::to_string(m);
            const Date rel = YearMonth::parse(period).last_day().plus_days(15);
            s.push_back(MacroObservation{Indicator::NFP, YearMonth::parse(period), rel, v});
            scaled.push_back(MacroObservation{Indicator::NFP, YearMonth::parse(period), rel, v * k});
        }
        EXPECT_NEAR(mom_pct_change(s, Date::parse("2018-12-31")), mom_pct_change(scaled, Date::parse("2018-12-31")),
                    1e-9);
    }
}

TEST(FormatTrend, SignedTwoDecimals) {
    EXPECT_EQ(format_trend(0.2), "+0.20%");
    EXPECT_EQ(format_trend(-1.054), "-1.05%");
    EXPECT_EQ(format_trend(0.0), "+0.00%");
}

TEST(MacroStore, RejectsEarlyReleaseAndDuplicates) {
    EXPECT_THROW(MacroStore::build({obs(Indicator::CPI, "2018-12", "2018-12-15", 1.0)}), ValidationError);
    EXPECT_NO_THROW(MacroStore::build({obs(Indicator::PMI, "2018-12", "2018-12-15", 54.0)}));
    EXPECT_THROW(MacroStore::build({obs(Indicator::CPI, "2018-11", "2018-12-12", 1.0),
                                    obs(Indicator::CPI, "2018-11", "2018-12-13", 1.0)}),
                 ValidationError);
}

TEST(ReadMacroCsv, ReportsBadLines) {
    std::istringstream in(
        "indicator,reference_period,release_date,value\n"
        "CPI,2018-11,2018-12-12,252.0\n"
        "GDP,2018-11,2018-12-12,1\n"
        "CPI,2018-12,2019-01-11,nan\n");
    const auto r = read_macro_csv(in, "m.csv");
    EXPECT_EQ(r.rows.size(), 1u);
    ASSERT_EQ(r.rejected.size(), 2u);
    EXPECT_EQ(r.rejected[0].line, 3u);
    EXPECT_EQ(r.rejected[1].line, 4u);
}

TEST(BuildSnapshot, NoFomcBeforeFirstRelease) {
    const FomcStore f = FomcStore::build({summary("2018-12-19", "2019-01-09", "S1")});
    const MacroSnapshot snap = build_snapshot(MacroStore{}, f, Date::parse("2019-01-08"));
    EXPECT_FALSE(snap.fomc.has_value());
    EXPECT_EQ(snap.missing.size(), 5u);
}

TEST(BuildSnapshot, SelectsLatestReleasedFomc) {
    const FomcStore f = FomcStore::build(
        {summary("2019-01-30", "2019-02-20", "S2"), summary("2018-12-19", "2019-01-09", "S1")});
    const MacroSnapshot snap = build_snapshot(MacroStore{}, f, Date::parse("2019-02-19"));
    ASSERT_TRUE(snap.fomc.has_value());
    EXPECT_EQ(snap.fomc->text, "S1");
    EXPECT_EQ(build_snapshot(MacroStore{}, f, Date::parse("2019-02-20")).fomc->text, "S2");
}

TEST(BuildSnapshot, AllFiveIndicatorsPresent) {
    std::vector<MacroObservation> all;
    for (Indicator i : kIndicators) {
        all.push_back(obs(i, "2018-11", "2018-12-20", 100.0));
        all.push_back(obs(i, "2018-12", "2019-01-20", 102.0));
    }
    const MacroSnapshot snap = build_snapshot(MacroStore::build(all), FomcStore{}, Date::parse("2019-01-31"));
    EXPECT_EQ(snap.trends.size(), 5u);
    EXPECT_TRUE(snap.missing.empty());
    for (const auto& [i, r] : snap.trends) EXPECT_NEAR(r.pct, 2.0, 1e-12) << to_string(i);
}

TEST(BuildSnapshot, PointInTimeUnderRandomTruncation) {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> value(50.0, 300.0);
    std::uniform_int_distribution<int> lag(1, 70);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<MacroObservation> all;
        for (Indicator i : kIndicators) {
            for (int m = 1; m <= 12; ++m) {
                const YearMonth p = YearMonth::parse("2018-" + std::string(m < 10 ? "0" : "") + std::to_string(m));
                all.push_back(MacroObservation{i, p, p.last_day().plus_days(lag(rng)), value(rng)});
            }
        }
        std::vector<FomcSummary> minutes;
        for (int k = 0; k < 8; ++k) {
            const Date meet = Date(2018, 1, 20).plus_days(45 * k);
            minutes.push_back(FomcSummary{meet, meet.plus_days(21), "summary " + std::to_string(k)});
        }
        const Date as_of = Date(2018, 3, 1).plus_days(static_cast<int>(rng() % 330));
        std::vector<MacroObservation> kept;
        for (const auto& o : all)
            if (!(as_of < o.release_date)) kept.push_back(o);
        std::vector<FomcSummary> kept_minutes;
        for (const auto& s : minutes)
            if (!(as_of < s.release_date)) kept_minutes.push_back(s);
        const auto full = build_snapshot(MacroStore::build(all), FomcStore::build(minutes), as_of);
        const auto cut = build_snapshot(MacroStore::build(kept), FomcStore::build(kept_minutes), as_of);
        EXPECT_EQ(full.serialize(), cut.serialize()) << as_of.to_string();
    }
}

TEST(BuildSnapshot, DeterministicBytes) {
    std::vector<MacroObservation> all{obs(Indicator::CPI, "2018-11", "2018-12-12", 252.038),
                                      obs(Indicator::CPI, "2018-12", "2019-01-11", 251.233)};
    const FomcStore f = FomcStore::build({summary("2018-12-19", "2019-01-09", "S1")});
    const auto a = build_snapshot(MacroStore::build(all), f, Date::parse("2019-01-14"));
    std::reverse(all.begin(), all.end());
    const auto b = build_snapshot(MacroStore::build(all), f, Date::parse("2019-01-14"));
    EXPECT_EQ(a.serialize(), b.serialize());
    EXPECT_EQ(MacroStore::build(all).content_hash(),
              MacroStore::build({all.rbegin(), all.rend()}).content_hash());
}

TEST(SummarizeFomc, PassesGatewayTextThrough) {
    test::ScriptedGateway g;
    g.set_fallback([](const ChatRequest&) { return std::string("S"); });
    const FomcSummary s =
        summarize_fomc("Minutes M.", Date::parse("2018-12-19"), Date::parse("2019-01-09"), g, "summary-model");
    EXPECT_EQ(s.text, "S");
    EXPECT_EQ(s.meeting_date, Date::parse("2018-12-19"));
    EXPECT_EQ(s.release_date, Date::parse("2019-01-09"));
    const std::string prompt = g.last_request().messages.back().text;
    EXPECT_NE(prompt.find("1. Interest Rate Policy and Outlook"), std::string::npos);
    EXPECT_NE(prompt.find("Minutes M."), std::string::npos);
    EXPECT_EQ(prompt.find("{text}"), std::string::npos);
}

TEST(SummarizeFomc, EmptyInputAndEmptyReply) {
    test::ScriptedGateway g;
    g.set_fallback([](const ChatRequest&) { return std::string("   "); });
    EXPECT_THROW(summarize_fomc("", Date::parse("2018-12-19"), Date::parse("2019-01-09"), g, "m"), ValidationError);
    EXPECT_EQ(g.calls(), 0);
    EXPECT_THROW(summarize_fomc("x", Date::parse("2018-12-19"), Date::parse("2019-01-09"), g, "m"),
                 EmptyResponseError);
}

TEST(FomcSummarizer, CacheAvoidsRepeatCalls) {
    test::TempDir dir("fomc_cache");
    write_file(dir.path() / "fomc_2018-12-19.txt", "The Committee decided to raise the target range.");
    const FomcIndexEntry e{Date::parse("2018-12-19"), Date::parse("2019-01-09"), dir.path() / "fomc_2018-12-19.txt"};
    test::ScriptedGateway g;
    g.set_fallback([](const ChatRequest&) { return std::string("summary"); });
    {
        FomcSummarizer s(g, "m", dir.path() / "cache");
        EXPECT_EQ(s.summarize(e).text, "summary");
        EXPECT_EQ(s.gateway_calls(), 1);
    }
    FomcSummarizer again(g, "m", dir.path() / "cache");
    EXPECT_EQ(again.summarize(e).text, "summary");
    EXPECT_EQ(again.gateway_calls(), 0);
    EXPECT_EQ(again.cache_hits(), 1);
    EXPECT_EQ(g.calls(), 1);
}

TEST(FomcSummaries, RoundTripJsonLines) {
    test::TempDir dir("fomc_rt");
    const std::vector<FomcSummary> in{summary("2018-12-19", "2019-01-09", "line one\nline \"two\"")};
    save_fomc_summaries(dir.path() / "s.jsonl", in);
    const auto out = load_fomc_summaries(dir.path() / "s.jsonl");
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].text, in[0].text);
    EXPECT_EQ(out[0].release_date, in[0].release_date);
}
