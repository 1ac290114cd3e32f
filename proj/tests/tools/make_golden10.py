#!/usr/bin/env python3
"""Writes the 10-day golden fixture inputs (bars, universe, macro, FOMC, news, sentiment, sectors,
aliases, decision script, run config) into tests/fixtures/golden10/.

Deterministic: rerunning produces byte-identical files.
"""
import json
import pathlib
import sys

OUT = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parents[1] / "fixtures" / "golden10"

DAYS = ["2019-01-02", "2019-01-03", "2019-01-04", "2019-01-07", "2019-01-08", "2019-01-09",
        "2019-01-10", "2019-01-11", "2019-01-14", "2019-01-15", "2019-01-16"]

SECTORS = {
    "AAPL": "Information Technology", "MSFT": "Information Technology", "NVDA": "Information Technology",
    "JPM": "Financials", "BAC": "Financials", "FRC": "Financials",
    "XOM": "Energy", "CVX": "Energy", "SLB": "Energy",
    "SCG": "Utilities", "DUK": "Utilities", "SO": "Utilities",
}

BASE_PRICE = {
    "AAPL": "157.92", "MSFT": "101.12", "NVDA": "136.22", "JPM": "99.31", "BAC": "24.96", "FRC": "59.68",
    "XOM": "69.69", "CVX": "110.31", "SLB": "37.08", "SCG": "47.50", "DUK": "86.24", "SO": "43.42",
}


class Lcg:
    def __init__(self, seed):
        self.state = seed

    def next(self):
        self.state = (self.state * 6364136223846793005 + 1442695040888963407) % (1 << 64)
        return self.state >> 33


def bars():
    rows = ["ticker,date,open,high,low,close,volume"]
    rng = Lcg(20190102)
    for ticker in sorted(SECTORS):
        cents = int(BASE_PRICE[ticker].replace(".", ""))
        prev_close = cents
        for day in DAYS:
            # moves in basis points of the previous close, within +/-3%
            open_c = prev_close + prev_close * (int(rng.next() % 201) - 100) // 10000
            close_c = open_c + open_c * (int(rng.next() % 601) - 300) // 10000
            high_c = max(open_c, close_c) + 1 + int(rng.next() % 50)
            low_c = min(open_c, close_c) - 1 - int(rng.next() % 50)
            vol = 1_000_000 + int(rng.next() % 9_000_000)
            f = lambda c: f"{c // 100}.{c % 100:02d}"
            rows.append(f"{ticker},{day},{f(open_c)},{f(high_c)},{f(low_c)},{f(close_c)},{vol}")
            prev_close = close_c
    return "\n".join(rows) + "\n"


def universe():
    rows = ["effective_date,action,ticker"]
    for t in sorted(SECTORS):
        if t != "FRC":
            rows.append(f"2019-01-02,BASE,{t}")
    rows.append("2019-01-08,REMOVE,SCG")
    rows.append("2019-01-08,ADD,FRC")
    return "\n".join(rows) + "\n"


def macro():
    rows = ["indicator,reference_period,release_date,value"]
    data = {
        "CPI": [("2018-10", "2018-11-14", "252.885"), ("2018-11", "2018-12-12", "252.038"), ("2018-12", "2019-01-11", "251.233")],
        "PPI": [("2018-10", "2018-11-09", "117.3"), ("2018-11", "2018-12-11", "117.4"), ("2018-12", "2019-01-15", "117.1")],
        "PCE": [("2018-10", "2018-11-29", "109.245"), ("2018-11", "2018-12-21", "109.241")],
        "NFP": [("2018-10", "2018-11-02", "150120"), ("2018-11", "2018-12-07", "150296"), ("2018-12", "2019-01-04", "150608")],
        "PMI": [("2018-11", "2018-12-03", "59.3"), ("2018-12", "2019-01-03", "54.1")],
    }
    for ind, obs in data.items():
        for period, release, value in obs:
            rows.append(f"{ind},{period},{release},{value}")
    return "\n".join(rows) + "\n"


def fomc():
    lines = [
        {"meeting_date": "2018-11-08", "release_date": "2018-11-29",
         "text": "Inflation remains near the 2 percent objective. Further gradual increases in the target range are "
                 "likely to be appropriate. Economic activity has been rising at a strong rate."},
        {"meeting_date": "2018-12-19", "release_date": "2019-01-09",
         "text": "The target range was raised 25 basis points. Participants noted the Committee could be patient about "
                 "further policy firming given muted inflation pressures and tighter financial conditions."},
    ]
    return "".join(json.dumps(x, sort_keys=True) + "\n" for x in lines)


NEWS = [
    # (published_date, source_id, ticker-as-model-named, title, pairs)
    ("2019-01-02", "n001", "AAPL", "Apple cuts revenue guidance on China slowdown", [["revenue", -1], ["customer_demand", -1]]),
    ("2019-01-02", "n002", "JPM", "JPMorgan loan growth beats estimates", [["growth", 1], ["earnings", 1]]),
    ("2019-01-02", "n003", "Exxon Mobil", "Exxon faces weaker refining margins", [["earnings", -1], ["risk", -1]]),
    ("2019-01-03", "n004", "MSFT", "Microsoft cloud momentum continues", [["growth", 1], ["market_share", 1]]),
    ("2019-01-04", "n005", "NVDA", "Nvidia inventory overhang persists", [["revenue", -1], ["operational_efficiency", 0]]),
    ("2019-01-07", "n006", "FRC", "First Republic deposit growth strong", [["growth", 1]]),
    ("2019-01-08", "n007", "XOM", "Exxon upstream output rises", [["growth", 1], ["strategy", 1]]),
    ("2019-01-09", "n008", "CVX", "Chevron capex discipline questioned", [["management", -1]]),
    ("2019-01-10", "n009", "SLB", "Schlumberger sees recovery in North America", [["customer_demand", 1]]),
    ("2019-01-11", "n010", "NVDA", "Nvidia data center demand rebounds", [["customer_demand", 1], ["innovation", 1]]),
    ("2019-01-14", "n011", "AAPL", "Apple services revenue hits record", [["revenue", 1]]),
    ("2019-01-15", "n012", "DUK", "Duke Energy rate case approved", [["regulatory", 1]]),
]


def news():
    out = []
    for date, ref, _, title, _ in NEWS:
        out.append(json.dumps({"published_date": date, "title": title, "description": title + ".",
                               "content": title + ". Synthetic article for the golden fixture.",
                               "source_id": ref}, sort_keys=True))
    return "\n".join(out) + "\n"


def sentiment():
    rows = ["published_date|ticker|aspect|sentiment|article_ref"]
    for date, ref, name, _, pairs in NEWS:
        for aspect, s in pairs:
            rows.append(f"{date}|{name}|{aspect}|{s}|{ref}")
    return "\n".join(rows) + "\n"


def sectors():
    return "ticker,sector\n" + "".join(f"{t},{s}\n" for t, s in sorted(SECTORS.items()))


def aliases():
    return "name,ticker\nExxon Mobil,XOM\nApple Inc.,AAPL\n"


def reflection(date, body):
    return (f"Stock ranking for the session after {date}.\n"
            "MACRO ANALYSIS: inflation trends are soft and the FOMC guidance is patient.\n"
            f"SECTOR ALLOCATION and STOCK SELECTION: {body}\n")


# Each decision day: model reflection, decision response text, and the decisions the response encodes
# ("hold" when the response carries no JSON).
SCRIPT = [
    ("2019-01-03", "Overweight Information Technology and Financials; short Energy.",
     '[{"ticker":"AAPL","action":"open_long","size_pct":5},{"ticker":"JPM","action":"open_long","size_pct":3},'
     '{"ticker":"SCG","action":"open_long","size_pct":2},{"ticker":"XOM","action":"open_short","size_pct":2},'
     '{"ticker":"ZZZZ","action":"open_long","size_pct":4}]'),
    ("2019-01-04", "No changes recommended.", "[]"),
    ("2019-01-07", "Add MSFT; AAPL remains a top pick.",
     '{"decisions":[{"ticker":"msft","action":"open_long","size_pct":4},{"ticker":"AAPL","action":"open_long","size_pct":3},'
     '{"ticker":"MSFT","action":"open_short","size_pct":2}]}'),
    ("2019-01-08", "Initiate FRC after index inclusion.",
     '[{"ticker":"FRC","action":"open_long","size_pct":2}]'),
    ("2019-01-09", "Energy outlook turns positive; go long XOM.",
     'Here are the trades:\n[{"ticker":"XOM","action":"open_long","size_pct":3}]'),
    ("2019-01-10", "Exit JPM; short CVX.",
     '```json\n[{"ticker":"JPM","action":"close"},{"ticker":"CVX","action":"open_short","size_pct":2}]\n```'),
    ("2019-01-11", "Rankings unchanged.", "I could not determine any trades from this analysis."),
    ("2019-01-14", "Long XOM on improving production.",
     '[{"ticker":"XOM","action":"open_long","size_pct":3}]'),
    ("2019-01-15", "Broad risk-on: NVDA, BAC, SLB, DUK long; SO short.",
     '[{"ticker":"NVDA","action":"open_long","size_pct":30},{"ticker":"BAC","action":"open_long","size_pct":20},'
     '{"ticker":"SLB","action":"open_long","size_pct":20},{"ticker":"DUK","action":"open_long","size_pct":20},'
     '{"ticker":"SO","action":"open_short","size_pct":5}]'),
    ("2019-01-16", "Take profits in AAPL.",
     '[{"ticker":"AAPL","action":"close"},{"ticker":"JPM","action":"close"}]'),
]


def intended(text):
    if text.startswith("{"):
        return json.loads(text)["decisions"]
    start = text.find("[")
    if start < 0:
        return "hold"
    end = text.rfind("]")
    return json.loads(text[start:end + 1])


def script():
    days = []
    for date, body, response in SCRIPT:
        days.append({"date": date, "reflection": reflection(date, body), "decision_response": response,
                     "intended": intended(response)})
    return json.dumps({"strategy": "top_down", "days": days}, indent=2, sort_keys=True) + "\n"


def config():
    return json.dumps({
        "strategy": "top_down",
        "start": "2019-01-03",
        "end": "2019-01-16",
        "initial_capital": "100000000",
        "commission_bps": 10,
        "impact_bps": 10,
        "max_utilization": 0.9,
        "risk_free_rate": 0,
        "annualization_days": 252,
        "top_down_size_cap_pct": 20,
        "seed": 7,
        "data": {
            "bars": "bars.csv", "universe": "universe.csv", "macro": "macro.csv",
            "fomc_summaries": "fomc_summaries.jsonl", "news": "news.jsonl",
            "sentiment_memory": "sentiment_memory.txt", "sectors": "sectors.csv", "aliases": "aliases.csv",
        },
        "gateway": {"mode": "replay", "cassette": "cassette.jsonl",
                    "ranking_model": "golden-ranking", "decision_model": "golden-decision"},
        "output_dir": "run",
    }, indent=2) + "\n"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    files = {
        "bars.csv": bars(), "universe.csv": universe(), "macro.csv": macro(),
        "fomc_summaries.jsonl": fomc(), "news.jsonl": news(), "sentiment_memory.txt": sentiment(),
        "sectors.csv": sectors(), "aliases.csv": aliases(), "script.json": script(), "config.json": config(),
    }
    for name, content in files.items():
        (OUT / name).write_text(content)


if __name__ == "__main__":
    main()
