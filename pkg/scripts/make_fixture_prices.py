"""Regenerate the synthetic price fixtures.

Writes fixtures/prices.csv and fixtures/industries.csv: five industries of
five tickers each on a 700-weekday calendar. Prices follow a geometric walk
with a shared industry factor plus idiosyncratic noise, so strategies
genuinely differ. One ticker skips one interior day to exercise the
single-day forward-fill path.

Usage: python scripts/make_fixture_prices.py [out_dir]
"""

from __future__ import annotations

import csv
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np

SEED = 414243
NUM_DAYS = 700
START = date(2018, 1, 2)

INDUSTRIES = {
    "Energy": ["ENE1", "ENE2", "ENE3", "ENE4", "ENE5"],
    "Finance": ["FIN1", "FIN2", "FIN3", "FIN4", "FIN5"],
    "Health": ["HLT1", "HLT2", "HLT3", "HLT4", "HLT5"],
    "Retail": ["RET1", "RET2", "RET3", "RET4", "RET5"],
    "Tech": ["TEC1", "TEC2", "TEC3", "TEC4", "TEC5"],
}

# (drift per day, industry factor volatility) per industry
DYNAMICS = {
    "Energy": (0.0001, 0.012),
    "Finance": (0.0003, 0.009),
    "Health": (0.0004, 0.007),
    "Retail": (0.0002, 0.010),
    "Tech": (0.0006, 0.014),
}

IDIO_VOL = 0.008
GAP_TICKER = "TEC3"
GAP_DAY_INDEX = 350


def weekdays(start: date, count: int) -> list[str]:
    out = []
    day = start
    while len(out) < count:
        if day.weekday() < 5:
            out.append(day.isoformat())
        day += timedelta(days=1)
    return out


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixtures")
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    dates = weekdays(START, NUM_DAYS)

    rows = []
    for industry, tickers in INDUSTRIES.items():
        drift, factor_vol = DYNAMICS[industry]
        factor = rng.standard_normal(NUM_DAYS - 1) * factor_vol
        for ticker in tickers:
            start_price = float(rng.uniform(20.0, 200.0))
            idio = rng.standard_normal(NUM_DAYS - 1) * IDIO_VOL
            log_returns = drift + factor + idio
            prices = start_price * np.exp(np.concatenate([[0.0], np.cumsum(log_returns)]))
            for i, d in enumerate(dates):
                if ticker == GAP_TICKER and i == GAP_DAY_INDEX:
                    continue
                rows.append([d, ticker, f"{prices[i]:.4f}"])

    rows.sort(key=lambda r: (r[0], r[1]))
    with open(out_dir / "prices.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "ticker", "adj_close"])
        writer.writerows(rows)

    with open(out_dir / "industries.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["ticker", "industry"])
        for industry, tickers in INDUSTRIES.items():
            for ticker in tickers:
                writer.writerow([ticker, industry])

    print(f"wrote {len(rows)} price rows over {NUM_DAYS} days to {out_dir}")


if __name__ == "__main__":
    main()
