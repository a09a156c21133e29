"""Regenerate src/diffclust/data/panel_fixture.csv.

Twenty synthetic daily price series on business days 2006-01-03 .. 2007-12-31,
with a few blank cells, shaped like the asset panel the pipeline expects.
"""

import csv
import datetime as dt
from pathlib import Path

import numpy as np

LABELS = ["MSOFT", "AMD", "DELL", "INTEL", "HP", "SONY", "MOTO", "NOKIA", "EA", "LG",
          "BORL", "PHILIPS", "SYMATEC", "JPM", "MLINCH", "DB", "CITI", "BAC", "GSACHS", "EXXON"]


def business_days(start, end):
    d = start
    while d <= end:
        if d.weekday() < 5:
            yield d
        d += dt.timedelta(days=1)


def main():
    rng = np.random.Generator(np.random.Philox(20060103))
    days = list(business_days(dt.date(2006, 1, 3), dt.date(2007, 12, 31)))
    n = len(days)
    vols = rng.uniform(0.01, 0.03, len(LABELS))
    vols[LABELS.index("BORL")] = 0.06
    drifts = rng.normal(0.0, 5e-4, len(LABELS))
    start = rng.uniform(10, 120, len(LABELS))
    common = rng.standard_normal(n) * 0.008
    prices = np.empty((n, len(LABELS)))
    for j in range(len(LABELS)):
        r = drifts[j] + vols[j] * rng.standard_normal(n) + common
        prices[:, j] = start[j] * np.exp(np.cumsum(r))
    holes = rng.random(prices.shape) < 0.01
    holes[0, :] = False
    out = Path(__file__).resolve().parents[1] / "src/diffclust/data/panel_fixture.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date"] + LABELS)
        for i, d in enumerate(days):
            w.writerow([d.isoformat()] + ["" if holes[i, j] else f"{prices[i, j]:.2f}"
                                          for j in range(len(LABELS))])
    print(out)


if __name__ == "__main__":
    main()
