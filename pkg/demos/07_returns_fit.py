"""Gaussian or Cauchy?  Fitting log-returns.

A synthetic price path with Cauchy-distributed shocks is written to a
CSV file, read back and fitted both ways.
"""

import datetime as dt
import tempfile
from pathlib import Path

import numpy as np

from rqf.returns_fit import fit, load_series, log_returns

rng = np.random.default_rng(7)
shocks = 0.01 * rng.standard_cauchy(2000).clip(-20, 20)
prices = 100.0 * np.exp(np.concatenate([[0.0], np.cumsum(shocks)]))
start = dt.date(2020, 1, 1)
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "prices.csv"
    rows = [f"{start + dt.timedelta(days=i)},{p:.6f}" for i, p in enumerate(prices)]
    path.write_text("date,price\n" + "\n".join(rows) + "\n")
    r = log_returns(load_series(path))

for res in fit(r):
    print(f"{res.model:8}  location {res.location:+.5f}  scale {res.scale:.5f}  "
          f"loglik {res.log_likelihood:10.1f}  KS {res.ks_statistic:.3f}")
