"""Gaussian versus Cauchy fits of log-returns.

Reads a ``date,price`` CSV, turns it into log-returns and fits both
families by maximum likelihood so the heavy-tail hypothesis can be checked
on real data.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import (DegenerateSample, NoConvergence, NonMonotoneDate, NonPositivePrice,
                     ParseError, TooShort)


@dataclass(frozen=True)
class PriceSeries:
    dates: tuple
    prices: np.ndarray

    def __len__(self):
        return len(self.dates)


def load_series(path) -> PriceSeries:
    """Parse ``date,price`` rows; line numbers in errors count the header as line 1."""
    text = Path(path).read_text()
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip().lower() for c in rows[0]] != ["date", "price"]:
        raise ParseError(1, "expected header 'date,price'")
    dates, days, prices = [], [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ParseError(lineno, f"expected 2 fields, got {len(row)}")
        date = row[0].strip()
        try:
            price = float(row[1])
        except ValueError:
            raise ParseError(lineno, f"price {row[1]!r} is not a number") from None
        try:
            day = dt.date.fromisoformat(date)
        except ValueError:
            raise ParseError(lineno, f"date {date!r} is not ISO YYYY-MM-DD") from None
        if not (price > 0 and math.isfinite(price)):
            raise NonPositivePrice(lineno, f"price {price!r}")
        if days and not day > days[-1]:
            raise NonMonotoneDate(lineno, f"{date} after {dates[-1]}")
        days.append(day)
        dates.append(date)
        prices.append(price)
    return PriceSeries(tuple(dates), np.array(prices))


def log_returns(s) -> np.ndarray:
    prices = np.asarray(s.prices if isinstance(s, PriceSeries) else s, dtype=float)
    if len(prices) < 2:
        raise TooShort(f"need at least 2 prices, got {len(prices)}")
    return np.log(prices[1:] / prices[:-1])


@dataclass(frozen=True)
class FitResult:
    model: str  # "gaussian" or "cauchy"
    location: float  # mean or location
    scale: float  # stdev or scale
    log_likelihood: float
    ks_statistic: float
    n: int
    iterations: int = 0

    def as_dict(self) -> dict:
        names = ("mean", "stdev") if self.model == "gaussian" else ("location", "scale")
        return {
            "model": self.model,
            names[0]: self.location,
            names[1]: self.scale,
            "log_likelihood": self.log_likelihood,
            "ks_statistic": self.ks_statistic,
            "n": self.n,
            "iterations": self.iterations,
        }


def _check_sample(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 3:
        raise DegenerateSample(f"need at least 3 samples, got {x.size}")
    if np.all(x == x[0]):
        raise DegenerateSample("all samples are identical")
    return x


def fit_gaussian(returns) -> FitResult:
    x = _check_sample(returns)
    mu = float(np.mean(x))
    sd = float(np.sqrt(np.mean((x - mu) ** 2)))
    dist = stats.norm(mu, sd)
    return FitResult("gaussian", mu, sd, float(np.sum(dist.logpdf(x))),
                     float(stats.kstest(x, dist.cdf).statistic), len(x))


def _cauchy_score_hessian(x, loc, gam):
    d = x - loc
    den = d * d + gam * gam
    n = len(x)
    score = np.array([np.sum(2 * d / den), n / gam - np.sum(2 * gam / den)])
    h_ll = np.sum(2 * (d * d - gam * gam) / den**2)
    h_lg = -np.sum(4 * gam * d / den**2)
    h_gg = -n / gam**2 - np.sum(2 * (d * d - gam * gam) / den**2)
    return score, np.array([[h_ll, h_lg], [h_lg, h_gg]])


def _cauchy_loglik(x, loc, gam):
    d = x - loc
    return float(np.sum(np.log(gam / math.pi) - np.log(d * d + gam * gam)))


def fit_cauchy(returns, tol=1e-10, max_iter=200) -> FitResult:
    """Cauchy MLE by damped Newton from (median, half the interquartile range).

    Convergence is declared when the per-observation score has norm below
    ``tol``.  Steps that would lower the likelihood or make the scale
    non-positive are halved; a Newton direction that is not an ascent
    direction falls back to the gradient.
    """
    x = _check_sample(returns)
    n = len(x)
    loc = float(np.median(x))
    q75, q25 = np.percentile(x, [75, 25])
    gam = 0.5 * float(q75 - q25)
    if gam <= 0:
        gam = float(np.mean(np.abs(x - loc))) or 1.0
    ll = _cauchy_loglik(x, loc, gam)
    for it in range(1, max_iter + 1):
        score, hess = _cauchy_score_hessian(x, loc, gam)
        if np.linalg.norm(score) / n < tol:
            break
        try:
            step = -np.linalg.solve(hess, score)
        except np.linalg.LinAlgError:
            step = score
        if step @ score <= 0:
            step = score * (gam * gam / n)
        t = 1.0
        while True:
            new_loc, new_gam = loc + t * step[0], gam + t * step[1]
            if new_gam > 0:
                new_ll = _cauchy_loglik(x, new_loc, new_gam)
                if new_ll >= ll - 1e-12 * abs(ll):
                    break
            t *= 0.5
            if t < 1e-12:
                raise NoConvergence(it, message=f"line search stalled after {it} iterations")
        loc, gam, ll = new_loc, new_gam, new_ll
    else:
        raise NoConvergence(max_iter)
    dist = stats.cauchy(loc, gam)
    return FitResult("cauchy", float(loc), float(gam), _cauchy_loglik(x, loc, gam),
                     float(stats.kstest(x, dist.cdf).statistic), n, it)


def fit(returns, model="both") -> list:
    if model == "gaussian":
        return [fit_gaussian(returns)]
    if model == "cauchy":
        return [fit_cauchy(returns)]
    if model == "both":
        return [fit_gaussian(returns), fit_cauchy(returns)]
    raise ValueError(f"unknown model {model!r}")
