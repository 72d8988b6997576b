"""Market parameters and the scalar constants derived from them.

Everything downstream is parameterised by the triple (sigma, rate, q): the
volatility, the risk-free rate and the relativistic parameter (the squared
"speed of light" of the Klein-Gordon analogy).  ``q -> inf`` recovers the
classical Black-Scholes equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NegativeRate, NonPositiveQ, NonPositiveSigma

DEFAULT_CONFORMAL_THRESHOLD = 100.0


@dataclass(frozen=True)
class MarketParams:
    sigma: float
    rate: float
    q: float

    def __post_init__(self):
        for name in ("sigma", "rate", "q"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise NonPositiveSigma(self.sigma)
        if not self.q > 0 or not math.isfinite(self.q):
            raise NonPositiveQ(self.q)
        if not self.rate >= 0 or not math.isfinite(self.rate):
            raise NegativeRate(self.rate)

    @property
    def mass(self) -> float:
        """Particle mass of the quantum analogy, m = 1/sigma^2."""
        return 1.0 / self.sigma**2

    @property
    def light_speed(self) -> float:
        return math.sqrt(self.q)

    @property
    def half_var(self) -> float:
        return 0.5 * self.sigma**2

    def as_dict(self) -> dict:
        return {"sigma": self.sigma, "rate": self.rate, "q": self.q}


def validate_params(sigma, rate, q) -> MarketParams:
    """Build a :class:`MarketParams`, raising a field-specific error on bad input."""
    return MarketParams(sigma, rate, q)


@dataclass(frozen=True)
class DriftCoefficient:
    """The complex first-order coefficient ``A`` of the z-coordinate equation."""

    re: float
    im: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def conj(self) -> complex:
        return complex(self.re, -self.im)

    @property
    def abs2(self) -> float:
        return self.re * self.re + self.im * self.im


def drift_coefficient(p: MarketParams) -> DriftCoefficient:
    s2 = p.sigma**2
    lead = p.half_var - p.rate
    bracket_im = ((p.half_var + p.rate) ** 2 - 2.0 * p.q) / (2.0 * math.sqrt(p.q))
    # A = -(1/s2) * (lead - i * bracket_im)
    return DriftCoefficient(-lead / s2, bracket_im / s2)


@dataclass(frozen=True)
class RegimeDiagnostic:
    mass_term: float
    aabar: float
    ratio: float
    threshold: float = DEFAULT_CONFORMAL_THRESHOLD
    # aabar - mass_term, from A directly and from the printed expansion
    excess: float = 0.0
    excess_printed: float = 0.0

    @property
    def conformal(self) -> bool:
        return self.ratio > self.threshold

    def as_dict(self) -> dict:
        return {
            "mass_term": self.mass_term,
            "aabar": self.aabar,
            "ratio": self.ratio,
            "threshold": self.threshold,
            "conformal": self.conformal,
            "excess": self.excess,
            "excess_printed": self.excess_printed,
        }


def aabar_expanded(p: MarketParams) -> float:
    """|A|^2 written out term by term (independent check of :func:`drift_coefficient`)."""
    s2, sp, sm = p.sigma**2, p.half_var + p.rate, p.half_var - p.rate
    return (sm**2 - sp**2 + sp**4 / (4.0 * p.q) + p.q) / s2**2


def regime_diagnostic(
    p: MarketParams, threshold: float = DEFAULT_CONFORMAL_THRESHOLD
) -> RegimeDiagnostic:
    """Compare |A|^2 against the mass term q/sigma^4.

    A ratio well above ``threshold`` means the mass term can be dropped and
    the pricing equation becomes conformally invariant.  ``excess`` is
    ``|A|^2 - q/sigma^4`` scaled by sigma^4, i.e. ``sp^4/(4q) - 2 r sigma^2``;
    ``excess_printed`` is the same quantity with ``+2 r sigma^2`` as it is
    sometimes quoted.  Both are reported; only ``excess`` follows from ``A``.
    """
    s4 = p.sigma**4
    mass = p.q / s4
    aabar = drift_coefficient(p).abs2
    sp = p.half_var + p.rate
    quartic = sp**4 / (4.0 * p.q)
    return RegimeDiagnostic(
        mass_term=mass,
        aabar=aabar,
        ratio=aabar / mass,
        threshold=threshold,
        excess=(aabar - mass) * s4,
        excess_printed=quartic + 2.0 * p.rate * p.sigma**2,
    )
