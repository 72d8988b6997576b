"""Classical (q -> inf) pricers used as oracles.

``bs_closed_form`` is the textbook Black-Scholes formula.  ``heat_kernel_price``
reaches the same number a different way: gauge the payoff into the
Schrodinger variable psi, convolve with the Gaussian heat kernel (the
imaginary-time free propagator with mass 1/sigma^2), and gauge back.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import InvalidContract
from .gauge import Variant, gauge_params, safe_exp
from .model import MarketParams
from .quadrature import adaptive_gk

#: half-width of the truncated log-price window, in Gaussian standard deviations
N_STD = 12.0


class Kind(str, enum.Enum):
    CALL = "call"
    PUT = "put"


@dataclass(frozen=True)
class VanillaSpec:
    kind: Kind
    strike: float
    maturity: float
    spot: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        for name in ("strike", "maturity", "spot"):
            v = float(getattr(self, name))
            if not (v > 0 and math.isfinite(v)):
                raise InvalidContract(f"{name} must be a positive finite number, got {v!r}")
            object.__setattr__(self, name, v)

    def payoff(self, S):
        S = np.asarray(S, dtype=float)
        if self.kind is Kind.CALL:
            return np.maximum(S - self.strike, 0.0)
        return np.maximum(self.strike - S, 0.0)


def bs_price(kind, S, K, tau, sigma, rate):
    """Vectorised Black-Scholes value; broadcasts over ``S`` and ``tau``."""
    S = np.asarray(S, dtype=float)
    tau = np.asarray(tau, dtype=float)
    vol = sigma * np.sqrt(tau)
    d1 = (np.log(S / K) + (rate + 0.5 * sigma * sigma) * tau) / vol
    d2 = d1 - vol
    disc = K * np.exp(-rate * tau)
    if Kind(kind) is Kind.CALL:
        return S * ndtr(d1) - disc * ndtr(d2)
    return disc * ndtr(-d2) - S * ndtr(-d1)


def bs_closed_form(spec: VanillaSpec, sigma: float, rate: float) -> float:
    if not sigma > 0:
        raise InvalidContract(f"sigma must be > 0, got {sigma!r}")
    return float(bs_price(spec.kind, spec.spot, spec.strike, spec.maturity, sigma, rate))


def gaussian_kernel(u, variance):
    """Heat kernel in log-price: N(0, variance) density evaluated at ``u``."""
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5 * u * u / variance) / math.sqrt(2.0 * math.pi * variance)


def heat_kernel_price(spec: VanillaSpec, sigma: float, rate: float, tol: float = 1e-8,
                      payoff=None) -> float:
    """Price a European claim through the Schrodinger picture.

    ``payoff`` (a function of S) overrides the vanilla payoff of ``spec``.
    Raises :class:`QuadratureFailure` if ``tol`` cannot be met.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    # q plays no role in the Schrodinger gauge; any valid value will do
    p = MarketParams(sigma, rate, 1.0)
    g = gauge_params(p, Variant.SCHRODINGER)
    pay = spec.payoff if payoff is None else payoff
    x = math.log(spec.spot)
    T = spec.maturity
    var = sigma * sigma * T

    def psi_T(zeta):
        return safe_exp(-(g.a * zeta + g.b * T)) * pay(np.exp(zeta))

    def integrand(zeta):
        return gaussian_kernel(x - zeta, var) * psi_T(zeta)

    # the gauge weight exp(a(x - zeta)) shifts the Gaussian bulk to x - a*var
    centre = x - g.a * var
    half = N_STD * math.sqrt(var) + var
    lo, hi = centre - half, centre + half
    back = safe_exp(g.a * x)  # psi -> C at t = 0
    res = adaptive_gk(integrand, lo, hi, tol=0.1 * tol / back,
                      breakpoints=[math.log(spec.strike)])
    return float(back * res.value)
