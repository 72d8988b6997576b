"""Conformal-limit pricing with the Cauchy (half-plane Poisson) kernel.

When the mass term is negligible the gauged price psi solves the Laplace
equation ``psi_tt / q + psi_xx = 0`` and its bounded solution is the
convolution of the initial data with

    G(u, t) = sqrt(q) t / (pi (u^2 + q t^2)),

a Cauchy density of scale ``sqrt(q) t``.  Undoing the Klein-Gordon gauge
gives the pricing kernel ``K(u, t) = exp(a u + b t) G(u, t)``.

Because ``K`` has only algebraic tails against an exponential weight, most
payoffs do not converge under it; :func:`check_integrability` says which do.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissiblePayoff, NonPositiveTime
from .gauge import Field2D, Grid, Variant, gauge_params, safe_exp
from .model import MarketParams, regime_diagnostic
from .quadrature import integrate

INF = math.inf


# --------------------------------------------------------------------------
# payoffs
# --------------------------------------------------------------------------

class GrowthClass(str, enum.Enum):
    COMPACT = "compact-support"
    BOUNDED_LEFT = "bounded-left"
    BOUNDED_RIGHT = "bounded-right"
    BOUNDED = "bounded"
    EXPONENTIAL = "exponential-order"


@dataclass(frozen=True)
class Growth:
    kind: GrowthClass
    order: float = 0.0  # largest exponential rate over both tails

    def __str__(self):
        if self.kind is GrowthClass.EXPONENTIAL:
            return f"{self.kind.value} {self.order:g}"
        return self.kind.value


@dataclass(frozen=True)
class Piece:
    """``sum(c * exp(k * zeta) for k, c in terms)`` on ``[lo, hi)``."""

    lo: float
    hi: float
    terms: tuple = ()

    def __post_init__(self):
        terms = tuple((float(k), float(c)) for k, c in self.terms if c != 0)
        object.__setattr__(self, "terms", terms)

    @property
    def exponents(self):
        return [k for k, _ in self.terms]

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        out = np.zeros_like(zeta)
        for k, c in self.terms:
            out = out + c * np.exp(k * zeta)
        return out


def _infer_growth(pieces) -> Growth:
    left, right = pieces[0].exponents, pieces[-1].exponents
    if not left and not right:
        return Growth(GrowthClass.COMPACT)
    # e^{k zeta} is bounded as zeta -> -inf iff k >= 0, and as zeta -> +inf iff k <= 0
    left_rate = max([-k for k in left], default=0.0)
    right_rate = max(right, default=0.0)
    left_ok, right_ok = left_rate <= 0, right_rate <= 0
    order = max(left_rate, right_rate, 0.0)
    if left_ok and right_ok:
        return Growth(GrowthClass.BOUNDED)
    if left_ok:
        return Growth(GrowthClass.BOUNDED_LEFT, order)
    if right_ok:
        return Growth(GrowthClass.BOUNDED_RIGHT, order)
    return Growth(GrowthClass.EXPONENTIAL, order)


@dataclass(frozen=True)
class Payoff:
    """Piecewise exponential-polynomial payoff ``C(zeta, 0)`` in log-price.

    ``pieces`` must tile the real line in order.  ``growth`` is inferred from
    the two tail pieces; if supplied it must agree with the inference.
    """

    pieces: tuple
    growth: Growth | None = None
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("payoff needs at least one piece")
        if pieces[0].lo != -INF or pieces[-1].hi != INF:
            raise ValueError("payoff pieces must cover the whole real line")
        for p, nxt in zip(pieces[:-1], pieces[1:]):
            if not p.lo < p.hi or p.hi != nxt.lo:
                raise ValueError(f"pieces overlap or leave a gap at {p.hi!r}")
        object.__setattr__(self, "pieces", pieces)
        inferred = _infer_growth(pieces)
        if self.growth is None:
            object.__setattr__(self, "growth", inferred)
        elif self.growth.kind is not inferred.kind:
            raise ValueError(f"declared growth {self.growth} inconsistent with {inferred}")

    @property
    def breakpoints(self):
        return [p.lo for p in self.pieces[1:]]

    def support(self) -> tuple[float, float]:
        """Smallest interval outside which the payoff vanishes."""
        nz = [p for p in self.pieces if p.terms]
        if not nz:
            return (0.0, 0.0)
        return (nz[0].lo, nz[-1].hi)

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        out = np.zeros_like(zeta)
        for p in self.pieces:
            mask = (zeta >= p.lo) & (zeta < p.hi)
            if p.terms and np.any(mask):
                out = np.where(mask, p(zeta), out)
        return out

    def truncated(self, z: float) -> "Payoff":
        """The payoff set to zero outside ``[-z, z]``."""
        if not z > 0:
            raise ValueError("truncation half-width must be > 0")
        pieces = [Piece(-INF, -z)]
        for p in self.pieces:
            lo, hi = max(p.lo, -z), min(p.hi, z)
            if lo < hi:
                pieces.append(Piece(lo, hi, p.terms))
        pieces.append(Piece(z, INF))
        return Payoff(tuple(pieces), name=f"{self.name}[|zeta|<={z:g}]")


def _pieces(cuts, term_lists):
    bounds = [-INF, *cuts, INF]
    return tuple(Piece(lo, hi, t) for lo, hi, t in zip(bounds[:-1], bounds[1:], term_lists))


def call_payoff(strike: float) -> Payoff:
    k = math.log(strike)
    return Payoff(_pieces([k], [(), ((1, 1.0), (0, -strike))]), name="call")


def put_payoff(strike: float) -> Payoff:
    k = math.log(strike)
    return Payoff(_pieces([k], [((0, strike), (1, -1.0)), ()]), name="put")


def binary_payoff(strike: float, cash: float = 1.0) -> Payoff:
    """Cash-or-nothing call."""
    return Payoff(_pieces([math.log(strike)], [(), ((0, cash),)]), name="binary")


def butterfly_payoff(k1: float, k2: float, k3: float) -> Payoff:
    """Long k1 call, short (1 + w) k2 calls, long w k3 calls with w = (k2-k1)/(k3-k2).

    The weights close the position above k3, so the payoff is a tent of
    height ``k2 - k1`` supported on ``[k1, k3]``.
    """
    if not 0 < k1 < k2 < k3:
        raise ValueError("butterfly strikes must satisfy 0 < k1 < k2 < k3")
    w = (k2 - k1) / (k3 - k2)
    terms = [
        (),
        ((1, 1.0), (0, -k1)),
        ((1, -w), (0, -k1 + (1 + w) * k2)),
        (),
    ]
    return Payoff(_pieces([math.log(k1), math.log(k2), math.log(k3)], terms), name="butterfly")


def indicator_payoff(lo: float, hi: float, value: float = 1.0) -> Payoff:
    """``value`` on ``lo <= zeta < hi`` (log-price bounds), zero elsewhere."""
    return Payoff(_pieces([lo, hi], [(), ((0, value),), ()]), name="indicator")


def constant_payoff(value: float) -> Payoff:
    return Payoff((Piece(-INF, INF, ((0, value),)),), name="constant")


def zero_payoff() -> Payoff:
    return Payoff((Piece(-INF, INF),), name="zero")


# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------

def _check_time(t):
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise NonPositiveTime(t)


def cauchy_kernel(u, t, q):
    """Half-plane Poisson kernel; a Cauchy density in ``u`` with scale sqrt(q) t."""
    _check_time(t)
    s = math.sqrt(q) * np.asarray(t, dtype=float)
    u = np.asarray(u, dtype=float)
    out = s / (math.pi * (u * u + s * s))
    return float(out) if out.ndim == 0 else out


def pricing_kernel(u, t, p: MarketParams):
    g = gauge_params(p, Variant.KLEIN_GORDON)
    out = safe_exp(g.a * np.asarray(u, dtype=float) + g.b * np.asarray(t, dtype=float))
    out = out * cauchy_kernel(u, t, p.q)
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# integrability
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Integrability:
    admissible: bool
    reason: str = ""
    right_exponent: float = -INF  # growth rate of exp(-a zeta) C(zeta) as zeta -> +inf
    left_exponent: float = -INF   # same, as zeta -> -inf

    def __bool__(self):
        return self.admissible


def check_integrability(payoff: Payoff, p: MarketParams) -> Integrability:
    """Decide whether ``int K(x - zeta, t) C(zeta) dzeta`` converges.

    The kernel decays like ``exp(-a zeta) / zeta^2`` in each tail, so the
    integral is finite iff ``exp(-a zeta) C(zeta)`` grows slower than
    ``|zeta|``.  For exponential-polynomial tails that means no tail
    exponent ``k - a`` (right) or ``a - k`` (left) may be positive.
    """
    a = gauge_params(p, Variant.KLEIN_GORDON).a
    right = payoff.pieces[-1].exponents
    left = payoff.pieces[0].exponents
    r_exp = max((k - a for k in right), default=-INF)
    l_exp = max((a - k for k in left), default=-INF)
    problems = []
    # exponents within round-off of zero are the marginal (bounded) case
    eps = 1e-12 * (1.0 + abs(a))
    if r_exp > eps:
        k = max(right)
        problems.append(
            f"right tail: exp(-a*zeta)*payoff grows like exp({r_exp:.6g}*zeta) "
            f"as zeta -> +inf (tail exponent k - a = {k:g} - ({a:.6g}) = {r_exp:.6g} > 0)"
        )
    if l_exp > eps:
        k = min(left)
        problems.append(
            f"left tail: exp(-a*zeta)*payoff grows like exp({l_exp:.6g}*|zeta|) "
            f"as zeta -> -inf (tail exponent a - k = {a:.6g} - {k:g} = {l_exp:.6g} > 0)"
        )
    if problems:
        reason = "; ".join(problems) + (
            f"; with a = 1/2 - r/sigma^2 = {a:.6g} the Cauchy-kernel convolution diverges"
        )
        return Integrability(False, reason, r_exp, l_exp)
    return Integrability(True, "", r_exp, l_exp)


# --------------------------------------------------------------------------
# pricing
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelQuery:
    x: float
    t: float
    params: MarketParams
    tol: float = 1e-8

    def __post_init__(self):
        if not self.t >= 0:
            raise NonPositiveTime(self.t)
        if not self.tol > 0:
            raise ValueError("tol must be > 0")


@dataclass(frozen=True)
class KernelPrice:
    price: float
    error_estimate: float
    admissible: bool
    conformal_ratio: float
    truncated: bool = False

    def as_dict(self) -> dict:
        return {
            "price": self.price,
            "error_estimate": self.error_estimate,
            "admissible": self.admissible,
            "conformal_ratio": self.conformal_ratio,
            "truncated": self.truncated,
        }


def price_kernel(payoff: Payoff, query: KernelQuery, force_truncate: float | None = None
                 ) -> KernelPrice:
    """``C(x, t) = int K(x - zeta, t) C(zeta, 0) dzeta`` by adaptive quadrature.

    With ``force_truncate=Z`` the payoff is first clipped to ``[-Z, Z]`` and
    the result is flagged as truncated.  At ``t = 0`` the payoff itself is
    returned.
    """
    p = query.params
    ratio = regime_diagnostic(p).ratio
    truncated = force_truncate is not None
    if truncated:
        payoff = payoff.truncated(force_truncate)
    verdict = check_integrability(payoff, p)
    if not verdict:
        raise InadmissiblePayoff(verdict.reason)
    if query.t == 0:
        return KernelPrice(float(payoff(query.x)), 0.0, True, ratio, truncated)

    g = gauge_params(p, Variant.KLEIN_GORDON)
    x, t = query.x, query.t
    s = math.sqrt(p.q) * t
    scale_bt = safe_exp(g.b * t)
    lo, hi = payoff.support()
    if lo == hi:
        return KernelPrice(0.0, 0.0, True, ratio, truncated)

    def integrand(zeta):
        u = x - zeta
        weight = np.zeros_like(zeta)
        for piece in payoff.pieces:
            if not piece.terms:
                continue
            mask = (zeta >= piece.lo) & (zeta < piece.hi)
            if not np.any(mask):
                continue
            val = np.zeros_like(zeta)
            for k, c in piece.terms:
                # exp(a u) * exp(k zeta) combined so admissible tails never overflow
                val = val + c * np.exp(g.a * u + k * zeta)
            weight = np.where(mask, val, weight)
        return weight * (s / (math.pi * (u * u + s * s)))

    res = integrate(integrand, lo, hi, tol=query.tol / scale_bt,
                    breakpoints=payoff.breakpoints, center=x, scale=s, tan_map=True)
    return KernelPrice(float(scale_bt * res.value), float(scale_bt * res.error),
                       True, ratio, truncated)


def kernel_field(payoff: Payoff, grid: Grid, p: MarketParams, tol: float = 1e-10) -> Field2D:
    """Kernel prices at every grid node (all times must be positive)."""
    X, T = grid.mesh()
    vals = np.empty(grid.shape)
    for j in range(grid.nt):
        for i in range(grid.nx):
            vals[j, i] = price_kernel(payoff, KernelQuery(X[j, i], T[j, i], p, tol)).price
    return Field2D(grid, vals)


# --------------------------------------------------------------------------
# checks that G really is the Poisson kernel of psi_tt / q + psi_xx = 0
# --------------------------------------------------------------------------

def poisson_extension(f, x, t, q, support=(-INF, INF), breakpoints=(), tol=1e-12):
    """psi(x, t) = int G(x - zeta, t) f(zeta) dzeta for a callable ``f``."""
    _check_time(t)
    s = math.sqrt(q) * t

    def integrand(zeta):
        u = x - zeta
        return f(zeta) * (s / (math.pi * (u * u + s * s)))

    return integrate(integrand, support[0], support[1], tol=tol, breakpoints=breakpoints,
                     center=x, scale=s, tan_map=True).value


def _convolution(x, t1, t2, q, tol):
    s1, s2 = math.sqrt(q) * t1, math.sqrt(q) * t2

    def integrand(y):
        u = x - y
        return (s1 / (math.pi * (u * u + s1 * s1))) * (s2 / (math.pi * (y * y + s2 * s2)))

    # tan-map around the narrower factor; the wider one is resolved adaptively
    if s2 <= s1:
        return integrate(integrand, -INF, INF, tol=tol, center=0.0, scale=s2,
                         breakpoints=[x]).value
    return integrate(integrand, -INF, INF, tol=tol, center=x, scale=s1,
                     breakpoints=[0.0]).value


def _sample_points(t, q, n=41):
    return np.linspace(-5.0, 5.0, n) * math.sqrt(q) * t


def semigroup_check(t1, t2, q, tol=1e-6, xs=None) -> float:
    """max |(G_t1 * G_t2)(x) - G_{t1+t2}(x)| over sample points ``xs``."""
    _check_time([t1, t2])
    if xs is None:
        xs = _sample_points(t1 + t2, q)
    quad_tol = min(1e-12, 1e-3 * tol)
    return max(
        abs(_convolution(x, t1, t2, q, quad_tol) - cauchy_kernel(x, t1 + t2, q)) for x in xs
    )


def delta_limit_deviation(t1, eps, q, xs=None) -> float:
    """max |(G_t1 * G_eps)(x) - G_t1(x)|; tends to zero as ``eps`` does."""
    _check_time([t1, eps])
    if xs is None:
        xs = _sample_points(t1, q)
    return max(abs(_convolution(x, t1, eps, q, 1e-13) - cauchy_kernel(x, t1, q)) for x in xs)


def laplace_residual(values: np.ndarray, hx: float, ht: float, q: float) -> np.ndarray:
    """Five-point ``psi_tt / q + psi_xx`` at interior nodes of a ``(nt, nx)`` array."""
    v = np.asarray(values)
    c = v[1:-1, 1:-1]
    dxx = (v[1:-1, 2:] - 2 * c + v[1:-1, :-2]) / hx**2
    dtt = (v[2:, 1:-1] - 2 * c + v[:-2, 1:-1]) / ht**2
    return dtt / q + dxx


def harmonicity_study(f, x0, t0, q, hs, support=(-INF, INF), breakpoints=()):
    """Discrete Laplace residual of the Poisson extension at ``(x0, t0)`` for each ``h``.

    Time steps are ``h / sqrt(q)`` so the stencil is isotropic in the
    rescaled time ``sqrt(q) t``.  Returns ``(residuals, slope)`` where slope
    is the least-squares log-log order.
    """
    res = []
    for h in hs:
        ht = h / math.sqrt(q)
        vals = np.empty((3, 3))
        for j, dt in enumerate((-ht, 0.0, ht)):
            for i, dx in enumerate((-h, 0.0, h)):
                vals[j, i] = poisson_extension(f, x0 + dx, t0 + dt, q, support, breakpoints,
                                               tol=1e-14)
        res.append(abs(laplace_residual(vals, h, ht, q)[0, 0]))
    slope = float(np.polyfit(np.log(hs), np.log(res), 1)[0])
    return np.array(res), slope
