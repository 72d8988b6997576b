"""Finite differences for the generalised Black-Scholes equation.

In log-price ``x = ln S`` the equation reads

    (sigma^2 / 2q) C_tt + kappa C_t + (sigma^2/2)(C_xx - C_x) + r C_x - r C = 0,
    kappa = 1 - (sigma^2/2 + r)^2 / (2q).

Both second-order coefficients are positive, so the problem is elliptic in
(x, t) and is solved as a Dirichlet problem on a rectangle rather than by
time stepping.  ``quartic_term=True`` adds ``(sigma^2/2 + r)^4 / (8 q sigma^2) C``,
the zeroth-order piece that the direct Klein-Gordon substitution produces.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .classical import Kind, VanillaSpec, bs_price
from .errors import GridMismatch, NoConvergence
from .gauge import Field2D, Grid, check_same_grid
from .model import MarketParams


class Scheme(str, enum.Enum):
    AUTO = "auto"
    CENTRAL = "central"
    UPWIND = "upwind"


class Provenance(str, enum.Enum):
    FROM_PAYOFF = "from-payoff"
    FROM_BS = "from-bs"
    FROM_KERNEL = "from-kernel"
    USER = "user-supplied"


@dataclass(frozen=True)
class Coefficients:
    c_tt: float
    c_t: float
    c_xx: float
    c_x: float
    c_0: float


def coefficients(p: MarketParams | None, sigma=None, rate=None, quartic_term=False
                 ) -> Coefficients:
    """PDE coefficients; ``p=None`` with explicit sigma/rate gives the q = inf limit."""
    if p is None:
        half = 0.5 * sigma * sigma
        return Coefficients(0.0, 1.0, half, rate - half, -rate)
    sp = p.half_var + p.rate
    c0 = -p.rate
    if quartic_term:
        c0 += sp**4 / (8.0 * p.q * p.sigma**2)
    return Coefficients(
        c_tt=p.half_var / p.q,
        c_t=1.0 - sp**2 / (2.0 * p.q),
        c_xx=p.half_var,
        c_x=p.rate - p.half_var,
        c_0=c0,
    )


def _axis_weights(c2, c1, h, scheme):
    """(minus, plus, centre) weights for ``c2 u'' + c1 u'`` on one axis."""
    d2 = c2 / h**2
    central_ok = d2 - abs(c1) / (2 * h) >= 0
    if scheme is Scheme.CENTRAL or (scheme is Scheme.AUTO and central_ok):
        return d2 - c1 / (2 * h), d2 + c1 / (2 * h), -2 * d2, Scheme.CENTRAL
    if c1 >= 0:
        return d2, d2 + c1 / h, -2 * d2 - c1 / h, Scheme.UPWIND
    return d2 - c1 / h, d2, -2 * d2 + c1 / h, Scheme.UPWIND


@dataclass(frozen=True)
class DiscreteOperator:
    """Constant-coefficient five-point stencil on a uniform grid."""

    grid: Grid
    coeffs: Coefficients
    west: float
    east: float
    south: float
    north: float
    centre: float
    scheme_x: Scheme
    scheme_t: Scheme

    @property
    def diagonally_dominant(self) -> bool:
        off = (self.west, self.east, self.south, self.north)
        # with r = 0 the row sums to zero and the comparison is decided by round-off
        return min(off) >= 0 and abs(self.centre) >= sum(off) * (1.0 - 1e-12)

    @property
    def row_sum(self) -> float:
        return self.west + self.east + self.south + self.north + self.centre

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Stencil applied at interior nodes; returns an ``(nt-2, nx-2)`` array."""
        v = np.asarray(values)
        return (
            self.centre * v[1:-1, 1:-1]
            + self.west * v[1:-1, :-2]
            + self.east * v[1:-1, 2:]
            + self.south * v[:-2, 1:-1]
            + self.north * v[2:, 1:-1]
        )

    def describe(self) -> dict:
        return {
            "scheme_x": self.scheme_x.value,
            "scheme_t": self.scheme_t.value,
            "diagonally_dominant": self.diagonally_dominant,
            "stencil": {
                "west": self.west, "east": self.east, "south": self.south,
                "north": self.north, "centre": self.centre,
            },
        }


def operator_from_coefficients(grid: Grid, c: Coefficients, scheme=Scheme.AUTO
                               ) -> DiscreteOperator:
    scheme = Scheme(scheme)
    w, e, cx, sx = _axis_weights(c.c_xx, c.c_x, grid.hx, scheme)
    s, n, ct, st = _axis_weights(c.c_tt, c.c_t, grid.ht, scheme)
    return DiscreteOperator(grid, c, w, e, s, n, cx + ct + c.c_0, sx, st)


def discretize(p: MarketParams, grid: Grid, scheme=Scheme.AUTO, quartic_term=False
               ) -> DiscreteOperator:
    """Stencil for the generalised equation.

    With ``scheme="auto"`` each axis uses central first differences when that
    keeps every off-diagonal weight non-negative (diagonal dominance) and
    one-sided upwind differences otherwise.
    """
    return operator_from_coefficients(grid, coefficients(p, quartic_term=quartic_term), scheme)


def classical_operator(sigma: float, rate: float, grid: Grid, scheme=Scheme.CENTRAL
                       ) -> DiscreteOperator:
    """The q = inf (parabolic Black-Scholes) operator on the same grid."""
    return operator_from_coefficients(grid, coefficients(None, sigma, rate), scheme)


def residual(fld: Field2D, p: MarketParams, grid: Grid | None = None, scheme=Scheme.CENTRAL,
             quartic_term=False) -> np.ndarray:
    """Interior residual of ``fld`` under the discretised equation.

    Central differences by default: here the stencil measures consistency,
    not stability.
    """
    grid = fld.grid if grid is None else grid
    check_same_grid(fld, grid)
    return discretize(p, grid, scheme, quartic_term).apply(fld.values)


# --------------------------------------------------------------------------
# boundary data and the SOR solve
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data on the four edges of a grid.

    ``t_lo``/``t_hi`` have length ``nx`` (the t = t_min and t = t_max rows),
    ``x_lo``/``x_hi`` have length ``nt`` (the x = x_min and x = x_max columns).
    """

    grid: Grid
    t_lo: np.ndarray = field(repr=False)
    t_hi: np.ndarray = field(repr=False)
    x_lo: np.ndarray = field(repr=False)
    x_hi: np.ndarray = field(repr=False)
    provenance: Provenance = Provenance.USER

    def __post_init__(self):
        g = self.grid
        for name, n in (("t_lo", g.nx), ("t_hi", g.nx), ("x_lo", g.nt), ("x_hi", g.nt)):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise GridMismatch(f"{name} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        corners = [
            (self.t_lo[0], self.x_lo[0]), (self.t_lo[-1], self.x_hi[0]),
            (self.t_hi[0], self.x_lo[-1]), (self.t_hi[-1], self.x_hi[-1]),
        ]
        for u, v in corners:
            if not math.isclose(u, v, rel_tol=1e-9, abs_tol=1e-12):
                raise ValueError(f"inconsistent corner values {u!r} vs {v!r}")

    @classmethod
    def from_field(cls, fld: Field2D, provenance=Provenance.USER) -> "BoundaryData":
        v = fld.values
        return cls(fld.grid, v[0, :], v[-1, :], v[:, 0], v[:, -1], provenance)

    @classmethod
    def from_function(cls, grid: Grid, func, provenance=Provenance.USER) -> "BoundaryData":
        x, t = grid.x, grid.t
        return cls(
            grid,
            func(x, np.full_like(x, t[0])), func(x, np.full_like(x, t[-1])),
            func(np.full_like(t, x[0]), t), func(np.full_like(t, x[-1]), t),
            provenance,
        )

    @property
    def scale(self) -> float:
        return float(max(np.max(np.abs(a)) for a in (self.t_lo, self.t_hi, self.x_lo, self.x_hi)))

    def embed(self, interior=None) -> np.ndarray:
        u = np.zeros(self.grid.shape)
        if interior is not None:
            u[1:-1, 1:-1] = interior
        u[0, :], u[-1, :] = self.t_lo, self.t_hi
        u[:, 0], u[:, -1] = self.x_lo, self.x_hi
        return u


def bs_field(grid: Grid, kind, strike: float, maturity: float, sigma: float, rate: float
             ) -> Field2D:
    """Black-Scholes values C(x, t) with ``t`` calendar time and ``x = ln S``."""
    if grid.t_max >= maturity:
        raise ValueError("grid must stop before maturity")
    X, T = grid.mesh()
    return Field2D(grid, bs_price(kind, np.exp(X), strike, maturity - T, sigma, rate))


def bs_boundary(grid: Grid, kind, strike, maturity, sigma, rate) -> BoundaryData:
    return BoundaryData.from_field(bs_field(grid, kind, strike, maturity, sigma, rate),
                                   Provenance.FROM_BS)


def kernel_boundary(grid: Grid, payoff, p: MarketParams, tol=1e-10) -> BoundaryData:
    from .kernel_pricer import KernelQuery, price_kernel

    def f(x, t):
        return np.array([price_kernel(payoff, KernelQuery(xi, ti, p, tol)).price
                         for xi, ti in zip(x, t)])

    return BoundaryData.from_function(grid, f, Provenance.FROM_KERNEL)


def optimal_omega(op: DiscreteOperator) -> float:
    """SOR factor from the Jacobi spectral radius of the constant-coefficient stencil."""
    g = op.grid
    rho = (
        2 * math.sqrt(max(op.west * op.east, 0.0)) * math.cos(math.pi / (g.nx - 1))
        + 2 * math.sqrt(max(op.south * op.north, 0.0)) * math.cos(math.pi / (g.nt - 1))
    ) / abs(op.centre)
    rho = min(rho, 1.0 - 1e-12)
    return 2.0 / (1.0 + math.sqrt(1.0 - rho * rho))


@dataclass(frozen=True)
class BVPResult:
    field: Field2D
    iterations: int
    residual: float  # max |A u| / |centre|, relative to the boundary scale
    omega: float
    provenance: Provenance

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "omega": self.omega,
            "provenance": self.provenance.value,
        }


DIVERGENCE_FACTOR = 1e6


def solve_bvp(op: DiscreteOperator, bd: BoundaryData, tol=1e-10, max_iter=200_000,
              omega=1.5, check_every=10) -> BVPResult:
    """Red-black SOR for ``op u = 0`` with Dirichlet data ``bd``.

    Convergence is declared when ``max|A u| / |a_centre| <= tol * scale``
    where ``scale`` is the largest boundary magnitude.  A residual that grows
    past ``DIVERGENCE_FACTOR`` times its starting value (or overflows) stops
    the iteration early with :class:`NoConvergence`.  Red nodes
    (``i + j`` even) are swept before black ones in every iteration, so the
    result does not depend on how each colour is parallelised.
    """
    if bd.grid != op.grid:
        raise GridMismatch("boundary data and operator live on different grids")
    if omega == "optimal":
        omega = optimal_omega(op)
    omega = float(omega)
    if not 0 < omega < 2:
        raise ValueError(f"relaxation factor must lie in (0, 2), got {omega}")
    g = op.grid
    u = bd.embed()
    scale = bd.scale
    if scale == 0:
        return BVPResult(Field2D(g, u), 0, 0.0, omega, bd.provenance)

    jj, ii = np.meshgrid(np.arange(1, g.nt - 1), np.arange(1, g.nx - 1), indexing="ij")
    colours = [(jj + ii) % 2 == 0, (jj + ii) % 2 == 1]
    inv_c = 1.0 / op.centre
    target = tol * scale

    def res_norm():
        return float(np.max(np.abs(op.apply(u)))) * abs(inv_c)

    achieved = start = res_norm()
    it = 0
    while achieved > target:
        if it >= max_iter:
            raise NoConvergence(it, achieved / scale)
        if not achieved <= DIVERGENCE_FACTOR * start:
            raise NoConvergence(it, achieved / scale, message=(
                f"SOR diverging at omega={omega:g} after {it} iterations (residual "
                f"{achieved / scale:.3e}); try omega='optimal' or 1.0"))
        for mask in colours:
            inner = u[1:-1, 1:-1]
            nb = (op.west * u[1:-1, :-2] + op.east * u[1:-1, 2:]
                  + op.south * u[:-2, 1:-1] + op.north * u[2:, 1:-1])
            gs = -nb * inv_c
            inner[mask] += omega * (gs[mask] - inner[mask])
        it += 1
        if it % check_every == 0:
            achieved = res_norm()
    return BVPResult(Field2D(g, u), it, achieved / scale, omega, bd.provenance)


# --------------------------------------------------------------------------
# classical limit
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitRow:
    q: float
    deviation: float
    grid_limited: bool


@dataclass(frozen=True)
class LimitStudy:
    rows: tuple
    slope: float
    floor: float  # residual of the same field under the q = inf operator

    def to_csv(self, path=None) -> str:
        lines = ["q,deviation,slope_estimate"]
        for r in self.rows:
            s = "nan" if r.grid_limited else f"{self.slope:.17g}"
            lines.append(f"{r.q:.17g},{r.deviation:.17g},{s}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def as_dict(self) -> dict:
        return {
            "rows": [
                {"q": r.q, "deviation": r.deviation, "grid_limited": r.grid_limited}
                for r in self.rows
            ],
            "slope": self.slope,
            "floor": self.floor,
        }


def default_limit_grid(spec: VanillaSpec, sigma: float, n=401) -> Grid:
    """Window of half-width sigma sqrt(T) / 10 around the strike, t in [0, sigma sqrt(T) / 10].

    The residual of the classical operator (the floor of the study) is set
    by h^2 truncation on wide windows and by cancellation error in the
    ``1/h^2`` stencil on narrow ones; this width balances the two.
    """
    w = 0.1 * sigma * math.sqrt(spec.maturity)
    k = math.log(spec.strike)
    return Grid(k - w, k + w, 0.0, min(w, 0.5 * spec.maturity), n, n)


def limit_study(base: MarketParams, q_list, grid: Grid, spec: VanillaSpec,
                floor_factor=10.0) -> LimitStudy:
    """How fast the Black-Scholes field stops being a residual-free solution as q grows.

    For each ``q`` the deviation is ``max |A_q C_BS|`` over interior nodes.
    In the continuum this is ``O(1/q)``; on the grid it bottoms out at the
    residual of the classical operator itself.  Values within
    ``floor_factor`` of that floor are flagged and left out of the slope fit.
    """
    q_list = [float(q) for q in q_list]
    if any(b < a for a, b in zip(q_list[:-1], q_list[1:])):
        raise ValueError("q_list must be ascending")
    C = bs_field(grid, Kind(spec.kind), spec.strike, spec.maturity, base.sigma, base.rate)
    floor = float(np.max(np.abs(
        classical_operator(base.sigma, base.rate, grid).apply(C.values))))
    rows = []
    for q in q_list:
        p = MarketParams(base.sigma, base.rate, q)
        dev = float(np.max(np.abs(residual(C, p, grid, Scheme.CENTRAL))))
        rows.append(LimitRow(q, dev, dev <= floor_factor * floor))
    used = [r for r in rows if not r.grid_limited]
    if len({r.q for r in used}) >= 2:
        slope = float(np.polyfit(np.log10([r.q for r in used]),
                                 np.log10([r.deviation for r in used]), 1)[0])
    else:
        slope = float("nan")
    return LimitStudy(tuple(rows), slope, floor)


def plane_wave(c: Coefficients, alpha: complex, root: int = 0):
    """Exact solution ``Re exp(alpha x + beta t)`` of the continuous equation.

    ``beta`` solves ``c_tt b^2 + c_t b + c_xx a^2 + c_x a + c_0 = 0``; ``root``
    picks which of the two roots.  Complex ``alpha`` gives oscillation in x.
    """
    rest = c.c_xx * alpha * alpha + c.c_x * alpha + c.c_0
    if c.c_tt == 0:
        beta = -rest / c.c_t
    else:
        roots = np.roots([c.c_tt, c.c_t, rest])
        beta = sorted(roots, key=lambda z: (z.real, z.imag))[root]

    def f(x, t):
        return np.real(np.exp(alpha * np.asarray(x) + beta * np.asarray(t)))

    return f
