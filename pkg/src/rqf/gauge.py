"""Log-price coordinates, grid functions and the exponential gauge.

The financial price ``C(x, t)`` (with ``x = ln S``) and the quantum
wavefunction ``psi(x, t)`` are related by ``psi = exp(-(a x + b t)) C``.
The exponent ``a`` is shared by both variants; ``b`` picks up an extra
``-q/sigma^2`` in the Klein-Gordon case.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GaugeOverflow, GridMismatch, NonPositiveSpot
from .model import MarketParams

#: largest |exponent| accepted before a gauge factor is considered an overflow
MAX_EXPONENT = 700.0


class Variant(str, enum.Enum):
    SCHRODINGER = "schrodinger"
    KLEIN_GORDON = "klein-gordon"


def log_coords(S):
    """x = ln S; accepts scalars or arrays."""
    S_arr = np.asarray(S, dtype=float)
    if np.any(~(S_arr > 0)):
        raise NonPositiveSpot(S)
    out = np.log(S_arr)
    return float(out) if out.ndim == 0 else out


def exp_coords(x):
    out = np.exp(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaugeParams:
    a: float
    b: float
    variant: Variant

    def exponent(self, x, t):
        return self.a * x + self.b * t


def gauge_params(p: MarketParams, variant=Variant.KLEIN_GORDON) -> GaugeParams:
    variant = Variant(variant)
    s2 = p.sigma**2
    a = (p.half_var - p.rate) / s2
    b = (p.half_var + p.rate) ** 2 / (2.0 * s2)
    if variant is Variant.KLEIN_GORDON:
        b -= p.q / s2
    return GaugeParams(a, b, variant)


def safe_exp(exponent):
    """``exp`` that raises :class:`GaugeOverflow` instead of returning inf or 0."""
    e = np.asarray(exponent, dtype=float)
    if e.size and np.max(np.abs(e)) > MAX_EXPONENT:
        raise GaugeOverflow(
            f"gauge exponent {np.max(np.abs(e)):.4g} exceeds safe range {MAX_EXPONENT}"
        )
    out = np.exp(e)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid in (log-price, time)."""

    x_min: float
    x_max: float
    t_min: float
    t_max: float
    nx: int
    nt: int

    def __post_init__(self):
        if self.nx < 3 or self.nt < 3:
            raise ValueError(f"grid needs nx, nt >= 3, got ({self.nx}, {self.nt})")
        if not (self.x_max > self.x_min and self.t_max > self.t_min):
            raise ValueError("grid bounds must be increasing")

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def ht(self) -> float:
        return (self.t_max - self.t_min) / (self.nt - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.nt)

    @property
    def shape(self) -> tuple[int, int]:
        # (time, log-price): rows are time levels so x runs fastest
        return (self.nt, self.nx)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, T) arrays of shape ``(nt, nx)``."""
        return np.meshgrid(self.x, self.t)

    def scaled(self, lam: float) -> "Grid":
        return Grid(
            lam * self.x_min, lam * self.x_max, lam * self.t_min, lam * self.t_max,
            self.nx, self.nt,
        )


@dataclass(frozen=True)
class Field2D:
    """Real samples on a :class:`Grid`; ``values[j, i]`` is the value at (x_i, t_j)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridMismatch(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field2D":
        X, T = grid.mesh()
        return cls(grid, func(X, T))

    def with_values(self, values) -> "Field2D":
        return Field2D(self.grid, values)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write("x,t,value\n")
        xs, ts = self.grid.x, self.grid.t
        for j, t in enumerate(ts):
            for i, x in enumerate(xs):
                buf.write(f"{x:.17g},{t:.17g},{self.values[j, i]:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "Field2D":
        """Parse a CSV written by :meth:`to_csv` (path or text)."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            source = Path(source).read_text()
        rows = list(csv.reader(io.StringIO(source)))
        if not rows or [c.strip() for c in rows[0]] != ["x", "t", "value"]:
            raise ValueError("expected header 'x,t,value'")
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
        xs = np.unique(data[:, 0])
        ts = np.unique(data[:, 1])
        nx, nt = len(xs), len(ts)
        if nx * nt != len(data):
            raise GridMismatch("CSV samples do not form a full rectangular grid")
        grid = Grid(xs[0], xs[-1], ts[0], ts[-1], nx, nt)
        return cls(grid, data[:, 2].reshape(nt, nx))


def check_same_grid(f: Field2D, grid: Grid):
    if f.grid != grid:
        raise GridMismatch(f"field grid {f.grid} differs from {grid}")


def gauge_factor(grid: Grid, g: GaugeParams) -> np.ndarray:
    """exp(a x + b t) on the grid, so that C = factor * psi."""
    X, T = grid.mesh()
    return safe_exp(g.exponent(X, T))


def gauge_forward(C: Field2D, g: GaugeParams) -> Field2D:
    """psi = exp(-(a x + b t)) C."""
    X, T = C.grid.mesh()
    return C.with_values(safe_exp(-g.exponent(X, T)) * C.values)


def gauge_inverse(psi: Field2D, g: GaugeParams) -> Field2D:
    X, T = psi.grid.mesh()
    return psi.with_values(safe_exp(g.exponent(X, T)) * psi.values)

