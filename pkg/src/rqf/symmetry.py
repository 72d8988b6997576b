"""Complex-coordinate form of the pricing equation and its symmetries.

With ``z = x + i sqrt(q) t`` the generalised equation becomes

    4 C_{z zbar} + 2 (Abar C_z + A C_zbar) + (A Abar - q/sigma^4) C = 0,

and dropping the mass term ``q/sigma^4`` leaves an equation that is
invariant under every analytic map ``z -> z'(z)`` once ``C`` is multiplied
by ``exp(((A (z - z') + Abar (zbar - zbar')) / 2)``.  This module evaluates
both residuals on grids, applies finite rotations and scalings to sampled
fields, and does exact Laurent-polynomial algebra for the infinitesimal
generators.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import GridMismatch, ResampleOutOfDomain
from .gauge import Field2D, Grid, Variant, gauge_params
from .model import MarketParams, drift_coefficient

# --------------------------------------------------------------------------
# complex fields and residuals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexField:
    grid: Grid
    values: np.ndarray = field(repr=False)
    params: MarketParams = None

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise GridMismatch(f"values shape {v.shape} != grid shape {self.grid.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, params: MarketParams, func) -> "ComplexField":
        """``func(z, zbar)`` sampled at ``z = x + i sqrt(q) t``."""
        z = z_coords(grid, params.q)
        return cls(grid, func(z, np.conj(z)), params)

    @classmethod
    def from_real(cls, fld: Field2D, params: MarketParams) -> "ComplexField":
        return cls(fld.grid, fld.values.astype(complex), params)

    @property
    def z(self) -> np.ndarray:
        return z_coords(self.grid, self.params.q)


def z_coords(grid: Grid, q: float) -> np.ndarray:
    X, T = grid.mesh()
    return X + 1j * math.sqrt(q) * T


def _central(v, hx, ht):
    c = v[1:-1, 1:-1]
    cx = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * hx)
    ct = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * ht)
    cxx = (v[1:-1, 2:] - 2 * c + v[1:-1, :-2]) / hx**2
    ctt = (v[2:, 1:-1] - 2 * c + v[:-2, 1:-1]) / ht**2
    return c, cx, ct, cxx, ctt


def _residual(fld: ComplexField, mass: float) -> np.ndarray:
    p = fld.params
    A = drift_coefficient(p).value
    Ab = A.conjugate()
    g = fld.grid
    c, cx, ct, cxx, ctt = _central(fld.values, g.hx, g.ht)
    iq = 1j / math.sqrt(p.q)
    cz = 0.5 * (cx - iq * ct)
    czb = 0.5 * (cx + iq * ct)
    lap4 = cxx + ctt / p.q  # 4 C_{z zbar}
    return lap4 + 2 * (Ab * cz + A * czb) + (A * Ab - mass) * c


def residual_cmbs(fld: ComplexField) -> np.ndarray:
    """Interior residual of the full (massive) z-coordinate equation."""
    p = fld.params
    return _residual(fld, p.q / p.sigma**4)


def residual_cbs(fld: ComplexField) -> np.ndarray:
    """Interior residual with the mass term dropped (the conformal equation)."""
    return _residual(fld, 0.0)


def _gauge_exponent(A: complex, z):
    # -(A z + Abar zbar) / 2 = -Re(A z)
    return -(A * z).real


def manufactured_massive(params: MarketParams, k: complex = 1 + 0.5j, mass: float | None = None):
    """Exact solution ``exp(-Re(A z)) exp(k z + mass/(4k) zbar)``.

    The gauge factor reduces the massive equation to ``4 u_{z zbar} = mass u``,
    which the exponential satisfies for any nonzero ``k``.  ``mass`` defaults
    to q/sigma^4; pass another value to manufacture solutions of an equation
    with a different zeroth-order coefficient.
    """
    A = drift_coefficient(params).value
    m = params.q / params.sigma**4 if mass is None else mass

    def func(z, zb):
        return np.exp(_gauge_exponent(A, z) + k * z + (m / (4 * k)) * zb)

    return func


def manufactured_conformal(params: MarketParams, u=None):
    """``exp(-Re(A z)) u(z, zbar)`` with harmonic ``u`` (default ``z^3 + zbar^3``)."""
    A = drift_coefficient(params).value
    if u is None:
        def u(z, zb):
            return z**3 + zb**3

    def func(z, zb):
        return np.exp(_gauge_exponent(A, z)) * u(z, zb)

    return func


# --------------------------------------------------------------------------
# finite transformations of sampled fields
# --------------------------------------------------------------------------

def _resample(fld: ComplexField, x, t):
    g = fld.grid
    tol = 1e-12 * max(1.0, abs(g.x_max), abs(g.x_min), abs(g.t_max), abs(g.t_min))
    if (np.min(x) < g.x_min - tol or np.max(x) > g.x_max + tol
            or np.min(t) < g.t_min - tol or np.max(t) > g.t_max + tol):
        raise ResampleOutOfDomain(
            "preimage points leave the source grid; supply a larger source field "
            "or a smaller target grid"
        )
    x = np.clip(x, g.x_min, g.x_max)
    t = np.clip(t, g.t_min, g.t_max)
    re = RectBivariateSpline(g.t, g.x, fld.values.real, kx=3, ky=3)
    im = RectBivariateSpline(g.t, g.x, fld.values.imag, kx=3, ky=3)
    return re.ev(t, x) + 1j * im.ev(t, x)


def apply_rotation(fld: ComplexField, alpha: float, target: Grid | None = None) -> ComplexField:
    """``z' = e^{i alpha} z`` with the matching multiplier on ``C``.

    The transformed field is sampled on ``target`` (default: the source
    grid) by bicubic-spline interpolation of the source at the preimage
    points ``z = e^{-i alpha} z'``.
    """
    target = fld.grid if target is None else target
    if alpha == 0 and target == fld.grid:
        return fld
    p = fld.params
    A = drift_coefficient(p).value
    sq = math.sqrt(p.q)
    zp = z_coords(target, p.q)
    z = cmath.exp(-1j * alpha) * zp
    src = _resample(fld, z.real, z.imag / sq)
    # C'(z') = exp(((A (z - z') + Abar (zbar - zbar')) / 2) C(z) = exp(Re(A (z - z'))) C(z)
    return ComplexField(target, np.exp((A * (z - zp)).real) * src, p)


def apply_scale(fld, lam: float, params: MarketParams | None = None):
    """``S -> S^lam, t -> lam t`` with ``C' = S^{(lam-1) a} exp((lam-1) b t) C``.

    ``(a, b)`` are the Klein-Gordon gauge exponents.  Works on a
    :class:`ComplexField` or a real :class:`Field2D` (then ``params`` is
    required) and returns the same kind of field on the scaled grid.
    """
    if not lam > 0:
        raise ValueError("scale factor must be > 0")
    p = getattr(fld, "params", None) or params
    if p is None:
        raise ValueError("market parameters are required to scale a real field")
    g = gauge_params(p, Variant.KLEIN_GORDON)
    X, T = fld.grid.mesh()
    factor = np.exp((lam - 1.0) * (g.a * X + g.b * T))
    new_grid = fld.grid.scaled(lam)
    if isinstance(fld, ComplexField):
        return ComplexField(new_grid, factor * fld.values, p)
    return Field2D(new_grid, factor * fld.values)


def residual_norm(res: np.ndarray) -> float:
    return float(np.max(np.abs(res)))


# --------------------------------------------------------------------------
# Laurent polynomials and the Witt generators
# --------------------------------------------------------------------------

def _is_zero(c) -> bool:
    return not c


def _conj(c):
    if hasattr(c, "parent") and hasattr(c, "y"):  # sympy Gaussian rational
        return c.parent()(c.x, -c.y)
    return c.conjugate()


def _to_complex(c) -> complex:
    if hasattr(c, "parent") and hasattr(c, "y"):
        return complex(float(c.x), float(c.y))
    return complex(c)


class LaurentPoly:
    """Finite Laurent polynomial ``sum c_n z^n`` with exact or float coefficients.

    Keys are integer exponents, or tuples ``(m, p)`` for monomials
    ``z^m zbar^p``.  Zero coefficients are never stored.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        self.coeffs = {}
        for n, c in (coeffs or {}).items():
            if not _is_zero(c):
                self.coeffs[n] = c

    @classmethod
    def monomial(cls, n, c=1):
        return cls({n: c})

    def __repr__(self):
        terms = " + ".join(f"({c})*z^{n}" for n, c in sorted(self.coeffs.items()))
        return f"LaurentPoly({terms or '0'})"

    def __eq__(self, other):
        return isinstance(other, LaurentPoly) and self.coeffs == other.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def __add__(self, other):
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            out[n] = out[n] + c if n in out else c
        return LaurentPoly(out)

    def __neg__(self):
        return LaurentPoly({n: -c for n, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        return LaurentPoly({n: s * c for n, c in self.coeffs.items()})

    @property
    def window(self):
        if not self.coeffs:
            return None
        keys = list(self.coeffs)
        if isinstance(keys[0], tuple):
            return tuple((min(k[i] for k in keys), max(k[i] for k in keys)) for i in range(2))
        return (min(keys), max(keys))

    def max_abs(self) -> float:
        return max((abs(_to_complex(c)) for c in self.coeffs.values()), default=0.0)

    def conj(self):
        """Coefficient-wise conjugate (the barred series)."""
        return LaurentPoly({n: _conj(c) for n, c in self.coeffs.items()})

    def __call__(self, z, zb=None):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for n, c in self.coeffs.items():
            c = _to_complex(c)
            if isinstance(n, tuple):
                out = out + c * z ** n[0] * np.asarray(zb, dtype=complex) ** n[1]
            else:
                out = out + c * z**n
        return out

    def derivative(self, var=0):
        out = {}
        for n, c in self.coeffs.items():
            if isinstance(n, tuple):
                e = n[var]
                if e:
                    key = (n[0] - 1, n[1]) if var == 0 else (n[0], n[1] - 1)
                    out[key] = e * c
            elif n:
                out[n - 1] = n * c
        return LaurentPoly(out)

    def times_power(self, k, var=0):
        out = {}
        for n, c in self.coeffs.items():
            if isinstance(n, tuple):
                key = (n[0] + k, n[1]) if var == 0 else (n[0], n[1] + k)
            else:
                key = n + k
            out[key] = c
        return LaurentPoly(out)

    @staticmethod
    def product(f: "LaurentPoly", g: "LaurentPoly") -> "LaurentPoly":
        """``f(z) g(zbar)`` as a two-variable polynomial."""
        out = {}
        for m, a in f.coeffs.items():
            for p, b in g.coeffs.items():
                out[(m, p)] = a * b
        return LaurentPoly(out)


@dataclass(frozen=True)
class WittGenerator:
    """``l_n = -z^{n+offset} (A/2 + d/dz)`` (or its barred copy acting on zbar).

    ``offset=1`` matches infinitesimal maps ``z -> z + sum eps_n z^{n+1}`` and
    closes the Witt algebra ``[l_n, l_k] = (n - k) l_{n+k}``.  ``offset=0``
    is kept for comparison; those operators satisfy the same relation
    only with ``l_{n+k-1}`` on the right.
    """

    n: int
    A: object
    barred: bool = False
    offset: int = 1

    @property
    def drift(self):
        return _conj(self.A) if self.barred else self.A

    def __call__(self, f: LaurentPoly) -> LaurentPoly:
        return witt_apply(self, f)


def witt_apply(g: WittGenerator, f: LaurentPoly) -> LaurentPoly:
    """``z^m -> -(A/2) z^{n+offset+m} - m z^{n+offset+m-1}``."""
    var = 1 if g.barred else 0
    half = g.drift / 2
    shift = g.n + g.offset
    return -(f.scale(half) + f.derivative(var)).times_power(shift, var)


def witt_commutator_check(n: int, k: int, basis_degrees, A, offset: int = 1) -> float:
    """Largest coefficient of ``([l_n, l_k] - (n-k) l_{n+k}) z^m`` over the basis.

    With exact coefficients (integers, Fractions, Gaussian rationals) a
    passing check returns exactly 0.
    """
    ln, lk = WittGenerator(n, A, offset=offset), WittGenerator(k, A, offset=offset)
    lnk = WittGenerator(n + k, A, offset=offset)
    worst = 0.0
    for m in basis_degrees:
        f = LaurentPoly.monomial(m)
        dev = ln(lk(f)) - lk(ln(f)) - lnk(f).scale(n - k)
        worst = max(worst, dev.max_abs())
    return worst


def mixed_commutator_check(n: int, k: int, degrees, A) -> float:
    """``[lbar_n, l_k]`` on monomials ``z^m zbar^p``; identically zero."""
    lb, l = WittGenerator(n, A, barred=True), WittGenerator(k, A)
    worst = 0.0
    for m in degrees:
        for p in degrees:
            f = LaurentPoly.monomial((m, p))
            worst = max(worst, (lb(l(f)) - l(lb(f))).max_abs())
    return worst


def _exact_sqrt(fr):
    from fractions import Fraction

    n, d = math.isqrt(fr.numerator), math.isqrt(fr.denominator)
    if n * n == fr.numerator and d * d == fr.denominator:
        return Fraction(n, d)
    return None


def exact_drift(p: MarketParams):
    """``A`` as a Gaussian rational, or ``None`` if sqrt(q) is irrational.

    Parameters are read as the decimals they print as, so ``sigma=0.2``
    means exactly 1/5.
    """
    from fractions import Fraction

    from sympy.polys.domains import QQ_I

    sigma, r, q = (Fraction(repr(v)) for v in (p.sigma, p.rate, p.q))
    sq = _exact_sqrt(q)
    if sq is None:
        return None
    s2 = sigma * sigma
    half = s2 / 2
    re = -(half - r) / s2
    im = ((half + r) ** 2 - 2 * q) / (2 * sq * s2)
    return QQ_I(re, im)


def witt_drift(p: MarketParams):
    """Exact ``A`` when available, otherwise the floating-point value."""
    exact = exact_drift(p)
    return drift_coefficient(p).value if exact is None else exact


# --------------------------------------------------------------------------
# infinitesimal versus finite conformal maps
# --------------------------------------------------------------------------

def _two_variable(C) -> LaurentPoly:
    if isinstance(C, tuple):
        return LaurentPoly.product(*C)
    if C.coeffs and not isinstance(next(iter(C.coeffs)), tuple):
        return LaurentPoly.product(C, LaurentPoly({0: 1}))
    return C


@dataclass(frozen=True)
class Variation:
    holomorphic: LaurentPoly
    antiholomorphic: LaurentPoly

    @property
    def total(self) -> LaurentPoly:
        return self.holomorphic + self.antiholomorphic

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.total(z, np.conj(z))


def infinitesimal_variation(eps: LaurentPoly, C, A) -> Variation:
    """First-order change of ``C`` under ``z -> z + eps(z)``.

    ``eps`` is the map's Laurent series keyed by power of z.  ``C`` is a
    two-variable :class:`LaurentPoly`, a pair ``(f, g)`` read as
    ``f(z) g(zbar)``, or a one-variable polynomial in ``z`` alone.  Both
    parts of the result are two-variable, keyed ``(power of z, power of zbar)``.
    """
    C = _two_variable(C)
    holo, anti = LaurentPoly(), LaurentPoly()
    for n, e in eps.coeffs.items():
        holo = holo + WittGenerator(n - 1, A)(C).scale(e)
        anti = anti + WittGenerator(n - 1, A, barred=True)(C).scale(_conj(e))
    return Variation(holo, anti)


def apply_conformal(C, eps: LaurentPoly, A, points, newton_tol=1e-15, max_iter=50):
    """``C'(w) = exp(Re(A (z - w))) C(z, zbar)`` where ``z + eps(z) = w``.

    ``C`` is callable as ``C(z, zbar)``.  Preimages are found by Newton's
    method starting from ``w``.
    """
    w = np.asarray(points, dtype=complex)
    A = _to_complex(A)
    deps = eps.derivative()
    z = w.copy()
    for _ in range(max_iter):
        fz = z + eps(z) - w
        step = fz / (1.0 + deps(z))
        z = z - step
        if np.max(np.abs(step)) <= newton_tol * max(1.0, float(np.max(np.abs(w)))):
            break
    return np.exp((A * (z - w)).real) * C(z, np.conj(z))


@dataclass(frozen=True)
class RichardsonResult:
    scales: tuple
    errors: tuple
    slope: float


def variation_consistency(eps: LaurentPoly, C, A, points, scales=(1e-2, 1e-3, 1e-4)
                          ) -> RichardsonResult:
    """Compare finite and infinitesimal transforms for ``eps`` scaled by each factor.

    The error ``max |(C'(w) - C(w)) - dC(w)|`` should fall like ``s^2``.
    """
    C = _two_variable(C)
    A = _to_complex(A)
    w = np.asarray(points, dtype=complex)
    base = C(w, np.conj(w))
    errs = []
    for s in scales:
        e_s = eps.scale(s)
        fin = apply_conformal(C, e_s, A, w) - base
        inf = infinitesimal_variation(e_s, C, A)(w)
        errs.append(float(np.max(np.abs(fin - inf))))
    slope = float(np.polyfit(np.log(scales), np.log(errs), 1)[0])
    return RichardsonResult(tuple(scales), tuple(errs), slope)


# --------------------------------------------------------------------------
# canned invariance studies (shared by the CLI, tests and demos)
# --------------------------------------------------------------------------

#: parameters with ratio ~0.92, so the mass term matters
STUDY_PARAMS = MarketParams(1.0, 0.05, 1.0)


@dataclass(frozen=True)
class InvarianceRow:
    transform: str
    amount: float
    baseline: float  # residual norm of the untransformed field
    transformed: float
    ratio: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("transform", "amount", "baseline",
                                              "transformed", "ratio")}


def rotation_study(alphas, params: MarketParams = STUDY_PARAMS, n_src=121, n_tgt=81
                   ) -> list[InvarianceRow]:
    """Rotate a massive manufactured solution and compare full-equation residuals.

    The source lives on ``[-1.5, 1.5]^2`` so every rotated preimage of the
    ``[-1, 1]^2`` target stays inside it.  The baseline is the unrotated
    field resampled on the same target, so both residuals cover one domain.
    """
    src = Grid(-1.5, 1.5, -1.5, 1.5, n_src, n_src)
    tgt = Grid(-1.0, 1.0, -1.0, 1.0, n_tgt, n_tgt)
    fld = ComplexField.from_function(src, params, manufactured_massive(params))
    r0 = residual_norm(residual_cmbs(apply_rotation(fld, 0.0, tgt)))
    rows = []
    for a in alphas:
        r1 = residual_norm(residual_cmbs(apply_rotation(fld, a, tgt)))
        rows.append(InvarianceRow("rotation", float(a), r0, r1, r1 / r0))
    return rows


def scale_study(lams, params: MarketParams = STUDY_PARAMS, n=81, massive=False
                ) -> list[InvarianceRow]:
    """Scale a manufactured solution and compare residuals before and after.

    By default the conformal solution is checked against the conformal
    equation.  ``massive=True`` is the negative control: a solution of the
    full equation, checked against the full equation, which dilations do
    not preserve.
    """
    g = Grid(-1.0, 1.0, -1.0, 1.0, n, n)
    if massive:
        fld = ComplexField.from_function(g, params, manufactured_massive(params))
        res = residual_cmbs
    else:
        fld = ComplexField.from_function(g, params, manufactured_conformal(params))
        res = residual_cbs
    r0 = residual_norm(res(fld))
    name = "scale-massive" if massive else "scale"
    rows = []
    for lam in lams:
        r1 = residual_norm(res(apply_scale(fld, lam)))
        rows.append(InvarianceRow(name, float(lam), r0, r1, r1 / r0))
    return rows


#: map, test field and sample points for the Richardson study
STUDY_EPS = LaurentPoly({0: 0.1, 1: 1.0, 2: 0.3 + 0.2j})
STUDY_FIELD = (LaurentPoly({1: 1.0, 2: 0.5}), LaurentPoly({0: 1.0, 1: -0.25j}))


def richardson_study(params: MarketParams = STUDY_PARAMS, scales=(1e-2, 1e-3, 1e-4)
                     ) -> RichardsonResult:
    pts = 0.8 * np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 13))
    return variation_consistency(STUDY_EPS, STUDY_FIELD, witt_drift(params), pts, scales)
