import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import QQ_I

from rqf import GridMismatch, MarketParams, ResampleOutOfDomain
from rqf.gauge import Field2D, Grid
from rqf.symmetry import (STUDY_PARAMS, ComplexField, LaurentPoly, WittGenerator, apply_conformal,
                          apply_rotation, apply_scale, exact_drift, infinitesimal_variation,
                          manufactured_conformal, manufactured_massive, mixed_commutator_check,
                          residual_cbs, residual_cmbs, residual_norm, richardson_study,
                          rotation_study, scale_study, witt_apply, witt_commutator_check,
                          witt_drift, z_coords)

P = STUDY_PARAMS
A_EXACT = exact_drift(P)
A_HALF = A_EXACT / 2


def grid(n, w=1.0):
    return Grid(-w, w, -w, w, n, n)


def test_z_coordinates():
    g = Grid(0.0, 1.0, 0.0, 2.0, 3, 3)
    z = z_coords(g, 4.0)
    assert z[2, 1] == 0.5 + 1j * 2.0 * 2.0


def test_complex_field_shape_checked():
    with pytest.raises(GridMismatch):
        ComplexField(grid(5), np.zeros((4, 4)), P)


def test_manufactured_massive_second_order():
    res = [residual_norm(residual_cmbs(ComplexField.from_function(grid(n), P,
                                                                  manufactured_massive(P))))
           for n in (21, 41, 81)]
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(np.abs(orders - 2) < 0.3)


def test_manufactured_conformal_second_order():
    res = [residual_norm(residual_cbs(ComplexField.from_function(grid(n), P,
                                                                 manufactured_conformal(P))))
           for n in (21, 41, 81)]
    orders = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert np.all(np.abs(orders - 2) < 0.3)


def test_quadratic_harmonic_also_works():
    u = lambda z, zb: z**2 + zb**2
    f = ComplexField.from_function(grid(41), P, manufactured_conformal(P, u))
    assert residual_norm(residual_cbs(f)) < 0.05


def test_zero_field_zero_residual():
    f = ComplexField(grid(9), np.zeros((9, 9)), P)
    assert residual_norm(residual_cmbs(f)) == 0 and residual_norm(residual_cbs(f)) == 0


def test_cmbs_minus_cbs_is_mass_term():
    rng = np.random.default_rng(1)
    v = rng.normal(size=(15, 15)) + 1j * rng.normal(size=(15, 15))
    f = ComplexField(grid(15), v, P)
    diff = residual_cmbs(f) - residual_cbs(f)
    assert np.allclose(diff, -(P.q / P.sigma**4) * v[1:-1, 1:-1], rtol=1e-13, atol=1e-13)


def test_rotation_identities():
    f = ComplexField.from_function(grid(41), P, manufactured_massive(P))
    assert apply_rotation(f, 0.0) is f
    back = apply_rotation(f, 2 * math.pi)
    assert np.max(np.abs(back.values - f.values)) < 1e-10 * np.max(np.abs(f.values))


def test_rotation_out_of_domain():
    f = ComplexField.from_function(grid(21), P, manufactured_massive(P))
    with pytest.raises(ResampleOutOfDomain):
        apply_rotation(f, 0.5)


@pytest.mark.parametrize("alpha", [0.3, 1.0])
def test_rotation_keeps_massive_residual_small(alpha):
    (row,) = rotation_study([alpha])
    assert row.ratio < 10


def test_scale_identity_bit_exact():
    f = ComplexField.from_function(grid(21), P, manufactured_conformal(P))
    g = apply_scale(f, 1.0)
    assert np.array_equal(g.values, f.values) and g.grid == f.grid
    real = Field2D(grid(21), np.ones((21, 21)))
    assert np.array_equal(apply_scale(real, 1.0, P).values, real.values)


def test_scale_real_field_requires_params():
    with pytest.raises(ValueError):
        apply_scale(Field2D(grid(5), np.ones((5, 5))), 1.5)
    with pytest.raises(ValueError):
        apply_scale(ComplexField(grid(5), np.ones((5, 5)), P), 0.0)


def test_scale_multiplier_matches_closed_form():
    # C' = S^{(lam-1)(sigma^2/2-r)/sigma^2} exp((lam-1)((sigma^2/2+r)^2-2q) t/(2 sigma^2)) C
    p = MarketParams(0.3, 0.04, 0.5)
    lam = 1.7
    g = Grid(4.0, 5.0, 0.0, 1.0, 5, 5)
    out = apply_scale(Field2D(g, np.ones((5, 5))), lam, p)
    X, T = g.mesh()
    s2 = p.sigma**2
    expected = (np.exp(X) ** ((lam - 1) * (s2 / 2 - p.rate) / s2)
                * np.exp((lam - 1) * ((s2 / 2 + p.rate) ** 2 - 2 * p.q) * T / (2 * s2)))
    assert np.allclose(out.values, expected, rtol=1e-12)
    assert out.grid == g.scaled(lam)


@pytest.mark.parametrize("lam", [0.5, 1.5])
def test_scale_keeps_conformal_residual_small(lam):
    (row,) = scale_study([lam])
    assert row.ratio < 10


def test_scale_breaks_massive_equation():
    (row,) = scale_study([1.5], massive=True)
    assert row.ratio > 10
    # a conformal solution is not a solution of the massive equation to begin with,
    # and scaling it does not make it one
    f = ComplexField.from_function(grid(81), P, manufactured_conformal(P))
    r_cbs = residual_norm(residual_cbs(f))
    r_scaled = residual_norm(residual_cmbs(apply_scale(f, 1.5)))
    assert r_scaled > 100 * r_cbs


# ---- Witt algebra ---------------------------------------------------------

def z(n, c=1):
    return LaurentPoly.monomial(n, c)


def test_witt_apply_examples():
    one = LaurentPoly({0: QQ_I(1, 0)})
    assert witt_apply(WittGenerator(0, A_EXACT), one) == z(1, -A_HALF)
    assert witt_apply(WittGenerator(1, A_EXACT), z(1)) == LaurentPoly({3: -A_HALF, 2: -1})
    assert witt_apply(WittGenerator(-1, A_EXACT), z(2)) == LaurentPoly({2: -A_HALF, 1: -2})


def test_witt_apply_printed_convention():
    g = lambda n: WittGenerator(n, A_EXACT, offset=0)
    assert witt_apply(g(0), LaurentPoly({0: QQ_I(1, 0)})) == z(0, -A_HALF)
    assert witt_apply(g(1), z(1)) == LaurentPoly({2: -A_HALF, 1: -1})
    assert witt_apply(g(-1), z(2)) == LaurentPoly({1: -A_HALF, 0: -2})


@pytest.mark.parametrize("n, k", [(1, -1), (2, -3), (3, 3), (0, 2)])
def test_witt_examples_exact(n, k):
    assert witt_commutator_check(n, k, range(7), A_EXACT) == 0


def test_witt_all_pairs_exact():
    worst = max(witt_commutator_check(n, k, range(7), A_EXACT)
                for n in range(-3, 4) for k in range(-3, 4))
    assert worst == 0


def test_witt_float_drift():
    A = complex(P.sigma)  # any complex number works
    A = 0.37 - 2.9j
    worst = max(witt_commutator_check(n, k, range(7), A)
                for n in range(-3, 4) for k in range(-3, 4))
    assert worst < 1e-12


def test_printed_generators_shift_the_index():
    assert witt_commutator_check(2, -1, range(7), A_EXACT, offset=0) > 0
    # with offset 0 the relation holds with l_{n+k-1} instead
    ln, lk = (WittGenerator(i, A_EXACT, offset=0) for i in (2, -1))
    lnk1 = WittGenerator(0, A_EXACT, offset=0)
    for m in range(7):
        f = z(m)
        assert ln(lk(f)) - lk(ln(f)) - lnk1(f).scale(3) == LaurentPoly()


def test_barred_copy_commutes():
    assert mixed_commutator_check(2, -1, range(4), A_EXACT) == 0


def test_exact_drift_value():
    assert exact_drift(MarketParams(0.2, 0.05, 1.0)) == QQ_I(Fraction(3, 4), Fraction(-19951, 800))
    assert exact_drift(MarketParams(0.2, 0.05, 2.0)) is None
    assert isinstance(witt_drift(MarketParams(0.2, 0.05, 2.0)), complex)


@settings(max_examples=30)
@given(st.dictionaries(st.integers(-3, 3), st.integers(-5, 5).filter(bool), max_size=4),
       st.dictionaries(st.integers(-3, 3), st.integers(-5, 5).filter(bool), max_size=4))
def test_laurent_algebra(a, b):
    fa, fb = LaurentPoly(a), LaurentPoly(b)
    pts = np.array([0.7 + 0.2j, -1.1 + 0.5j])
    assert np.allclose((fa + fb)(pts), fa(pts) + fb(pts))
    assert np.allclose((fa - fa)(pts), 0)
    assert not (fa - fa)
    h = 1e-6
    assert np.allclose(fa.derivative()(pts), (fa(pts + h) - fa(pts - h)) / (2 * h), atol=1e-5)


# ---- infinitesimal variations ---------------------------------------------

def test_zero_map_zero_variation():
    v = infinitesimal_variation(LaurentPoly(), z(1), A_EXACT)
    assert not v.total


def test_scaling_direction_on_z():
    eps0 = Fraction(1, 3)
    v = infinitesimal_variation(z(1, eps0), z(1), A_EXACT)
    # eps0 * l_0(z) = eps0 * (-(A/2) z^2 - z)
    assert v.holomorphic == LaurentPoly({(2, 0): -A_HALF * eps0, (1, 0): -eps0})
    # C = z has no zbar dependence, so the barred generator contributes only its drift
    A_bar = A_EXACT.parent()(A_EXACT.x, -A_EXACT.y)
    assert v.antiholomorphic == LaurentPoly({(1, 1): -(A_bar / 2) * eps0})


def test_one_variable_field_matches_pair_form():
    eps = LaurentPoly({1: Fraction(1, 5), 2: Fraction(-1, 7)})
    f = LaurentPoly({1: 1, 3: 2})
    a = infinitesimal_variation(eps, f, A_EXACT)
    b = infinitesimal_variation(eps, (f, LaurentPoly({0: 1})), A_EXACT)
    assert a == b


def test_variation_linear_in_eps():
    C = (LaurentPoly({1: 1.0, 2: 0.5}), LaurentPoly({0: 1.0}))
    e1, e2 = LaurentPoly({1: 0.2}), LaurentPoly({0: 0.1j, 2: -0.3})
    A = complex(0.3, -1.2)
    pts = np.array([0.4 + 0.1j, -0.2 + 0.6j])
    lhs = infinitesimal_variation(e1 + e2, C, A)(pts)
    rhs = infinitesimal_variation(e1, C, A)(pts) + infinitesimal_variation(e2, C, A)(pts)
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_identity_map_is_identity():
    C = LaurentPoly.product(LaurentPoly({1: 1.0}), LaurentPoly({0: 1.0}))
    pts = np.array([0.3 + 0.4j])
    assert np.allclose(apply_conformal(C, LaurentPoly(), 1 + 1j, pts), C(pts, np.conj(pts)))


def test_richardson_second_order():
    r = richardson_study()
    assert abs(r.slope - 2) <= 0.2
