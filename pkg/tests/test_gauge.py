import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rqf import GaugeOverflow, GridMismatch, MarketParams, NonPositiveSpot
from rqf.gauge import (Field2D, GaugeParams, Grid, Variant, exp_coords, gauge_forward,
                       gauge_inverse, gauge_params, log_coords, safe_exp)


def test_log_coords_examples():
    assert log_coords(1.0) == 0.0
    assert log_coords(100.0) == pytest.approx(4.605170186, abs=1e-9)
    assert exp_coords(0.0) == 1.0


@pytest.mark.parametrize("S", [0.0, -1.0, float("nan")])
def test_log_coords_rejects(S):
    with pytest.raises(NonPositiveSpot):
        log_coords(S)


@given(st.floats(1e-100, 1e100))
def test_log_exp_round_trip(S):
    assert exp_coords(log_coords(S)) == pytest.approx(S, rel=4e-14)


def test_gauge_params_examples():
    p = MarketParams(0.2, 0.05, 1.0)
    s = gauge_params(p, Variant.SCHRODINGER)
    k = gauge_params(p, Variant.KLEIN_GORDON)
    assert (s.a, s.b) == pytest.approx((-0.75, 0.06125), rel=1e-12)
    assert (k.a, k.b) == pytest.approx((-0.75, -24.93875), rel=1e-12)
    p0 = MarketParams(0.2, 0.02, 3.0)
    assert abs(gauge_params(p0, Variant.SCHRODINGER).a) < 1e-15


@given(st.floats(0.05, 2), st.floats(0, 0.2), st.floats(1e-4, 1e4))
def test_variant_b_differs_by_q_over_sigma2(sigma, rate, q):
    p = MarketParams(sigma, rate, q)
    s = gauge_params(p, Variant.SCHRODINGER)
    k = gauge_params(p, Variant.KLEIN_GORDON)
    assert s.a == k.a
    assert k.b - s.b == pytest.approx(-q / sigma**2, rel=1e-12, abs=1e-12 * s.b)


GRID = Grid(3.0, 6.0, 0.0, 1.0, 31, 21)


def test_zero_and_identity_gauge():
    zero = Field2D(GRID, np.zeros(GRID.shape))
    g = gauge_params(MarketParams(0.2, 0.05, 1.0))
    assert np.all(gauge_forward(zero, g).values == 0)
    C = Field2D.from_function(GRID, lambda x, t: np.sin(x) + t)
    ident = GaugeParams(0.0, 0.0, Variant.SCHRODINGER)
    assert np.array_equal(gauge_forward(C, ident).values, C.values)


@pytest.mark.parametrize("variant", list(Variant))
def test_round_trip_random_fields(variant):
    rng = np.random.default_rng(20240101)
    g = gauge_params(MarketParams(0.2, 0.05, 1.0), variant)
    for _ in range(20):
        C = Field2D(GRID, rng.normal(size=GRID.shape) * 10.0 ** rng.integers(-3, 4))
        back = gauge_inverse(gauge_forward(C, g), g)
        assert np.max(np.abs(back.values - C.values)) < 1e-12 * np.max(np.abs(C.values))


def test_gauge_preserves_sign():
    rng = np.random.default_rng(3)
    C = Field2D(GRID, rng.normal(size=GRID.shape))
    psi = gauge_forward(C, gauge_params(MarketParams(0.3, 0.01, 2.0)))
    assert np.array_equal(np.sign(psi.values), np.sign(C.values))


def test_overflow_is_loud():
    with pytest.raises(GaugeOverflow):
        safe_exp(701.0)
    g = gauge_params(MarketParams(0.1, 0.05, 1e4))  # b ~ -1e6
    C = Field2D(GRID, np.ones(GRID.shape))
    with pytest.raises(GaugeOverflow):
        gauge_forward(C, g)


def test_grid_mismatch():
    with pytest.raises(GridMismatch):
        Field2D(GRID, np.zeros((3, 3)))


def test_grid_validation_and_geometry():
    with pytest.raises(ValueError):
        Grid(0, 1, 0, 1, 2, 5)
    with pytest.raises(ValueError):
        Grid(1, 0, 0, 1, 5, 5)
    assert GRID.hx == pytest.approx(0.1)
    assert GRID.ht == pytest.approx(0.05)
    X, T = GRID.mesh()
    assert X.shape == GRID.shape == (21, 31)
    assert X[0, 1] - X[0, 0] == pytest.approx(GRID.hx)


def test_field_rejects_non_finite():
    v = np.zeros(GRID.shape)
    v[2, 2] = np.inf
    with pytest.raises(ValueError):
        Field2D(GRID, v)


def test_csv_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(7)
    C = Field2D(GRID, rng.normal(size=GRID.shape) * 1e-7 + rng.normal(size=GRID.shape))
    text = C.to_csv()
    lines = text.splitlines()
    assert lines[0] == "x,t,value"
    assert len(lines) == 1 + GRID.nx * GRID.nt
    # x runs fastest
    assert lines[1].split(",")[1] == lines[2].split(",")[1]
    path = tmp_path / "f.csv"
    C.to_csv(path)
    back = Field2D.from_csv(path)
    assert np.array_equal(back.values, C.values)
    assert back.grid.nx == GRID.nx and back.grid.nt == GRID.nt
    assert np.array_equal(Field2D.from_csv(text).values, C.values)
