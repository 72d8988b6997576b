"""Solving the full equation as a boundary-value problem.

In (x, t) the finite-q equation is elliptic, so it is solved with Dirichlet
data on all four sides.  A plane wave is an exact solution; halving the
mesh should cut the error by about four.
"""

import numpy as np

from rqf import MarketParams
from rqf.gauge import Grid
from rqf.pde_solver import BoundaryData, coefficients, discretize, plane_wave, solve_bvp

p = MarketParams(0.4, 0.05, 2.0)
exact = plane_wave(coefficients(p), 0.8 + 2.0j)
prev = None
for n in (17, 33, 65):
    g = Grid(-1.0, 1.0, 0.0, 1.0, n, n)
    res = solve_bvp(discretize(p, g), BoundaryData.from_function(g, exact), tol=1e-12,
                    omega="optimal")
    X, T = g.mesh()
    err = float(np.max(np.abs(res.field.values - exact(X, T))))
    order = "" if prev is None else f"  order {np.log2(prev / err):.2f}"
    print(f"n={n:3d}  SOR iterations {res.iterations:5d}  max error {err:.2e}{order}")
    prev = err
