"""Recovering Black-Scholes as q grows.

The Black-Scholes price is plugged into the finite-q operator.  Its
residual should fall like 1/q until it hits the discretisation floor,
which is the residual under the q = infinity operator itself.
"""

from rqf import MarketParams
from rqf.classical import VanillaSpec
from rqf.pde_solver import default_limit_grid, limit_study

spec = VanillaSpec("call", 100.0, 1.0, 100.0)
grid = default_limit_grid(spec, 0.2, n=401)
study = limit_study(MarketParams(0.2, 0.05, 1.0), [1e2, 1e3, 1e4, 1e5, 1e6], grid, spec)
for row in study.rows:
    flag = "  (at floor, not fitted)" if row.grid_limited else ""
    print(f"q={row.q:8.0e}  deviation {row.deviation:.3e}{flag}")
print(f"floor {study.floor:.2e}, fitted log-log slope {study.slope:.3f}")
