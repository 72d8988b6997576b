"""Conformal symmetry, numerically and algebraically.

Rotations and dilations of a solution of the massless equation stay
solutions; the massive equation is not dilation invariant.  The Witt
generators close exactly in rational arithmetic.
"""

from rqf import MarketParams
from rqf.symmetry import (exact_drift, richardson_study, rotation_study, scale_study,
                          witt_commutator_check)

for row in scale_study([0.5, 1.0, 1.5]) + rotation_study([0.0, 0.3, 1.0]):
    print(f"{row.transform:8} {row.amount:4.1f}  residual ratio {row.ratio:.3f}")
(neg,) = scale_study([1.5], massive=True)
print(f"massive solution scaled by 1.5: residual grows {neg.ratio:.0f}x")

A = exact_drift(MarketParams(0.2, 0.05, 1.0))
worst = max(witt_commutator_check(n, k, range(7), A) for n in range(-3, 4) for k in range(-3, 4))
print(f"[l_n, l_k] - (n - k) l_(n+k), worst exact deviation: {worst}")
print(f"finite vs infinitesimal map, Richardson slope {richardson_study().slope:.3f}")
