"""When does the mass term stop mattering?

The drift coefficient A is complex once the light-speed parameter q is
finite.  The ratio |A|^2 / (q / sigma^4) says how close the pricing
equation is to its conformally invariant limit.
"""

from rqf import MarketParams, drift_coefficient, regime_diagnostic

print(f"{'sigma':>6} {'q':>8} {'Re A':>10} {'Im A':>12} {'ratio':>12}  conformal")
for sigma in (0.2, 1.0):
    for q in (1e-3, 1e-1, 1.0, 1e2):
        p = MarketParams(sigma, 0.05, q)
        A = drift_coefficient(p)
        d = regime_diagnostic(p)
        print(f"{sigma:6.2f} {q:8.0e} {A.re:10.4f} {A.im:12.4f} {d.ratio:12.4g}  {d.conformal}")

print("\nSmall q (slow information) pushes the model into the conformal regime.")
