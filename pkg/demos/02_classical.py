"""Black-Scholes two ways: closed form and heat-kernel quadrature.

The heat-kernel pricer integrates the payoff against the Gaussian
transition density in log-price.  It should reproduce the closed form to
quadrature accuracy.
"""

from rqf.classical import VanillaSpec, bs_closed_form, heat_kernel_price

for kind in ("call", "put"):
    for strike in (90.0, 100.0, 110.0):
        spec = VanillaSpec(kind, strike, 1.0, 100.0)
        bs = bs_closed_form(spec, 0.2, 0.05)
        heat = heat_kernel_price(spec, 0.2, 0.05)
        print(f"{kind:4} K={strike:5.0f}  closed form {bs:10.6f}  heat kernel {heat:10.6f}"
              f"  diff {abs(bs - heat):.1e}")
