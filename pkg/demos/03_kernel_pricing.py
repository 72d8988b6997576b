"""Pricing with the Cauchy kernel in the conformal regime.

Heavy (Cauchy) tails mean a plain call has no finite price: the payoff
grows like e^x while the kernel decays only like 1/x^2.  Bounded payoffs
are fine.
"""

import math

from rqf import InadmissiblePayoff, MarketParams
from rqf.kernel_pricer import (KernelQuery, butterfly_payoff, call_payoff, indicator_payoff,
                               price_kernel)

p = MarketParams(0.2, 0.02, 0.04)
res = price_kernel(indicator_payoff(-1.0, 1.0), KernelQuery(0.0, 1.0, p))
exact = math.exp(-0.98) * 2 / math.pi * math.atan(5.0)
print(f"indicator on [-1, 1]: {res.price:.10f}  (closed form {exact:.10f})")

res = price_kernel(butterfly_payoff(0.9, 1.0, 1.1), KernelQuery(0.0, 1.0, p))
print(f"butterfly 0.9/1.0/1.1 in log-price: {res.price:.6f} +- {res.error_estimate:.1e}")

try:
    price_kernel(call_payoff(100.0), KernelQuery(math.log(100.0), 1.0, p))
except InadmissiblePayoff as exc:
    print(f"call payoff rejected: {exc}")

res = price_kernel(call_payoff(100.0), KernelQuery(math.log(100.0), 1.0, p), force_truncate=8.0)
print(f"call clipped to |x| <= 8: {res.price:.4f} (truncated={res.truncated})")
