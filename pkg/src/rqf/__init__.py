"""Option pricing with a relativistic (finite light-speed) Black-Scholes model.

Submodules:

* ``model``: parameters, the complex drift coefficient and the regime diagnostic
* ``gauge``: log-price grids, fields and the exponential gauge maps
* ``classical``: Black-Scholes closed form and the heat-kernel pricer
* ``kernel_pricer``: Cauchy-kernel pricing in the conformal regime
* ``pde_solver``: finite differences, the elliptic solve and the q -> inf study
* ``symmetry``: rotations, scalings and Witt-generator algebra
* ``returns_fit``: Gaussian and Cauchy fits of log-returns
* ``cli``: the ``rqf`` command
"""

__version__ = "0.1.0"

from .errors import (DegenerateSample, GaugeOverflow, GridMismatch, InadmissiblePayoff,
                     InvalidContract, NegativeRate, NoConvergence, NonMonotoneDate,
                     NonPositivePrice, NonPositiveQ, NonPositiveSigma, NonPositiveSpot,
                     NonPositiveTime, ParameterError, ParseError, QuadratureFailure,
                     ResampleOutOfDomain, RQFError, SeriesError, TooShort)
from .model import (DriftCoefficient, MarketParams, RegimeDiagnostic, drift_coefficient,
                    regime_diagnostic, validate_params)

__all__ = [
    "DegenerateSample", "DriftCoefficient", "GaugeOverflow", "GridMismatch",
    "InadmissiblePayoff", "InvalidContract", "MarketParams", "NegativeRate", "NoConvergence",
    "NonMonotoneDate", "NonPositivePrice", "NonPositiveQ", "NonPositiveSigma",
    "NonPositiveSpot", "NonPositiveTime", "ParameterError", "ParseError",
    "QuadratureFailure", "RQFError", "RegimeDiagnostic", "ResampleOutOfDomain",
    "SeriesError", "TooShort", "__version__", "drift_coefficient", "regime_diagnostic",
    "validate_params",
]
