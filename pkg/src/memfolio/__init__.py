"""Optimal long-horizon investment under Gaussian driving noise with memory.

Subpackages by concern: :mod:`memfolio.model` (parameters, kernels, risk
premium), :mod:`memfolio.riccati` (backward ODE solvers and steady states),
:mod:`memfolio.strategy` (closed-form policies, growth rates, rate
function), :mod:`memfolio.simulate` (path simulation and Monte Carlo
estimators), :mod:`memfolio.estimate` (lag-covariance parameter fitting),
:mod:`memfolio.cli` (batch command-line front end).

The hot path-stepping kernels run in a compiled extension when available and
fall back to a bit-identical numpy mirror; see ``memfolio.backend_name()``.
"""

from ._backend import backend_name
from .model import (
    CoefficientCurves,
    MemoryParams,
    PowerUtility,
    alpha_floor,
    innovation_gain,
    innovation_kernel,
    memory_kernel,
    risk_premium,
    variance_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "CoefficientCurves",
    "MemoryParams",
    "PowerUtility",
    "alpha_floor",
    "backend_name",
    "innovation_gain",
    "innovation_kernel",
    "memory_kernel",
    "risk_premium",
    "variance_ratio",
    "__version__",
]
