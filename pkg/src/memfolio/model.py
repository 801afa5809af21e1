"""Market model primitives: memory parameters, deterministic kernels, risk premium.

The driving noise is an n-component Gaussian process with stationary
increments.  Component j is governed by a memory-strength p_j >= 0 and a
decay rate q_j > 0 (both per unit time); p_j = 0 recovers plain Brownian
motion.  Two deterministic kernels describe the noise: ``memory_kernel``
weights past noise increments in the conditional-mean state, and
``innovation_kernel`` weights past innovation increments.  Their diagonal
``innovation_gain`` is the instantaneous loading of the memory state on the
innovation Brownian motion.

All expressions containing e^{q t} are evaluated with the common factor
e^{-q t} pulled out, so long horizons (q t > 700) do not overflow.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import SingularVolatilityError

# Reciprocal condition number below which a volatility matrix is treated as
# singular.
RCOND_MIN = 1e-12


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class MemoryParams:
    """Per-asset memory pair (p_j, q_j) of the driving noise.

    Invariants enforced at construction: q_j > 0 and p_j >= 0 for every
    asset.  The long-range-negative regime -q_j < p_j < 0 is rejected.
    """

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = _frozen_array(self.p, "p")
        q = _frozen_array(self.q, "q")
        if p.shape != q.shape:
            raise ValueError("p and q must have the same length")
        if p.size == 0:
            raise ValueError("at least one asset is required")
        if not np.all(np.isfinite(p)) or not np.all(np.isfinite(q)):
            raise ValueError("memory parameters must be finite")
        if np.any(q <= 0.0):
            raise ValueError("memory decay q_j must be strictly positive")
        if np.any(p < 0.0):
            raise ValueError(
                "memory strength p_j must be nonnegative "
                "(the -q_j < p_j < 0 regime is not supported)"
            )
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.p.size


@dataclass(frozen=True)
class PowerUtility:
    """Power utility x^alpha / alpha with its conjugate exponent.

    ``beta`` is always derived as alpha / (alpha - 1), never set directly,
    so 1/alpha + 1/beta = 1 holds by construction.  alpha in (0, 1) gives
    beta < 0; alpha < 0 gives beta in (0, 1).
    """

    alpha: float
    beta: float = field(init=False)

    def __post_init__(self):
        alpha = float(self.alpha)
        if not np.isfinite(alpha) or alpha >= 1.0 or alpha == 0.0:
            raise ValueError("alpha must lie in (-inf, 1) excluding 0")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", alpha / (alpha - 1.0))


@dataclass(frozen=True)
class CoefficientCurves:
    """Deterministic coefficient curves r(t), mu(t), sigma(t) with their limits.

    ``rbar`` and ``lambda_bar`` are explicit fields, not inferred limits;
    :meth:`validate_long_run` checks them against the supplied curves and
    warns on mismatch.  ``sigma(t)`` must be nonsingular wherever queried.
    """

    r: Callable[[float], float]
    mu: Callable[[float], np.ndarray]
    sigma: Callable[[float], np.ndarray]
    rbar: float
    lambda_bar: np.ndarray

    def __post_init__(self):
        lam = _frozen_array(self.lambda_bar, "lambda_bar")
        rbar = float(self.rbar)
        if rbar < 0.0:
            raise ValueError("rbar must be nonnegative")
        object.__setattr__(self, "rbar", rbar)
        object.__setattr__(self, "lambda_bar", lam)

    @property
    def n(self) -> int:
        return self.lambda_bar.size

    @classmethod
    def constant(cls, r: float, mu: Sequence[float], sigma) -> "CoefficientCurves":
        """Constant curves; the long-run values are the constants themselves."""
        r = float(r)
        if r < 0.0:
            raise ValueError("riskless rate must be nonnegative")
        mu_vec = np.atleast_1d(np.asarray(mu, dtype=float))
        sig = np.atleast_2d(np.asarray(sigma, dtype=float))
        if sig.shape != (mu_vec.size, mu_vec.size):
            raise ValueError("sigma must be square and match mu")
        lam = _solve_checked(sig, mu_vec - r)
        return cls(
            r=lambda t: r,
            mu=lambda t: mu_vec,
            sigma=lambda t: sig,
            rbar=r,
            lambda_bar=lam,
        )

    @classmethod
    def exponential_decay(
        cls,
        r0: float,
        rbar: float,
        mu0: Sequence[float],
        mubar: Sequence[float],
        sigma,
        rate: float = 1.0,
    ) -> "CoefficientCurves":
        """Curves of the form bar + (start - bar) e^{-rate t}, constant sigma."""
        if rate <= 0.0:
            raise ValueError("decay rate must be positive")
        r0, rbar = float(r0), float(rbar)
        mu0 = np.atleast_1d(np.asarray(mu0, dtype=float))
        mubar = np.atleast_1d(np.asarray(mubar, dtype=float))
        sig = np.atleast_2d(np.asarray(sigma, dtype=float))
        if mu0.shape != mubar.shape or sig.shape != (mu0.size, mu0.size):
            raise ValueError("mu0, mubar, sigma have inconsistent shapes")

        def r_fn(t: float) -> float:
            return rbar + (r0 - rbar) * np.exp(-rate * t)

        def mu_fn(t: float) -> np.ndarray:
            return mubar + (mu0 - mubar) * np.exp(-rate * t)

        lam = _solve_checked(sig, mubar - rbar)
        return cls(r=r_fn, mu=mu_fn, sigma=lambda t: sig, rbar=rbar, lambda_bar=lam)

    @classmethod
    def tabulated(
        cls,
        times: Sequence[float],
        r_values: Sequence[float],
        mu_values,
        sigma_values,
        rbar: float,
        lambda_bar: Sequence[float],
    ) -> "CoefficientCurves":
        """Piecewise-linear curves keyed by time (clamped outside the table)."""
        ts = np.asarray(times, dtype=float)
        if ts.ndim != 1 or ts.size < 2 or np.any(np.diff(ts) <= 0):
            raise ValueError("times must be strictly increasing with >= 2 entries")
        rv = np.asarray(r_values, dtype=float)
        muv = np.asarray(mu_values, dtype=float)  # (len(ts), n)
        sigv = np.asarray(sigma_values, dtype=float)  # (len(ts), n, n)
        n = muv.shape[1]
        if rv.shape != ts.shape or muv.shape != (ts.size, n) or sigv.shape != (ts.size, n, n):
            raise ValueError("table shapes are inconsistent")

        def r_fn(t: float) -> float:
            return float(np.interp(t, ts, rv))

        def mu_fn(t: float) -> np.ndarray:
            return np.array([np.interp(t, ts, muv[:, j]) for j in range(n)])

        def sigma_fn(t: float) -> np.ndarray:
            t = min(max(t, ts[0]), ts[-1])
            i = int(np.searchsorted(ts, t, side="right") - 1)
            if i >= ts.size - 1:
                return sigv[-1]
            w = (t - ts[i]) / (ts[i + 1] - ts[i])
            return (1.0 - w) * sigv[i] + w * sigv[i + 1]

        return cls(r=r_fn, mu=mu_fn, sigma=sigma_fn, rbar=rbar, lambda_bar=lambda_bar)

    def validate_long_run(self, horizon: float, tol: float = 1e-6):
        """Check rbar and lambda_bar against the curves at the given horizon.

        Compares r(horizon) with rbar and the risk premium at the horizon
        with lambda_bar; warns on mismatch beyond ``tol``.  Returns the pair
        of gaps.
        """
        r_gap = abs(float(self.r(horizon)) - self.rbar)
        lam_gap = float(np.max(np.abs(risk_premium(self, horizon) - self.lambda_bar)))
        if r_gap > tol:
            warnings.warn(
                f"r({horizon}) differs from rbar by {r_gap:.3e}", stacklevel=2
            )
        if lam_gap > tol:
            warnings.warn(
                f"risk premium at t={horizon} differs from lambda_bar by {lam_gap:.3e}",
                stacklevel=2,
            )
        return r_gap, lam_gap


def _solve_checked(sigma_t: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve sigma_t x = rhs, raising if sigma_t is numerically singular."""
    sigma_t = np.asarray(sigma_t, dtype=float)
    svals = np.linalg.svd(sigma_t, compute_uv=False)
    if svals[-1] == 0.0 or not np.isfinite(svals).all() or svals[-1] / svals[0] < RCOND_MIN:
        raise SingularVolatilityError(
            f"volatility matrix is numerically singular (rcond < {RCOND_MIN:g})"
        )
    if rhs.ndim == 1:
        return np.linalg.solve(sigma_t, rhs)
    return np.linalg.solve(sigma_t, rhs.T).T


def risk_premium(curves: CoefficientCurves, t: float) -> np.ndarray:
    """Market price of risk sigma(t)^{-1} [mu(t) - r(t) 1]."""
    sig = np.atleast_2d(np.asarray(curves.sigma(t), dtype=float))
    mu = np.atleast_1d(np.asarray(curves.mu(t), dtype=float))
    return _solve_checked(sig, mu - float(curves.r(t)))


def risk_premium_curve(curves: CoefficientCurves, times: np.ndarray) -> np.ndarray:
    """Risk premium evaluated at each time; returns (len(times), n)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    return np.array([risk_premium(curves, t) for t in times])


def _check_time_pair(t, s):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > t):
        raise ValueError("times must satisfy 0 <= s <= t")
    return t, s


def memory_kernel(params: MemoryParams, j: int, t, s):
    """Kernel weighting past noise increments in the memory state, 0 <= s <= t.

    Evaluated with numerator and denominator rescaled by e^{-q t} so that
    large q t does not overflow.
    """
    t, s = _check_time_pair(t, s)
    p = params.p[j]
    q = params.q[j]
    a = 2.0 * q + p
    num = p * a * (a * np.exp(q * (s - t)) - p * np.exp(-q * (s + t)))
    den = a * a - p * p * np.exp(-2.0 * q * t)
    out = num / den
    return out if out.ndim else float(out)


def innovation_gain(params: MemoryParams, j: int, s):
    """Instantaneous loading l_j(s) of the memory state on the innovation.

    Nondecreasing in s with 0 <= l_j(s) <= p_j, approaching p_j at rate 2 q_j.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise ValueError("s must be nonnegative")
    out = _gain(params.p[j], params.q[j], s)
    return out if out.ndim else float(out)


def _gain(p, q, s):
    e = np.exp(-2.0 * q * np.asarray(s, dtype=float))
    a = 2.0 * q + p
    return p * (1.0 - 2.0 * p * q * e / (a * a - p * p * e))


def innovation_gains(params: MemoryParams, s) -> np.ndarray:
    """``innovation_gain`` for every asset; (n,) for scalar s, else (len(s), n)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise ValueError("s must be nonnegative")
    return _gain(params.p, params.q, s[..., None] if s.ndim else s)


def innovation_kernel(params: MemoryParams, j: int, t, s):
    """Two-time innovation kernel e^{-(p_j+q_j)(t-s)} l_j(s), 0 <= s <= t."""
    t, s = _check_time_pair(t, s)
    p = params.p[j]
    q = params.q[j]
    out = np.exp(-(p + q) * (t - s)) * _gain(p, q, s)
    return out if out.ndim else float(out)


def variance_ratio(p: float, q: float, t):
    """Variance of the driving noise over [0, t] divided by t.

    Equals 1 at t -> 0+ and q^2/(p+q)^2 as t -> infinity; identically 1 when
    p = 0.  The transient factor (1 - e^{-x})/x switches to its series below
    x = 1e-6.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise ValueError("t must be positive")
    if q <= 0.0 or p < 0.0:
        raise ValueError("require q > 0 and p >= 0")
    x = (p + q) * t
    trans = np.where(x < 1e-6, 1.0 - x / 2.0 + x * x / 6.0, -np.expm1(-x) / x)
    s = p + q
    out = q * q / (s * s) + p * (2.0 * q + p) / (s * s) * trans
    return out if out.ndim else float(out)


def alpha_floor(params: MemoryParams, per_asset: bool = False):
    """Infimum of admissible utility exponents for the long-run problems.

    Per asset the floor is -inf when p_j <= 2 q_j and
    -3 - 8 q_j / (p_j - 2 q_j) otherwise; the overall floor is the maximum
    over assets and always lies in [-inf, -3).
    """
    p, q = params.p, params.q
    floors = np.full(params.n, -np.inf)
    strong = p > 2.0 * q
    floors[strong] = -3.0 - 8.0 * q[strong] / (p[strong] - 2.0 * q[strong])
    if per_asset:
        return floors
    return float(np.max(floors))
