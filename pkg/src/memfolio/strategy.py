"""Closed-form optimal strategies, growth rates, and the large-deviations rate.

Covers the finite-horizon utility maximization (backward Riccati grids), the
infinite-horizon growth-rate problem (steady-state algebra, two independent
routes to the rate), the optimal logarithmic moment generating function on
(0, 1), and its Legendre transform for benchmark-outperformance
probabilities.

Weight functions take the memory state xi as an input and never compute it;
path generation lives in :mod:`memfolio.simulate`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import model, riccati
from .errors import AdmissibilityError, ConvergenceError

_RATE_EPS = 1e-9  # open-interval clearance for the 1-d maximization on (0, 1)


# ---------------------------------------------------------------------------
# per-asset coefficient builders (shared by the solvers and the tests)

def finite_horizon_coefficients(params, curves, utility, j, lam_j=None):
    """Time-dependent coefficients of asset j's backward equations.

    Returns callables (gain, drift, forcing) where ``gain`` is the
    innovation loading l_j, ``drift`` is b_j = -(p_j+q_j) + beta l_j and
    ``forcing`` is rho_j = -beta l_j lambda_j.  ``lam_j`` overrides the
    risk-premium component (vectorized callable) when precomputed.
    """
    p = params.p[j]
    q = params.q[j]
    beta = utility.beta
    if lam_j is None:
        lam_j = lambda ts: model.risk_premium_curve(curves, np.atleast_1d(ts))[:, j]

    def gain(ts):
        return model.innovation_gains(params, np.atleast_1d(ts))[:, j]

    def drift(ts):
        return -(p + q) + beta * gain(ts)

    def forcing(ts):
        return -beta * gain(ts) * np.asarray(lam_j(ts), dtype=float)

    return gain, drift, forcing


def stationary_constants(params, curves, utility):
    """Long-run per-asset constants: bbar, rhobar, steady roots and gaps.

    Returns a dict of (n,) arrays: bbar, rhobar, Rbar, gap, vbar.
    """
    p, q = params.p, params.q
    beta = utility.beta
    lam_bar = curves.lambda_bar
    bbar = -(1.0 - beta) * p - q
    rhobar = -beta * p * lam_bar
    bb = beta * (1.0 - beta)
    Rbar = np.empty(params.n)
    gap = np.empty(params.n)
    vbar = np.empty(params.n)
    for j in range(params.n):
        root = riccati.steady_riccati_root((p[j] * p[j], bbar[j], bb))
        Rbar[j] = root.Rbar
        gap[j] = root.gap
        vbar[j] = riccati.steady_linear(
            -root.gap, bb * lam_bar[j] - root.Rbar * rhobar[j]
        )
    return {"bbar": bbar, "rhobar": rhobar, "Rbar": Rbar, "gap": gap, "vbar": vbar}


# ---------------------------------------------------------------------------
# finite horizon

@dataclass(frozen=True)
class FiniteHorizonPolicy:
    """Optimal policy for the finite-horizon utility problem.

    Holds the shared time mesh with the per-asset quadratic and linear
    value-expansion grids (terminal values zero) plus the coefficient tables
    needed to evaluate weights and the value function.
    """

    params: model.MemoryParams
    curves: model.CoefficientCurves
    utility: model.PowerUtility
    horizon: float
    grid: np.ndarray          # (K+1,)
    quad_term: np.ndarray     # (K+1, n)
    lin_term: np.ndarray      # (K+1, n)
    lam_grid: np.ndarray      # (K+1, n)
    r_grid: np.ndarray        # (K+1,)
    gain_grid: np.ndarray     # (K+1, n) innovation loadings
    branches: tuple

    tag = "finite-horizon"

    def quad_at(self, t) -> np.ndarray:
        return _interp_columns(t, self.grid, self.quad_term)

    def lin_at(self, t) -> np.ndarray:
        return _interp_columns(t, self.grid, self.lin_term)

    def __call__(self, t, xi):
        return finite_horizon_weights(self, t, xi)

    def exposure_coefficients(self, times):
        """Affine decomposition sigma' pi = A(t) + D(t) * xi at the given times."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        one_minus_beta = 1.0 - self.utility.beta
        lam = model.risk_premium_curve(self.curves, times)
        gain = model.innovation_gains(self.params, times)
        quad = _interp_columns(times, self.grid, self.quad_term)
        lin = _interp_columns(times, self.grid, self.lin_term)
        a = one_minus_beta * lam + gain * lin
        d = -(one_minus_beta + gain * quad) * np.ones_like(a)
        return a, d


def _interp_columns(t, grid, table):
    t = np.asarray(t, dtype=float)
    if np.any(t < grid[0]) or np.any(t > grid[-1]):
        raise ValueError("time outside the policy grid")
    cols = [np.interp(t, grid, table[:, j]) for j in range(table.shape[1])]
    out = np.stack(cols, axis=-1)
    return out


def solve_finite_horizon(
    params: model.MemoryParams,
    curves: model.CoefficientCurves,
    utility: model.PowerUtility,
    horizon: float,
    steps_per_unit_time: int = riccati.DEFAULT_STEPS_PER_UNIT_TIME,
) -> FiniteHorizonPolicy:
    """Solve the per-asset backward Riccati/linear pairs on one shared mesh."""
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    n_steps = max(1, math.ceil(horizon * steps_per_unit_time))
    nodes = np.linspace(0.0, horizon, n_steps + 1)
    h = horizon / n_steps
    mids = nodes[:-1] + 0.5 * h

    lam_nodes = model.risk_premium_curve(curves, nodes)
    lam_mids = model.risk_premium_curve(curves, mids)
    gain_nodes = model.innovation_gains(params, nodes)
    gain_mids = model.innovation_gains(params, mids)
    beta = utility.beta
    bb = beta * (1.0 - beta)

    quad = np.empty((n_steps + 1, params.n))
    lin = np.empty((n_steps + 1, params.n))
    branches = []
    for j in range(params.n):
        branch = riccati.existence_branch(params, utility, j)
        branches.append(branch)
        pq = params.p[j] + params.q[j]
        b_nodes = -pq + beta * gain_nodes[:, j]
        b_mids = -pq + beta * gain_mids[:, j]
        problem = riccati.RiccatiProblem(
            a1=(gain_nodes[:, j] ** 2, gain_mids[:, j] ** 2),
            a2=(b_nodes, b_mids),
            a3=bb,
            horizon=horizon,
            limits=(params.p[j] ** 2, -(1.0 - beta) * params.p[j] - params.q[j], bb),
        )
        sol = riccati.solve_backward_riccati(problem, steps_per_unit_time)
        if branch == "shifted":
            gain_sq = gain_nodes[:, j] ** 2
            bound = b_nodes / gain_sq
            riccati.verify_branch(sol, branch, shift_bound=lambda ts, b=bound: np.interp(ts, nodes, b))
        else:
            riccati.verify_branch(sol, branch)
        quad[:, j] = sol.values

        rho_nodes = -beta * gain_nodes[:, j] * lam_nodes[:, j]
        rho_mids = -beta * gain_mids[:, j] * lam_mids[:, j]
        r_mids = np.interp(mids, nodes, sol.values)
        lin_sol = riccati.solve_backward_linear(
            b1=(gain_nodes[:, j] ** 2 * sol.values - b_nodes,
                gain_mids[:, j] ** 2 * r_mids - b_mids),
            b2=(bb * lam_nodes[:, j] - sol.values * rho_nodes,
                bb * lam_mids[:, j] - r_mids * rho_mids),
            horizon=horizon,
            steps_per_unit_time=steps_per_unit_time,
        )
        lin[:, j] = lin_sol.values

    r_grid = np.array([float(curves.r(t)) for t in nodes])
    return FiniteHorizonPolicy(
        params=params,
        curves=curves,
        utility=utility,
        horizon=float(horizon),
        grid=nodes,
        quad_term=quad,
        lin_term=lin,
        lam_grid=lam_nodes,
        r_grid=r_grid,
        gain_grid=gain_nodes,
        branches=tuple(branches),
    )


def _solve_transposed_vol(curves, t, bracket):
    """Solve sigma'(t) pi = bracket for pi (rows of a 2-d bracket are states)."""
    sig = np.atleast_2d(np.asarray(curves.sigma(t), dtype=float))
    return model._solve_checked(sig.T, bracket)


def finite_horizon_weights(policy: FiniteHorizonPolicy, t: float, xi) -> np.ndarray:
    """Optimal portfolio fractions at time t given the memory state xi."""
    if not 0.0 <= t <= policy.horizon:
        raise ValueError("t must lie in [0, horizon]")
    xi = np.asarray(xi, dtype=float)
    lam = model.risk_premium(policy.curves, t)
    gain = model.innovation_gains(policy.params, t)
    quad = policy.quad_at(t)
    lin = policy.lin_at(t)
    one_minus_beta = 1.0 - policy.utility.beta
    bracket = one_minus_beta * (lam - xi) - gain * quad * xi + gain * lin
    return _solve_transposed_vol(policy.curves, t, bracket)


def value_function(policy: FiniteHorizonPolicy, x: float) -> float:
    """Maximal expected power utility of terminal wealth for initial wealth x."""
    if not x > 0.0:
        raise ValueError("initial wealth must be positive")
    alpha = policy.utility.alpha
    beta = policy.utility.beta
    g = _g_table(policy)
    total = float(np.sum(np.trapezoid(g, policy.grid, axis=0)))
    log_s0 = float(np.trapezoid(policy.r_grid, policy.grid))
    return (1.0 / alpha) * (x * np.exp(log_s0)) ** alpha * np.exp(
        0.5 * (1.0 - alpha) * total
    )


def _g_table(policy: FiniteHorizonPolicy) -> np.ndarray:
    """Integrand of the value-function exponent on the policy grid, (K+1, n)."""
    beta = policy.utility.beta
    bb = beta * (1.0 - beta)
    gain = policy.gain_grid
    lam = policy.lam_grid
    rho = -beta * gain * lam
    v = policy.lin_term
    r = policy.quad_term
    return v * v * gain * gain + 2.0 * rho * v - gain * gain * r - bb * lam * lam


# ---------------------------------------------------------------------------
# infinite horizon

@dataclass(frozen=True)
class StationaryPolicy:
    """Optimal policy for the long-run growth-rate problem."""

    params: model.MemoryParams
    curves: model.CoefficientCurves
    utility: model.PowerUtility
    Rbar: np.ndarray
    vbar: np.ndarray
    gap: np.ndarray

    tag = "stationary"

    def __call__(self, t, xi):
        return stationary_weights(self, t, xi)

    def exposure_coefficients(self, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        one_minus_beta = 1.0 - self.utility.beta
        lam = model.risk_premium_curve(self.curves, times)
        p = self.params.p
        a = one_minus_beta * lam + (p * self.vbar) * np.ones_like(lam)
        d = -(one_minus_beta + p * self.Rbar) * np.ones_like(lam)
        return a, d


def solve_stationary(params, curves, utility) -> StationaryPolicy:
    """Steady-state policy; requires alpha above the admissibility floor."""
    _check_alpha_admissible(params, utility.alpha)
    consts = stationary_constants(params, curves, utility)
    return StationaryPolicy(
        params=params,
        curves=curves,
        utility=utility,
        Rbar=consts["Rbar"],
        vbar=consts["vbar"],
        gap=consts["gap"],
    )


def stationary_weights(policy: StationaryPolicy, t: float, xi) -> np.ndarray:
    """Long-run optimal portfolio fractions at time t given the memory state."""
    xi = np.asarray(xi, dtype=float)
    lam = model.risk_premium(policy.curves, t)
    one_minus_beta = 1.0 - policy.utility.beta
    p = policy.params.p
    bracket = one_minus_beta * (lam - xi) - p * policy.Rbar * xi + p * policy.vbar
    return _solve_transposed_vol(policy.curves, t, bracket)


@dataclass(frozen=True)
class LogOptimalPolicy:
    """Growth-optimal (log-utility) policy; the alpha -> 0 limit."""

    curves: model.CoefficientCurves

    tag = "log-optimal"

    def __call__(self, t, xi):
        return log_optimal_weights(self.curves, t, xi)

    def exposure_coefficients(self, times):
        times = np.atleast_1d(np.asarray(times, dtype=float))
        lam = model.risk_premium_curve(self.curves, times)
        return lam, -np.ones_like(lam)


def log_optimal_weights(curves: model.CoefficientCurves, t: float, xi) -> np.ndarray:
    """Growth-optimal fractions: the conditional market price of risk, de-vol'd."""
    xi = np.asarray(xi, dtype=float)
    lam = model.risk_premium(curves, t)
    return _solve_transposed_vol(curves, t, lam - xi)


def _check_alpha_admissible(params, alpha: float):
    floor = model.alpha_floor(params)
    if not alpha < 1.0 or alpha == 0.0 or not alpha > floor:
        raise AdmissibilityError(
            f"alpha = {alpha:g} is outside the admissible range "
            f"({floor:g}, 1) excluding 0"
        )


@dataclass(frozen=True)
class GrowthReport:
    """Long-run growth rate of expected power utility, by two routes.

    ``rate_from_steady`` assembles the rate from the steady Riccati/linear
    roots; ``rate_explicit`` uses the closed-form per-asset terms.  The two
    agree to solver tolerance, and ``lmgf`` = alpha * rate is the optimal
    logarithmic moment generating function on (0, 1).
    """

    alpha: float
    rbar: float
    gbar: np.ndarray
    premium_terms: np.ndarray
    memory_terms: np.ndarray
    rate_from_steady: float
    rate_explicit: float
    lmgf: float
    cbar: float
    Rbar: np.ndarray
    vbar: np.ndarray
    gap: np.ndarray

    @property
    def rate(self) -> float:
        return self.rate_explicit

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "rbar": self.rbar,
            "gbar": self.gbar.tolist(),
            "premium_terms": self.premium_terms.tolist(),
            "memory_terms": self.memory_terms.tolist(),
            "rate_from_steady": self.rate_from_steady,
            "rate_explicit": self.rate_explicit,
            "two_route_residual": abs(self.rate_from_steady - self.rate_explicit),
            "lmgf": self.lmgf,
            "cbar": self.cbar,
            "steady_quad": self.Rbar.tolist(),
            "steady_lin": self.vbar.tolist(),
            "spectral_gap": self.gap.tolist(),
        }


def _explicit_terms(params, curves, alpha: float):
    """Per-asset closed-form contributions to the growth rate at exponent alpha."""
    p, q = params.p, params.q
    lam_bar = curves.lambda_bar
    s = p + q
    den = (1.0 - alpha) * s * s + alpha * p * (p + 2.0 * q)
    premium = s * s * lam_bar * lam_bar * alpha / den
    memory = s - q * alpha - np.sqrt(1.0 - alpha) * np.sqrt(den)
    return premium, memory


def growth_rate(params, curves, utility: model.PowerUtility) -> GrowthReport:
    """Optimal long-run growth rate of (1/alpha) E[X(T)^alpha], both routes."""
    _check_alpha_admissible(params, utility.alpha)
    alpha = utility.alpha
    beta = utility.beta
    bb = beta * (1.0 - beta)
    consts = stationary_constants(params, curves, utility)
    lam_bar = curves.lambda_bar
    p = params.p
    gbar = (
        consts["vbar"] ** 2 * p * p
        + 2.0 * consts["rhobar"] * consts["vbar"]
        - p * p * consts["Rbar"]
        - bb * lam_bar * lam_bar
    )
    rate_steady = curves.rbar + 0.5 * (1.0 - alpha) / alpha * float(np.sum(gbar))
    premium, memory = _explicit_terms(params, curves, alpha)
    rate_explicit = curves.rbar + float(np.sum(premium) + np.sum(memory)) / (2.0 * alpha)
    return GrowthReport(
        alpha=alpha,
        rbar=curves.rbar,
        gbar=gbar,
        premium_terms=premium,
        memory_terms=memory,
        rate_from_steady=rate_steady,
        rate_explicit=rate_explicit,
        lmgf=alpha * rate_explicit,
        cbar=benchmark_rate(params, curves),
        Rbar=consts["Rbar"],
        vbar=consts["vbar"],
        gap=consts["gap"],
    )


@dataclass(frozen=True)
class IdentityReport:
    """Residuals of the verification-side steady identities.

    The long-run verification constants (Ubar, mbar, fbar) must reproduce
    (1-alpha) times the value-side constants (Rbar, vbar, gbar).
    """

    alpha: float
    Ubar: np.ndarray
    mbar: np.ndarray
    fbar: np.ndarray
    resid_quad: np.ndarray
    resid_lin: np.ndarray
    resid_rate: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(
            max(
                np.max(np.abs(self.resid_quad)),
                np.max(np.abs(self.resid_lin)),
                np.max(np.abs(self.resid_rate)),
            )
        )

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "Ubar": self.Ubar.tolist(),
            "mbar": self.mbar.tolist(),
            "fbar": self.fbar.tolist(),
            "resid_quad": self.resid_quad.tolist(),
            "resid_lin": self.resid_lin.tolist(),
            "resid_rate": self.resid_rate.tolist(),
            "max_residual": self.max_residual,
        }


def verification_constants(params, curves, utility, consts=None):
    """Long-run constants of the growth verification equations.

    Returns a dict with dbar, Qdiag, hbar, gammabar (all (n,) arrays) built
    from the steady value-side roots.
    """
    if consts is None:
        consts = stationary_constants(params, curves, utility)
    alpha = utility.alpha
    beta = utility.beta
    p = params.p
    lam_bar = curves.lambda_bar
    Rbar, vbar = consts["Rbar"], consts["vbar"]
    dbar = consts["bbar"] - alpha * p * p * Rbar
    Qdiag = beta * (1.0 - (1.0 - alpha) ** 2 * p * p * Rbar * Rbar)
    hbar = alpha * (alpha - 1.0) * p * p * Rbar * vbar - beta * lam_bar
    gammabar = consts["rhobar"] + alpha * p * p * vbar
    return {"dbar": dbar, "Qdiag": Qdiag, "hbar": hbar, "gammabar": gammabar}


def infinite_horizon_identities(params, curves, utility) -> IdentityReport:
    """Solve the verification-side fixed points and report identity residuals."""
    _check_alpha_admissible(params, utility.alpha)
    alpha = utility.alpha
    beta = utility.beta
    consts = stationary_constants(params, curves, utility)
    ver = verification_constants(params, curves, utility, consts)
    p = params.p
    lam_bar = curves.lambda_bar
    n = params.n
    Ubar = np.empty(n)
    mbar = np.empty(n)
    for j in range(n):
        root = riccati.steady_riccati_root((p[j] * p[j], ver["dbar"][j], ver["Qdiag"][j]))
        Ubar[j] = root.Rbar
        mbar[j] = riccati.steady_linear(
            -root.gap, -(ver["hbar"][j] + root.Rbar * ver["gammabar"][j])
        )
    ubar_const = alpha * (alpha - 1.0) * (
        p * p * consts["vbar"] ** 2 - (1.0 - beta) ** 2 * lam_bar * lam_bar
    )
    fbar = p * p * mbar * mbar + 2.0 * ver["gammabar"] * mbar - p * p * Ubar + ubar_const
    gbar = (
        consts["vbar"] ** 2 * p * p
        + 2.0 * consts["rhobar"] * consts["vbar"]
        - p * p * consts["Rbar"]
        - beta * (1.0 - beta) * lam_bar * lam_bar
    )
    return IdentityReport(
        alpha=alpha,
        Ubar=Ubar,
        mbar=mbar,
        fbar=fbar,
        resid_quad=Ubar - (1.0 - alpha) * consts["Rbar"],
        resid_lin=mbar - (1.0 - alpha) * consts["vbar"],
        resid_rate=fbar - (1.0 - alpha) * gbar,
    )


# ---------------------------------------------------------------------------
# large deviations

def log_mgf(params, curves, alpha: float) -> float:
    """Optimal logarithmic moment generating function on (0, 1)."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    premium, memory = _explicit_terms(params, curves, alpha)
    return curves.rbar * alpha + 0.5 * float(np.sum(premium) + np.sum(memory))


def log_mgf_slope(params, curves, alpha: float, rel_step: float = 1e-6) -> float:
    """Central-difference derivative of the log-MGF, step rel_step * (1 - alpha)."""
    step = min(rel_step * (1.0 - alpha), 0.5 * alpha, 0.5 * (1.0 - alpha))
    return (
        log_mgf(params, curves, alpha + step) - log_mgf(params, curves, alpha - step)
    ) / (2.0 * step)


def benchmark_rate(params, curves) -> float:
    """Growth rate of the log-optimal portfolio (the outperformance threshold)."""
    p, q = params.p, params.q
    lam_bar = curves.lambda_bar
    return (
        curves.rbar
        + 0.25 * float(np.sum(p * p / (p + q)))
        + 0.5 * float(np.dot(lam_bar, lam_bar))
    )


@dataclass(frozen=True)
class RateFunctionPoint:
    """Large-deviations decay rate at benchmark c, with its maximizer when c > cbar."""

    c: float
    value: float
    maximizer: float | None

    def to_dict(self) -> dict:
        return {"c": self.c, "value": self.value, "maximizer": self.maximizer}


def _slope_minus(params, curves, alpha, c):
    return log_mgf_slope(params, curves, alpha) - c


def exponent_for_slope(params, curves, target: float) -> float:
    """The alpha in (0, 1) at which the log-MGF slope equals ``target``.

    Requires target above the benchmark rate (the slope at 0+).  Uses
    golden-section maximization of alpha*target - lmgf(alpha) followed by
    bisection on the centered-difference slope.
    """
    cb = benchmark_rate(params, curves)
    if not target > cb:
        raise ConvergenceError(
            f"slope target {target:g} is not above the benchmark rate {cb:g}"
        )
    lo, hi = _RATE_EPS, 1.0 - _RATE_EPS

    def objective(a):
        return a * target - log_mgf(params, curves, a)

    # golden-section bracket of the interior maximum
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c1 = b - inv_phi * (b - a)
    c2 = a + inv_phi * (b - a)
    f1, f2 = objective(c1), objective(c2)
    for _ in range(120):
        if b - a < 1e-10:
            break
        if f1 >= f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - inv_phi * (b - a)
            f1 = objective(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + inv_phi * (b - a)
            f2 = objective(c2)

    # bisection refinement on the slope equation
    blo, bhi = max(lo, a - 1e-8), min(hi, b + 1e-8)
    slo = _slope_minus(params, curves, blo, target)
    shi = _slope_minus(params, curves, bhi, target)
    if slo > 0.0 or shi < 0.0:
        # widen to the full admissible interval; the slope is increasing
        blo, bhi = lo, hi
        slo = _slope_minus(params, curves, blo, target)
        shi = _slope_minus(params, curves, bhi, target)
        if slo > 0.0 or shi < 0.0:
            raise ConvergenceError(
                "could not bracket the slope equation; log-MGF is inconsistent"
            )
    for _ in range(200):
        mid = 0.5 * (blo + bhi)
        if bhi - blo < 1e-15:
            break
        if _slope_minus(params, curves, mid, target) < 0.0:
            blo = mid
        else:
            bhi = mid
    return 0.5 * (blo + bhi)


def rate_function(params, curves, c: float) -> RateFunctionPoint:
    """Legendre-transform decay rate -sup_{alpha in (0,1)} [alpha c - lmgf(alpha)].

    Returns exactly zero (supremum at the alpha -> 0+ boundary) when
    c <= benchmark rate; otherwise solves the slope equation for the interior
    maximizer.
    """
    c = float(c)
    cb = benchmark_rate(params, curves)
    if c <= cb:
        return RateFunctionPoint(c=c, value=0.0, maximizer=None)
    a_star = exponent_for_slope(params, curves, c)
    value = -(a_star * c - log_mgf(params, curves, a_star))
    return RateFunctionPoint(c=c, value=min(value, 0.0), maximizer=a_star)


def nearly_optimal_policy(params, curves, c: float, m: int) -> StationaryPolicy:
    """Stationary policy at the exponent solving slope = c + 1/m (c >= cbar)."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    cb = benchmark_rate(params, curves)
    if c < cb:
        raise ValueError(f"c = {c:g} must be at least the benchmark rate {cb:g}")
    alpha = exponent_for_slope(params, curves, c + 1.0 / m)
    return solve_stationary(params, curves, model.PowerUtility(alpha))
