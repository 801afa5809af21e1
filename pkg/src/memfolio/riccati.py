"""Backward scalar Riccati and linear ODE solvers with steady-state algebra.

Every equation in scope is integrated backward from a zero terminal value on
a uniform grid with the classical fourth-order one-step scheme.  Coefficients
may be floats, vectorized callables of time, or precomputed (node, midpoint)
array pairs; midpoint values of grid-backed coefficients come from linear
interpolation, which keeps the n coupled equations alignable on one mesh.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import model
from .errors import (
    AdmissibilityError,
    BlowUpError,
    BranchViolationError,
    DegenerateGapError,
    DiscriminantError,
)

DEFAULT_STEPS_PER_UNIT_TIME = 64
BLOW_UP_BOUND = 1e8


@dataclass(frozen=True)
class RiccatiProblem:
    """Scalar backward Riccati problem dR/dt = a1 R^2 - 2 a2 R - a3, R(T) = 0.

    ``a1`` must be nonnegative on [0, horizon].  ``limits`` holds the
    long-run coefficients (a1bar, a2bar, a3bar) when steady-state behaviour
    is of interest.
    """

    a1: object
    a2: object
    a3: object
    horizon: float
    limits: tuple | None = None

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")


@dataclass(frozen=True)
class GridSolution:
    """A backward-ODE solution on a uniform forward-ordered time grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("solution values must be finite")
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def terminal_value(self) -> float:
        return float(self.values[-1])

    def at(self, t):
        """Linear interpolation on the grid; t must lie inside [t0, T]."""
        t = np.asarray(t, dtype=float)
        if np.any(t < self.grid[0]) or np.any(t > self.grid[-1]):
            raise ValueError("time outside the solution grid")
        out = np.interp(t, self.grid, self.values)
        return out if out.ndim else float(out)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("t,value\n")
            for t, v in zip(self.grid, self.values):
                fh.write(f"{t:.17g},{v:.17g}\n")


@dataclass(frozen=True)
class SteadyState:
    """Riccati fixed point, its spectral gap, and optionally a linear fixed point."""

    Rbar: float
    gap: float
    vbar: float | None = None


def _coefficient_tables(coeff, nodes: np.ndarray, mids: np.ndarray):
    """Evaluate a coefficient spec at grid nodes and midpoints.

    Accepts a float, a vectorized callable of time, or a precomputed pair
    (node_values, mid_values).
    """
    if isinstance(coeff, tuple):
        node_vals, mid_vals = coeff
        node_vals = np.asarray(node_vals, dtype=float)
        mid_vals = np.asarray(mid_vals, dtype=float)
        if node_vals.shape != nodes.shape or mid_vals.shape != mids.shape:
            raise ValueError("precomputed coefficient tables have wrong length")
        return node_vals, mid_vals
    if callable(coeff):
        return (
            np.asarray(coeff(nodes), dtype=float) * np.ones_like(nodes),
            np.asarray(coeff(mids), dtype=float) * np.ones_like(mids),
        )
    c = float(coeff)
    return np.full_like(nodes, c), np.full_like(mids, c)


def _grid(horizon: float, steps_per_unit_time: int):
    if steps_per_unit_time < 1:
        raise ValueError("steps_per_unit_time must be a positive integer")
    n_steps = max(1, math.ceil(horizon * steps_per_unit_time))
    nodes = np.linspace(0.0, horizon, n_steps + 1)
    h = horizon / n_steps
    mids = nodes[:-1] + 0.5 * h
    return nodes, mids, h


def solve_backward_riccati(
    problem: RiccatiProblem,
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
    blow_up: float = BLOW_UP_BOUND,
) -> GridSolution:
    """Integrate the Riccati problem backward from R(T) = 0.

    Raises :class:`BlowUpError` if |R| exceeds ``blow_up`` or goes
    non-finite, which signals nonexistence of a bounded solution for the
    supplied coefficients.
    """
    nodes, mids, h = _grid(problem.horizon, steps_per_unit_time)
    a1n, a1m = _coefficient_tables(problem.a1, nodes, mids)
    a2n, a2m = _coefficient_tables(problem.a2, nodes, mids)
    a3n, a3m = _coefficient_tables(problem.a3, nodes, mids)
    if np.any(a1n < 0.0) or np.any(a1m < 0.0):
        raise ValueError("quadratic coefficient a1 must be nonnegative on [0, T]")

    a1n_l, a2n_l, a3n_l = a1n.tolist(), a2n.tolist(), a3n.tolist()
    a1m_l, a2m_l, a3m_l = a1m.tolist(), a2m.tolist(), a3m.tolist()

    n_steps = len(mids)
    values = [0.0] * (n_steps + 1)
    r = 0.0
    for k in range(n_steps, 0, -1):
        k1 = a1n_l[k] * r * r - 2.0 * a2n_l[k] * r - a3n_l[k]
        y = r - 0.5 * h * k1
        k2 = a1m_l[k - 1] * y * y - 2.0 * a2m_l[k - 1] * y - a3m_l[k - 1]
        y = r - 0.5 * h * k2
        k3 = a1m_l[k - 1] * y * y - 2.0 * a2m_l[k - 1] * y - a3m_l[k - 1]
        y = r - h * k3
        k4 = a1n_l[k - 1] * y * y - 2.0 * a2n_l[k - 1] * y - a3n_l[k - 1]
        r = r - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(r) or abs(r) > blow_up:
            raise BlowUpError(
                f"Riccati solution left [-{blow_up:g}, {blow_up:g}] near t = "
                f"{nodes[k - 1]:.6g}; no bounded solution for these coefficients"
            )
        values[k - 1] = r
    return GridSolution(grid=nodes, values=np.array(values))


def solve_backward_linear(
    b1,
    b2,
    horizon: float,
    steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME,
) -> GridSolution:
    """Integrate dv/dt = b1(t) v - b2(t) backward from v(T) = 0."""
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    nodes, mids, h = _grid(horizon, steps_per_unit_time)
    b1n, b1m = _coefficient_tables(b1, nodes, mids)
    b2n, b2m = _coefficient_tables(b2, nodes, mids)
    b1n_l, b2n_l = b1n.tolist(), b2n.tolist()
    b1m_l, b2m_l = b1m.tolist(), b2m.tolist()

    n_steps = len(mids)
    values = [0.0] * (n_steps + 1)
    v = 0.0
    for k in range(n_steps, 0, -1):
        k1 = b1n_l[k] * v - b2n_l[k]
        k2 = b1m_l[k - 1] * (v - 0.5 * h * k1) - b2m_l[k - 1]
        k3 = b1m_l[k - 1] * (v - 0.5 * h * k2) - b2m_l[k - 1]
        k4 = b1n_l[k - 1] * (v - h * k3) - b2n_l[k - 1]
        v = v - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(v):
            raise BlowUpError(f"linear backward solution went non-finite near t = {nodes[k - 1]:.6g}")
        values[k - 1] = v
    return GridSolution(grid=nodes, values=np.array(values))


def steady_riccati_root(abar: Sequence[float]) -> SteadyState:
    """Stationary root of a1 x^2 - 2 a2 x - a3 = 0 with its spectral gap.

    Returns the larger root when a1 > 0 (computed without subtractive
    cancellation) and the unique linear root -a3 / (2 a2) when a1
    degenerates; the branch switch at a1 < 1e-14 keeps the root continuous
    across the memoryless boundary.
    """
    a1, a2, a3 = (float(x) for x in abar)
    if a1 < 0.0:
        raise ValueError("a1 must be nonnegative")
    if a1 < 1e-14:
        if a2 == 0.0:
            raise ValueError("a2 must be nonzero when a1 vanishes")
        return SteadyState(Rbar=-a3 / (2.0 * a2), gap=abs(a2))
    disc = a2 * a2 + a1 * a3
    if disc <= 0.0:
        raise DiscriminantError(
            f"steady-state discriminant a2^2 + a1 a3 = {disc:.6g} is not positive"
        )
    gap = math.sqrt(disc)
    if a2 >= 0.0:
        root = (a2 + gap) / a1
    else:
        root = a3 / (gap - a2)
    return SteadyState(Rbar=root, gap=gap)


def steady_linear(minus_gap: float, forcing: float) -> float:
    """Solve the linear fixed-point equation minus_gap * x + forcing = 0.

    ``minus_gap`` is the long-run coefficient of the backward linear
    equation and must be negative (stable root).
    """
    minus_gap = float(minus_gap)
    if minus_gap >= 0.0:
        raise DegenerateGapError(
            f"fixed-point coefficient {minus_gap:.6g} is not negative"
        )
    return float(forcing) / (-minus_gap)


def existence_branch(
    params: model.MemoryParams,
    utility: model.PowerUtility,
    j: int,
    equation: str = "finite_horizon",
) -> str:
    """Which existence branch covers asset j: linear, nonnegative, or shifted.

    ``equation="growth"`` selects the long-run verification equation, whose
    nonnegative branch additionally requires alpha above the per-asset
    admissibility floor.
    """
    if equation not in ("finite_horizon", "growth"):
        raise ValueError("equation must be 'finite_horizon' or 'growth'")
    if equation == "growth":
        floor_j = model.alpha_floor(params, per_asset=True)[j]
        if utility.alpha <= floor_j:
            raise AdmissibilityError(
                f"alpha = {utility.alpha:g} is at or below the admissibility floor "
                f"{floor_j:g} for asset {j}"
            )
    if params.p[j] == 0.0:
        return "linear"
    if utility.alpha < 0.0:
        return "nonnegative"
    return "shifted"


def verify_branch(
    solution: GridSolution,
    branch: str,
    shift_bound: Callable[[np.ndarray], np.ndarray] | None = None,
    tol: float = 1e-9,
):
    """Post-hoc check of the bound guaranteed by the existence branch."""
    if branch == "linear":
        return
    if branch == "nonnegative":
        low = float(np.min(solution.values))
        if low < -tol:
            raise BranchViolationError(
                f"nonnegative branch violated: min value {low:.3e} < -{tol:g}"
            )
        return
    if branch == "shifted":
        if shift_bound is None:
            raise ValueError("shifted branch requires the lower-bound function")
        gap = solution.values - np.asarray(shift_bound(solution.grid), dtype=float)
        low = float(np.min(gap))
        if low < -tol:
            raise BranchViolationError(
                f"shifted branch violated: min (R - bound) = {low:.3e} < -{tol:g}"
            )
        return
    raise ValueError(f"unknown branch {branch!r}")


@dataclass(frozen=True)
class DiagnosticsReport:
    """Plateau diagnostics of a backward-solution family over growing horizons."""

    horizons: tuple
    deviations: tuple
    window: tuple
    steady_value: float
    plateau_estimate: float
    tol: float
    decreasing: bool
    passed: bool

    def to_dict(self) -> dict:
        return {
            "horizons": list(self.horizons),
            "sup_deviations": list(self.deviations),
            "window": list(self.window),
            "steady_value": self.steady_value,
            "plateau_estimate": self.plateau_estimate,
            "tol": self.tol,
            "decreasing": self.decreasing,
            "passed": self.passed,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def asymptotic_diagnostics(
    family: Sequence[tuple[float, GridSolution]],
    steady_value: float,
    delta: float = 0.25,
    epsilon: float = 0.25,
    tol: float = 1e-5,
) -> DiagnosticsReport:
    """Sup-deviation from the steady value over the window [delta T, (1-eps) T].

    PASS requires the deviation sequence to decrease with the horizon and the
    largest-horizon deviation to fall below ``tol``.
    """
    if not (0.0 < delta < 1.0 and 0.0 < epsilon < 1.0 and delta + epsilon < 1.0):
        raise ValueError("require delta, epsilon in (0,1) with delta + epsilon < 1")
    items = sorted(family, key=lambda te: te[0])
    if len(items) < 2:
        raise ValueError("at least two horizons are required")
    steady_value = float(steady_value)
    horizons, deviations = [], []
    plateau = steady_value
    for horizon, sol in items:
        mask = (sol.grid >= delta * horizon) & (sol.grid <= (1.0 - epsilon) * horizon)
        if not np.any(mask):
            raise ValueError(f"window is empty for horizon {horizon}")
        window_vals = sol.values[mask]
        deviations.append(float(np.max(np.abs(window_vals - steady_value))))
        horizons.append(float(horizon))
        plateau = float(np.mean(window_vals))
    decreasing = all(b < a for a, b in zip(deviations, deviations[1:]))
    passed = decreasing and deviations[-1] <= tol
    return DiagnosticsReport(
        horizons=tuple(horizons),
        deviations=tuple(deviations),
        window=(delta, epsilon),
        steady_value=steady_value,
        plateau_estimate=plateau,
        tol=tol,
        decreasing=decreasing,
        passed=passed,
    )
