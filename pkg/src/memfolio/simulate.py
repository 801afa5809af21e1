"""Path simulation of the noise, memory state, and wealth, plus MC estimators.

Paths stream through the selected backend in (path-chunk, time-block) pieces:
each chunk of paths owns an independent jump-ahead random stream, blocks
within a chunk arrive in time order, and estimators reduce chunk results in
chunk order, so results are bit-identical for a given seed and config no
matter how chunks are scheduled.

All wealth arithmetic stays in log space; powers of wealth are aggregated
with log-sum-exp and only exponentiated on request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import model, riccati
from ._backend import get_core
from .errors import EstimateOverflowError

BLOCK_STEPS = 256
_SCHEMES = ("exact-mean", "euler", "exact-var")
_EXP_MAX = 709.0  # log of the largest finite double, rounded down


@dataclass(frozen=True)
class PathConfig:
    """Simulation battery description; seed and config fully determine output.

    ``scheme`` selects the memory-state update: ``exact-mean`` applies the
    exact exponential decay of the conditional mean with a left-point noise
    gain, ``euler`` is the plain first-order scheme, and ``exact-var``
    additionally integrates the noise variance over each step (Simpson) and
    draws the exact Gaussian — intended for state-only functionals, since it
    decouples the state noise from the increments that drive wealth.

    Chunking is part of the contract: chunk c of ``chunk_paths`` paths uses
    the base Philox stream jumped ahead c times, which makes chunks
    independent and embarrassingly parallel.
    """

    horizon: float
    steps: int
    n_paths: int
    seed: int
    scheme: str = "exact-mean"
    chunk_paths: int = 4096
    max_state_bytes: int = 1 << 30

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")
        if self.steps < 1 or self.n_paths < 1 or self.chunk_paths < 1:
            raise ValueError("steps, n_paths, chunk_paths must be positive")
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}")

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)


def default_steps(horizon: float) -> int:
    """Default battery resolution: 2^10 steps up to T = 10, 2^13 up to T = 100."""
    if horizon <= 10.0:
        return 1 << 10
    if horizon <= 100.0:
        return 1 << 13
    return max(1 << 13, int(64 * horizon))


@dataclass
class NoiseBlock:
    """One (path-chunk, time-block) piece of the noise stream.

    ``z`` are the standard normals of the block (increments are
    sqrt(dt) * z), ``xi_left`` the memory state at each step's left node, and
    ``xi_end``/``y_end`` the states after the block.
    """

    chunk: int
    paths: slice
    k0: int
    dt: float
    sqrt_dt: float
    times: np.ndarray
    z: np.ndarray
    xi_left: np.ndarray
    xi_end: np.ndarray
    y_end: np.ndarray
    first: bool
    last: bool

    @property
    def d_b(self) -> np.ndarray:
        return self.sqrt_dt * self.z


@dataclass
class NoisePath:
    """Fully materialized noise paths (diagnostic view of the stream)."""

    times: np.ndarray  # (K+1,)
    d_b: np.ndarray    # (K, m, n)
    xi: np.ndarray     # (K+1, m, n)
    y: np.ndarray      # (K+1, m, n)


@dataclass
class WealthBatch:
    """Terminal log-wealth of one chunk of paths."""

    paths: slice
    log_wealth: np.ndarray
    tag: str


def _chunk_slices(n_paths: int, chunk_paths: int):
    for lo in range(0, n_paths, chunk_paths):
        yield slice(lo, min(lo + chunk_paths, n_paths))


def _noise_step_arrays(params: model.MemoryParams, config: PathConfig):
    """Per-step (K, n) decay, drift increment, and noise gain arrays."""
    dt = config.dt
    left = config.times()[:-1]
    gain_left = model.innovation_gains(params, left)  # (K, n)
    pq = params.p + params.q
    if config.scheme == "euler":
        phi = np.broadcast_to(1.0 - pq * dt, gain_left.shape)
        gain = gain_left * math.sqrt(dt)
    elif config.scheme == "exact-mean":
        phi = np.broadcast_to(np.exp(-pq * dt), gain_left.shape)
        gain = gain_left * math.sqrt(dt)
    else:  # exact-var
        phi = np.broadcast_to(np.exp(-pq * dt), gain_left.shape)
        gain_mid = model.innovation_gains(params, left + 0.5 * dt)
        gain_right = model.innovation_gains(params, left + dt)
        f0 = np.exp(-2.0 * pq * dt) * gain_left**2
        f1 = np.exp(-pq * dt) * gain_mid**2
        f2 = gain_right**2
        gain = np.sqrt(dt / 6.0 * (f0 + 4.0 * f1 + f2))
    add = np.zeros_like(gain_left)
    return (
        np.ascontiguousarray(phi, dtype=float),
        np.ascontiguousarray(add, dtype=float),
        np.ascontiguousarray(gain, dtype=float),
    )


def simulate_noise(params: model.MemoryParams, config: PathConfig) -> Iterator[NoiseBlock]:
    """Stream the driving-noise state: xi starts at 0, Y starts at 0.

    Per step, dB ~ N(0, dt) independently across assets and paths, the memory
    state follows the configured scheme, and Y accumulates dB - xi dt.
    """
    core = get_core()
    n = params.n
    dt = config.dt
    sqrt_dt = math.sqrt(dt)
    nodes = config.times()
    phi, add, gain = _noise_step_arrays(params, config)
    base = np.random.Philox(config.seed)
    for chunk_index, sl in enumerate(_chunk_slices(config.n_paths, config.chunk_paths)):
        rng = np.random.Generator(base.jumped(chunk_index))
        m = sl.stop - sl.start
        xi = np.zeros((m, n))
        y = np.zeros((m, n))
        for k0 in range(0, config.steps, BLOCK_STEPS):
            kb = min(BLOCK_STEPS, config.steps - k0)
            z = rng.standard_normal((kb, m, n))
            xi_left = np.empty((kb, m, n))
            core.noise_block(
                xi, y, z, phi[k0 : k0 + kb], add[k0 : k0 + kb], gain[k0 : k0 + kb],
                sqrt_dt, dt, xi_left, True,
            )
            yield NoiseBlock(
                chunk=chunk_index,
                paths=sl,
                k0=k0,
                dt=dt,
                sqrt_dt=sqrt_dt,
                times=nodes[k0 : k0 + kb + 1],
                z=z,
                xi_left=xi_left,
                xi_end=xi.copy(),
                y_end=y.copy(),
                first=k0 == 0,
                last=k0 + kb == config.steps,
            )


def collect_noise_paths(params: model.MemoryParams, config: PathConfig) -> NoisePath:
    """Materialize full noise paths; refuses batteries beyond the memory budget."""
    n = params.n
    need = (config.steps + 1) * config.n_paths * n * 8 * 3
    if need > config.max_state_bytes:
        raise ValueError(
            f"collecting {config.steps} steps x {config.n_paths} paths needs "
            f"~{need} bytes, above the {config.max_state_bytes} budget"
        )
    xi = np.empty((config.steps + 1, config.n_paths, n))
    y = np.empty((config.steps + 1, config.n_paths, n))
    d_b = np.empty((config.steps, config.n_paths, n))
    y_run = {}
    for block in simulate_noise(params, config):
        sl = block.paths
        kb = block.z.shape[0]
        if block.first:
            y_run[block.chunk] = np.zeros((sl.stop - sl.start, n))
        xi[block.k0 : block.k0 + kb, sl] = block.xi_left
        yr = y_run[block.chunk]
        for k in range(kb):
            y[block.k0 + k, sl] = yr
            yr = yr + (block.sqrt_dt * block.z[k] - block.xi_left[k] * block.dt)
        y_run[block.chunk] = yr
        d_b[block.k0 : block.k0 + kb, sl] = block.d_b
        if block.last:
            xi[-1, sl] = block.xi_end
            y[-1, sl] = block.y_end
    return NoisePath(times=config.times(), d_b=d_b, xi=xi, y=y)


def simulate_wealth(
    noise: Iterable[NoiseBlock],
    weights: Callable,
    curves: model.CoefficientCurves,
    x: float,
) -> Iterator[WealthBatch]:
    """Accumulate log-wealth along the noise stream under the given strategy.

    ``weights(t, xi)`` returns portfolio fractions; policies exposing
    ``exposure_coefficients`` take the affine fast path through the backend
    kernel, arbitrary callables are evaluated step by step.  Left-point
    quadrature for the drift, log space throughout.
    """
    if not x > 0.0:
        raise ValueError("initial wealth must be positive")
    core = get_core()
    log_x0 = math.log(x)
    tag = getattr(weights, "tag", "custom")
    affine = hasattr(weights, "exposure_coefficients")
    cache: dict[int, tuple] = {}
    logx = None
    for block in noise:
        if block.first:
            logx = np.full(block.paths.stop - block.paths.start, log_x0)
        left = block.times[:-1]
        if block.k0 not in cache:
            r_arr = np.ascontiguousarray([float(curves.r(t)) for t in left])
            lam_arr = np.ascontiguousarray(model.risk_premium_curve(curves, left))
            if affine:
                a_arr, d_arr = weights.exposure_coefficients(left)
                a_arr = np.ascontiguousarray(a_arr)
                d_arr = np.ascontiguousarray(d_arr)
                cache[block.k0] = (r_arr, lam_arr, a_arr, d_arr)
            else:
                sig_arr = [np.atleast_2d(np.asarray(curves.sigma(t), float)) for t in left]
                cache[block.k0] = (r_arr, lam_arr, sig_arr)
        if affine:
            r_arr, lam_arr, a_arr, d_arr = cache[block.k0]
            core.wealth_block(
                logx, block.z, block.xi_left, r_arr, lam_arr, a_arr, d_arr,
                block.sqrt_dt, block.dt,
            )
        else:
            r_arr, lam_arr, sig_arr = cache[block.k0]
            for k in range(block.z.shape[0]):
                xi_k = block.xi_left[k]
                pi = np.asarray(weights(float(left[k]), xi_k), dtype=float)
                u = pi @ sig_arr[k]
                drift = (u * (lam_arr[k] - xi_k) - 0.5 * u * u).sum(axis=1)
                stoch = (u * block.z[k]).sum(axis=1)
                logx += (r_arr[k] + drift) * block.dt + stoch * block.sqrt_dt
        if block.last:
            yield WealthBatch(paths=block.paths, log_wealth=logx, tag=tag)
            logx = None


def collect_log_wealth(wealth) -> np.ndarray:
    """Concatenate a wealth stream (or pass an array through)."""
    if isinstance(wealth, np.ndarray):
        return wealth
    parts = [batch.log_wealth for batch in wealth]
    return np.concatenate(parts)


def wealth_path_profile(
    paths: NoisePath,
    weights: Callable,
    curves: model.CoefficientCurves,
    x: float,
) -> np.ndarray:
    """Running log-wealth along materialized noise paths; (K+1, m) array.

    Diagnostic companion of :func:`simulate_wealth` for path dumps and
    plots; same left-point scheme, evaluated step by step.
    """
    if not x > 0.0:
        raise ValueError("initial wealth must be positive")
    n_steps = paths.d_b.shape[0]
    m = paths.d_b.shape[1]
    dt = float(paths.times[1] - paths.times[0])
    out = np.empty((n_steps + 1, m))
    out[0] = math.log(x)
    for k in range(n_steps):
        t_k = float(paths.times[k])
        xi_k = paths.xi[k]
        pi = np.asarray(weights(t_k, xi_k), dtype=float)
        sig = np.atleast_2d(np.asarray(curves.sigma(t_k), dtype=float))
        lam = model.risk_premium(curves, t_k)
        u = pi @ sig
        drift = (u * (lam - xi_k) - 0.5 * u * u).sum(axis=1)
        stoch = (u * paths.d_b[k]).sum(axis=1)
        out[k + 1] = out[k] + (float(curves.r(t_k)) + drift) * dt + stoch
    return out


# ---------------------------------------------------------------------------
# estimators

@dataclass(frozen=True)
class PowerUtilityEstimate:
    alpha: float
    n_paths: int
    estimate: float
    se: float
    log_mean_power: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_paths": self.n_paths,
            "estimate": self.estimate,
            "se": self.se,
            "log_mean_power": self.log_mean_power,
        }


def mc_power_utility(wealth, alpha: float) -> PowerUtilityEstimate:
    """Monte Carlo mean and standard error of X(T)^alpha / alpha.

    Aggregation is log-sum-exp over alpha * log X; an exponent-range
    overflow is reported as an error, never clipped.
    """
    alpha = float(alpha)
    if alpha >= 1.0 or alpha == 0.0:
        raise ValueError("alpha must lie in (-inf, 1) excluding 0")
    logx = collect_log_wealth(wealth)
    a = alpha * logx
    shift = float(np.max(a))
    w = np.exp(a - shift)
    log_mean = shift + math.log(float(np.mean(w)))
    if log_mean > _EXP_MAX:
        raise EstimateOverflowError(
            f"log E[X^alpha] = {log_mean:.3g} exceeds the double exponent range"
        )
    n = logx.size
    sd_w = float(np.std(w, ddof=1)) if n > 1 else 0.0
    if sd_w > 0.0:
        log_se = shift + math.log(sd_w) - 0.5 * math.log(n)
        if log_se > _EXP_MAX:
            raise EstimateOverflowError("standard error exceeds the double exponent range")
        se = math.exp(log_se) / abs(alpha)
    else:
        se = 0.0
    return PowerUtilityEstimate(
        alpha=alpha,
        n_paths=n,
        estimate=math.exp(log_mean) / alpha,
        se=se,
        log_mean_power=log_mean,
    )


@dataclass(frozen=True)
class GrowthRateEstimate:
    alpha: float
    horizon: float
    n_paths: int
    estimate: float
    ci_low: float
    ci_high: float
    n_boot: int
    bias_note: str

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "horizon": self.horizon,
            "n_paths": self.n_paths,
            "estimate": self.estimate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "n_boot": self.n_boot,
            "bias_note": self.bias_note,
        }


_JENSEN_NOTE = (
    "log-of-sample-mean estimator; Jensen bias is downward of order "
    "Var[X^alpha] / (2 n E[X^alpha]^2)"
)


def mc_growth_rate(
    wealth,
    alpha: float,
    horizon: float,
    n_boot: int = 200,
    bootstrap_seed: int = 0,
) -> GrowthRateEstimate:
    """(1/(alpha T)) log of the MC mean of X(T)^alpha with a bootstrap CI."""
    alpha = float(alpha)
    if alpha >= 1.0 or alpha == 0.0:
        raise ValueError("alpha must lie in (-inf, 1) excluding 0")
    logx = collect_log_wealth(wealth)
    n = logx.size
    a = alpha * logx
    shift = float(np.max(a))
    w = np.exp(a - shift)
    denom = alpha * horizon
    estimate = (shift + math.log(float(np.mean(w)))) / denom
    rng = np.random.default_rng(bootstrap_seed)
    boots = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n, n)
        boots[b] = (shift + math.log(float(np.mean(w[idx])))) / denom
    lo, hi = np.percentile(boots, [2.5, 97.5])
    return GrowthRateEstimate(
        alpha=alpha,
        horizon=horizon,
        n_paths=n,
        estimate=estimate,
        ci_low=float(lo),
        ci_high=float(hi),
        n_boot=n_boot,
        bias_note=_JENSEN_NOTE,
    )


@dataclass(frozen=True)
class ExceedanceEstimate:
    c: float
    horizon: float
    n_paths: int
    probability: float
    se: float
    log_rate: float
    exceedances: int
    low_count_warning: bool

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "horizon": self.horizon,
            "n_paths": self.n_paths,
            "probability": self.probability,
            "se": self.se,
            "log_rate": self.log_rate,
            "exceedances": self.exceedances,
            "low_count_warning": self.low_count_warning,
        }


def mc_ldp_probability(wealth, c: float, horizon: float) -> ExceedanceEstimate:
    """Estimate P(X(T) >= e^{cT}) with the binomial standard error."""
    logx = collect_log_wealth(wealth)
    n = logx.size
    hits = int(np.count_nonzero(logx >= c * horizon))
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / n)
    log_rate = math.log(p) / horizon if p > 0.0 else -math.inf
    return ExceedanceEstimate(
        c=float(c),
        horizon=float(horizon),
        n_paths=n,
        probability=p,
        se=se,
        log_rate=log_rate,
        exceedances=hits,
        low_count_warning=hits < 100,
    )


# ---------------------------------------------------------------------------
# quadratic-functional expectations for linear-Gaussian states

def _spec_len(spec):
    if np.isscalar(spec) or callable(spec):
        return None
    return len(tuple(spec))


def _per_component(spec, n: int, name: str):
    if np.isscalar(spec) or callable(spec):
        return tuple([spec] * n)
    out = tuple(spec)
    if len(out) != n:
        raise ValueError(f"{name} must have one entry per component")
    return out


@dataclass(frozen=True)
class DiagonalDynamics:
    """Decoupled linear SDE d xi_j = [a_j(t) + b_j(t) xi_j] dt + c_j(t) dB_j.

    Entries may be floats or callables of time; scalars broadcast across
    components.
    """

    drift_const: tuple
    drift_slope: tuple
    noise_scale: tuple

    def __post_init__(self):
        lens = [
            x
            for x in (
                _spec_len(self.drift_const),
                _spec_len(self.drift_slope),
                _spec_len(self.noise_scale),
            )
            if x is not None
        ]
        n = max(lens) if lens else 1
        object.__setattr__(self, "drift_const", _per_component(self.drift_const, n, "drift_const"))
        object.__setattr__(self, "drift_slope", _per_component(self.drift_slope, n, "drift_slope"))
        object.__setattr__(self, "noise_scale", _per_component(self.noise_scale, n, "noise_scale"))

    @property
    def n(self) -> int:
        return len(self.drift_const)


@dataclass(frozen=True)
class QuadraticWeights:
    """Diagonal quadratic functional integrand (1/2) xi' Q xi + h' xi."""

    quad: tuple
    lin: tuple

    def __post_init__(self):
        lens = [x for x in (_spec_len(self.quad), _spec_len(self.lin)) if x is not None]
        n = max(lens) if lens else 1
        object.__setattr__(self, "quad", _per_component(self.quad, n, "quad"))
        object.__setattr__(self, "lin", _per_component(self.lin, n, "lin"))

    @property
    def n(self) -> int:
        return len(self.quad)


def _shifted(coeff, t0: float):
    if callable(coeff):
        return lambda s: np.asarray(coeff(np.asarray(s, dtype=float) + t0), dtype=float)
    return float(coeff)


def cameron_martin_closed_form(
    dynamics: DiagonalDynamics,
    weights: QuadraticWeights,
    t0: float,
    horizon_end: float,
    xi0,
    steps_per_unit_time: int = riccati.DEFAULT_STEPS_PER_UNIT_TIME,
) -> float:
    """Closed-form E[exp(-int_{t0}^{T} (1/2) xi'Q xi + h' xi ds) | xi(t0) = xi0].

    Solves the per-component backward Riccati and linear equations on
    [t0, T] and assembles the exponential correction by trapezoid
    quadrature.  A Riccati blow-up means no bounded solution exists and is
    raised as such.
    """
    span = horizon_end - t0
    if not span > 0.0:
        raise ValueError("need horizon_end > t0")
    n = dynamics.n
    if weights.n != n:
        raise ValueError("dynamics and weights component counts differ")
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    if xi0.size != n:
        raise ValueError("xi0 must have one entry per component")
    nodes, mids, _ = riccati._grid(span, steps_per_unit_time)
    exponent = 0.0
    correction = np.zeros_like(nodes)
    for j in range(n):
        a = riccati._coefficient_tables(_shifted(dynamics.drift_const[j], t0), nodes, mids)
        b = riccati._coefficient_tables(_shifted(dynamics.drift_slope[j], t0), nodes, mids)
        c = riccati._coefficient_tables(_shifted(dynamics.noise_scale[j], t0), nodes, mids)
        q = riccati._coefficient_tables(_shifted(weights.quad[j], t0), nodes, mids)
        h = riccati._coefficient_tables(_shifted(weights.lin[j], t0), nodes, mids)
        problem = riccati.RiccatiProblem(
            a1=(c[0] ** 2, c[1] ** 2), a2=(b[0], b[1]), a3=(q[0], q[1]), horizon=span
        )
        rsol = riccati.solve_backward_riccati(problem, steps_per_unit_time)
        r_mid = np.interp(mids, nodes, rsol.values)
        vsol = riccati.solve_backward_linear(
            b1=(c[0] ** 2 * rsol.values - b[0], c[1] ** 2 * r_mid - b[1]),
            b2=(-(h[0] + rsol.values * a[0]), -(h[1] + r_mid * a[1])),
            horizon=span,
            steps_per_unit_time=steps_per_unit_time,
        )
        exponent += vsol.values[0] * xi0[j] - 0.5 * xi0[j] ** 2 * rsol.values[0]
        correction = correction + (
            c[0] ** 2 * vsol.values**2 + 2.0 * a[0] * vsol.values - c[0] ** 2 * rsol.values
        )
    exponent += 0.5 * float(np.trapezoid(correction, nodes))
    return float(np.exp(exponent))


@dataclass(frozen=True)
class CameronMartinEstimate:
    value: float
    se: float
    n_paths: int

    def to_dict(self) -> dict:
        return {"value": self.value, "se": self.se, "n_paths": self.n_paths}


def mc_cameron_martin(
    dynamics: DiagonalDynamics,
    weights: QuadraticWeights,
    t0: float,
    horizon_end: float,
    xi0,
    config: PathConfig,
) -> CameronMartinEstimate:
    """Monte Carlo twin of :func:`cameron_martin_closed_form`.

    Simulates the state from xi(t0) = xi0 and averages exp of minus the
    trapezoid quadrature of the functional.  ``config.horizon`` must equal
    the span T - t0.
    """
    core = get_core()
    span = horizon_end - t0
    if abs(config.horizon - span) > 1e-12 * max(1.0, abs(span)):
        raise ValueError("config.horizon must equal horizon_end - t0")
    n = dynamics.n
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=float))
    dt = config.dt
    sqrt_dt = math.sqrt(dt)
    nodes = t0 + config.times()
    left = nodes[:-1]
    mids = left + 0.5 * dt

    def table(spec, ts):
        col = [np.broadcast_to(np.asarray(
            s(ts) if callable(s) else float(s), dtype=float), ts.shape) for s in spec]
        return np.ascontiguousarray(np.stack(col, axis=-1))

    a_left = table(dynamics.drift_const, left)
    b_left = table(dynamics.drift_slope, left)
    c_left = table(dynamics.noise_scale, left)
    qdiag = table(weights.quad, nodes)
    hvec = table(weights.lin, nodes)

    if config.scheme == "euler":
        phi = 1.0 + b_left * dt
        add = a_left * dt
        gain = c_left * sqrt_dt
    else:
        phi = np.exp(b_left * dt)
        safe_b = np.where(np.abs(b_left) > 1e-12, b_left, 1.0)
        add = np.where(np.abs(b_left) > 1e-12, a_left * (phi - 1.0) / safe_b, a_left * dt)
        if config.scheme == "exact-var":
            c_mid = table(dynamics.noise_scale, mids)
            c_right = table(dynamics.noise_scale, left + dt)
            f0 = np.exp(2.0 * b_left * dt) * c_left**2
            f1 = np.exp(b_left * dt) * c_mid**2
            f2 = c_right**2
            gain = np.sqrt(dt / 6.0 * (f0 + 4.0 * f1 + f2))
        else:
            gain = c_left * sqrt_dt
    phi = np.ascontiguousarray(phi)
    add = np.ascontiguousarray(add)
    gain = np.ascontiguousarray(gain)

    values = []
    base = np.random.Philox(config.seed)
    for chunk_index, sl in enumerate(_chunk_slices(config.n_paths, config.chunk_paths)):
        rng = np.random.Generator(base.jumped(chunk_index))
        m = sl.stop - sl.start
        xi = np.tile(xi0, (m, 1))
        y_scratch = np.zeros((m, n))
        acc = np.zeros(m)
        for k0 in range(0, config.steps, BLOCK_STEPS):
            kb = min(BLOCK_STEPS, config.steps - k0)
            z = rng.standard_normal((kb, m, n))
            xi_left_buf = np.empty((kb, m, n))
            core.noise_block(
                xi, y_scratch, z, phi[k0 : k0 + kb], add[k0 : k0 + kb],
                gain[k0 : k0 + kb], sqrt_dt, dt, xi_left_buf, False,
            )
            core.quad_block(
                acc, xi_left_buf, xi, qdiag[k0 : k0 + kb + 1], hvec[k0 : k0 + kb + 1], dt
            )
        values.append(np.exp(-acc))
    vals = np.concatenate(values)
    if not np.all(np.isfinite(vals)):
        raise EstimateOverflowError("functional exponent left the double range")
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return CameronMartinEstimate(value=mean, se=se, n_paths=vals.size)


def with_seed(config: PathConfig, seed: int) -> PathConfig:
    """Copy of a config with a different seed (noise coupling helper)."""
    return replace(config, seed=seed)
