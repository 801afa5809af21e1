"""Memory-parameter estimation from daily close prices.

Pipeline: ingest a price CSV, build annualized lag-covariance curves of the
log returns for lags 1..M (percent^2 per annum, 252 trading days), and fit
(sigma, p, q) by damped Gauss-Newton on the model curve
sigma diag(f(t; p_m, q_m)) sigma' with an analytic Jacobian and multi-start.

The covariance curve determines sigma only up to column permutation and
sign; results are canonicalized (columns by descending p, dominant entry
positive) instead of pretending uniqueness.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import model, simulate
from .errors import DegenerateLagError, FitConvergenceError

TRADING_DAYS = 252
PERCENT = 100.0
_Q_EPS = 1e-6  # floor of the q = eps + w^2 reparameterization

IDENTIFIABILITY_NOTE = (
    "sigma enters only through sigma diag(f) sigma'; it is identified up to "
    "column permutation and sign, and is reported canonicalized (columns by "
    "descending p, largest-magnitude entry positive)"
)


@dataclass(frozen=True)
class PriceSeries:
    """Strictly positive close prices, one row per trading day."""

    prices: np.ndarray  # (N, n)
    labels: tuple = ()

    def __post_init__(self):
        arr = np.asarray(self.prices, dtype=float)
        if arr.ndim != 2:
            raise ValueError("prices must be a 2-d array (days x assets)")
        if arr.shape[0] < 2:
            raise ValueError("too few observations: need at least 2 rows")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("prices must be finite and strictly positive")
        arr.flags.writeable = False
        object.__setattr__(self, "prices", arr)
        if self.labels and len(self.labels) != arr.shape[1]:
            raise ValueError("labels must match the asset count")

    @property
    def n(self) -> int:
        return self.prices.shape[1]

    @property
    def n_obs(self) -> int:
        return self.prices.shape[0]


def ingest_prices(path) -> PriceSeries:
    """Read a price CSV: header ``date,asset1,...`` (date column optional).

    Rows with missing, non-numeric, or non-positive prices are rejected with
    the offending file line in the message.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [cell.strip() for cell in rows[0]]
    skip_date = bool(header) and header[0].lower() in ("date", "day", "time")
    first_col = 1 if skip_date else 0
    labels = tuple(header[first_col:])
    n = len(labels)
    if n == 0:
        raise ValueError(f"{path}: header declares no asset columns")
    data = []
    for line_no, row in enumerate(rows[1:], start=2):
        cells = [cell.strip() for cell in row[first_col:]]
        if len(cells) != n:
            raise ValueError(f"{path}: row {line_no}: expected {n} prices, got {len(cells)}")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise ValueError(f"{path}: row {line_no}: non-numeric price") from None
        if any(not math.isfinite(v) or v <= 0.0 for v in vals):
            raise ValueError(f"{path}: row {line_no}: non-positive or missing price")
        data.append(vals)
    if len(data) < 2:
        raise ValueError(f"{path}: too-short series ({len(data)} data rows)")
    return PriceSeries(prices=np.array(data), labels=labels)


@dataclass(frozen=True)
class LagCovarianceTable:
    """Annualized lag-covariance curves v_ij(t), t = 1..M, percent^2 per annum."""

    lags: np.ndarray    # (M,)
    values: np.ndarray  # (M, n, n), symmetric in (i, j)

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 3 or values.shape[0] != lags.size or values.shape[1] != values.shape[2]:
            raise ValueError("values must be (M, n, n) aligned with lags")
        lags.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def max_lag(self) -> int:
        return self.lags.size


def sample_lag_covariance(prices: PriceSeries, max_lag: int) -> LagCovarianceTable:
    """Centered lag-t log-return covariances, scaled by 100^2 * 252 / (t (N-t-1))."""
    if max_lag < 1:
        raise ValueError("max_lag must be a positive integer")
    n_obs = prices.n_obs
    if n_obs - max_lag < 2:
        raise DegenerateLagError(
            f"max lag {max_lag} leaves fewer than 2 return observations (N = {n_obs})"
        )
    log_s = np.log(prices.prices)
    out = np.empty((max_lag, prices.n, prices.n))
    for t in range(1, max_lag + 1):
        u = log_s[t:] - log_s[:-t]          # (N - t, n)
        uc = u - u.mean(axis=0)
        scale = PERCENT**2 * TRADING_DAYS / (t * (n_obs - t - 1))
        cov = scale * (uc.T @ uc)
        out[t - 1] = 0.5 * (cov + cov.T)
    return LagCovarianceTable(lags=np.arange(1, max_lag + 1, dtype=float), values=out)


def model_lag_covariance(sigma, p, q, t):
    """Model curve sigma diag(f(t; p_m, q_m)) sigma' at lag(s) t."""
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    f = np.stack([model.variance_ratio(p[m], q[m], t_arr) for m in range(p.size)], axis=-1)
    v = np.einsum("im,tm,jm->tij", sigma, f, sigma)
    return v if np.ndim(t) else v[0]


def ssr_transform(x):
    """Signed square root sign(x) sqrt(|x|), the plotting transform."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.sqrt(np.abs(x))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# nonlinear least squares

def _f_and_derivs(p, q, lags):
    """f(t; p, q) and its (p, q) partials on the lag grid; arrays (M, n)."""
    p = p[None, :]
    q = q[None, :]
    t = lags[:, None]
    s = p + q
    x = s * t
    small = x < 1e-6
    with np.errstate(divide="ignore", invalid="ignore"):
        e_big = -np.expm1(-x) / np.where(small, 1.0, x)
        de_big = (np.exp(-x) * x + np.expm1(-x)) / np.where(small, 1.0, x * x)
    e = np.where(small, 1.0 - x / 2.0 + x * x / 6.0, e_big)
    de = np.where(small, -0.5 + x / 3.0 - x * x / 8.0, de_big)
    g = q * q / (s * s)
    dg_dp = -2.0 * q * q / s**3
    dg_dq = 2.0 * q * p / s**3
    f = g + (1.0 - g) * e
    df_dp = dg_dp * (1.0 - e) + (1.0 - g) * t * de
    df_dq = dg_dq * (1.0 - e) + (1.0 - g) * t * de
    return f, df_dp, df_dq


def fit_objective(table: LagCovarianceTable, sigma, p, q) -> float:
    """Sum of squared residuals of the model curve against the sample table."""
    v_model = model_lag_covariance(sigma, p, q, table.lags)
    return float(np.sum((v_model - table.values) ** 2))


def _residual_and_jacobian(theta, table):
    m_lags, n = table.max_lag, table.n
    sigma = theta[: n * n].reshape(n, n)
    u = theta[n * n : n * n + n]
    w = theta[n * n + n :]
    p = u * u
    q = _Q_EPS + w * w
    f, df_dp, df_dq = _f_and_derivs(p, q, table.lags)
    v_model = np.einsum("im,tm,jm->tij", sigma, f, sigma)
    resid = (v_model - table.values).reshape(-1)
    jac = np.empty((m_lags * n * n, theta.size))
    col = 0
    for a in range(n):
        for b in range(n):
            dv = np.zeros((m_lags, n, n))
            dv[:, a, :] += f[:, b][:, None] * sigma[None, :, b]
            dv[:, :, a] += f[:, b][:, None] * sigma[None, :, b]
            jac[:, col] = dv.reshape(-1)
            col += 1
    for m in range(n):
        outer = np.outer(sigma[:, m], sigma[:, m])
        jac[:, col + m] = (df_dp[:, m][:, None, None] * outer[None]).reshape(-1) * (2.0 * u[m])
        jac[:, col + n + m] = (df_dq[:, m][:, None, None] * outer[None]).reshape(-1) * (2.0 * w[m])
    return resid, jac


def _run_start(theta0, table, max_iter, gtol):
    """Damped Gauss-Newton from one start; returns (theta, obj, grad, iters, ok).

    Steps must decrease the objective; once the objective is numerically
    flat, a step that keeps it flat but shrinks the gradient is still
    accepted, which lets the gradient polish down to ``gtol`` at float
    resolution.
    """
    theta = theta0.copy()
    resid, jac = _residual_and_jacobian(theta, table)
    obj = float(resid @ resid)
    mu = 1e-3
    iters = 0
    grad = 2.0 * (jac.T @ resid)
    gnorm = float(np.linalg.norm(grad))
    while iters < max_iter:
        if gnorm <= gtol:
            return theta, obj, gnorm, iters, True
        col_norms = np.linalg.norm(jac, axis=0)
        damp_scale = max(float(np.median(col_norms)), 1e-8)
        zeros = np.zeros(theta.size)
        eye = damp_scale * np.eye(theta.size)
        accepted = False
        for _ in range(60):
            # exact Levenberg step via the stacked least-squares system;
            # uniform damping keeps degenerate columns from dominating the
            # large-damping direction
            augmented = np.vstack([jac, math.sqrt(mu) * eye])
            target = np.concatenate([-resid, zeros])
            step = np.linalg.lstsq(augmented, target, rcond=None)[0]
            trial = theta + step
            t_resid, t_jac = _residual_and_jacobian(trial, table)
            t_obj = float(t_resid @ t_resid)
            decrease = np.isfinite(t_obj) and t_obj < obj
            polish = False
            if not decrease and np.isfinite(t_obj) and t_obj <= obj * (1.0 + 1e-10):
                t_gnorm = float(np.linalg.norm(2.0 * (t_jac.T @ t_resid)))
                polish = t_gnorm < 0.9 * gnorm
            if decrease or polish:
                theta, resid, jac, obj = trial, t_resid, t_jac, min(t_obj, obj)
                mu = max(mu / 3.0, 1e-14)
                accepted = True
                break
            mu *= 10.0
            if mu > 1e14:
                break
        if not accepted:
            # backtracking step along the steepest-descent direction
            direction = -grad / max(gnorm, 1e-300)
            scale = 1.0
            for _ in range(80):
                t_resid, t_jac = _residual_and_jacobian(theta + scale * direction, table)
                t_obj = float(t_resid @ t_resid)
                if np.isfinite(t_obj) and t_obj < obj:
                    theta = theta + scale * direction
                    resid, jac, obj = t_resid, t_jac, t_obj
                    accepted = True
                    break
                scale *= 0.5
        iters += 1
        grad = 2.0 * (jac.T @ resid)
        gnorm = float(np.linalg.norm(grad))
        if not accepted:
            return theta, obj, gnorm, iters, gnorm <= gtol
    return theta, obj, gnorm, iters, gnorm <= gtol


def _canonicalize(sigma, p, q):
    order = np.argsort(-p, kind="stable")
    sigma = sigma[:, order].copy()
    p = p[order].copy()
    q = q[order].copy()
    for m in range(sigma.shape[1]):
        i_max = int(np.argmax(np.abs(sigma[:, m])))
        if sigma[i_max, m] < 0.0:
            sigma[:, m] = -sigma[:, m]
    return sigma, p, q


@dataclass(frozen=True)
class FitResult:
    sigma: np.ndarray
    p: np.ndarray
    q: np.ndarray
    objective: float
    grad_norm: float
    iterations: int
    start_index: int
    n_converged: int
    start_objectives: tuple
    identifiability_note: str = IDENTIFIABILITY_NOTE

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma.tolist(),
            "p": self.p.tolist(),
            "q": self.q.tolist(),
            "objective": self.objective,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "start_index": self.start_index,
            "n_converged": self.n_converged,
            "start_objectives": list(self.start_objectives),
            "identifiability_note": self.identifiability_note,
        }


def _spd_cholesky(mat):
    sym = 0.5 * (mat + mat.T)
    vals, vecs = np.linalg.eigh(sym)
    floor = max(1e-8 * float(vals.max()), 1e-12)
    vals = np.maximum(vals, floor)
    return np.linalg.cholesky(vecs @ np.diag(vals) @ vecs.T)


def fit_parameters(
    table: LagCovarianceTable,
    starts: int = 16,
    seed: int = 0,
    max_iter: int = 500,
    gtol: float = 1e-8,
) -> FitResult:
    """Multi-start damped Gauss-Newton fit of (sigma, p, q) to the table.

    Box constraints (p >= 0, q > 0) are enforced by the smooth
    reparameterization p = u^2, q = 1e-6 + w^2.  Starts share the Cholesky
    factor of the longest-lag covariance as the sigma initialization, with
    p drawn in [0, 0.5] and q in [0.02, 0.5].  Deterministic for a given
    (table, starts, seed); ties in the best objective break by start index.
    """
    if table.max_lag < 3:
        raise ValueError("need at least 3 lags to fit")
    if starts < 1:
        raise ValueError("starts must be positive")
    n = table.n
    sigma0 = _spd_cholesky(table.values[-1])
    rng = np.random.default_rng(seed)
    theta0s = []
    for _ in range(starts):
        p0 = rng.uniform(0.0, 0.5, size=n)
        q0 = rng.uniform(0.02, 0.5, size=n)
        theta0s.append(
            np.concatenate([sigma0.reshape(-1), np.sqrt(p0), np.sqrt(q0 - _Q_EPS)])
        )

    n_workers = max(1, int(os.environ.get("MEMFOLIO_THREADS", "1")))
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(lambda t0: _run_start(t0, table, max_iter, gtol), theta0s))
    else:
        results = [_run_start(t0, table, max_iter, gtol) for t0 in theta0s]

    n_converged = sum(1 for r in results if r[4])
    if n_converged == 0:
        err = FitConvergenceError(
            f"no start reached gradient norm {gtol:g} within {max_iter} iterations"
        )
        err.diagnostics = [
            {"start": i, "objective": r[1], "grad_norm": r[2], "iterations": r[3]}
            for i, r in enumerate(results)
        ]
        raise err
    best_index = min(
        (i for i, r in enumerate(results) if r[4]), key=lambda i: (results[i][1], i)
    )
    theta, obj, gnorm, iters, _ = results[best_index]
    sigma = theta[: n * n].reshape(n, n)
    p = theta[n * n : n * n + n] ** 2
    q = _Q_EPS + theta[n * n + n :] ** 2
    sigma, p, q = _canonicalize(sigma, p, q)
    return FitResult(
        sigma=sigma,
        p=p,
        q=q,
        objective=obj,
        grad_norm=gnorm,
        iterations=iters,
        start_index=best_index,
        n_converged=n_converged,
        start_objectives=tuple(float(r[1]) for r in results),
    )


# ---------------------------------------------------------------------------
# synthetic series for round-trip validation

def synthetic_price_series(
    sigma,
    p,
    q,
    n_obs: int,
    seed: int,
    substeps: int = 16,
    s0: float = 100.0,
    drift: float = 0.0,
    n_series: int = 1,
) -> np.ndarray:
    """Simulate daily close prices under the model with the given parameters.

    ``sigma`` is in the estimator's units (percent per sqrt-annum), p and q
    per day; the daily log-return loading is sigma / (100 sqrt(252)).
    Returns prices with shape (n_series, n_obs, n): n_obs days sampled from a
    noise path integrated with ``substeps`` sub-steps per day.
    """
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    params = model.MemoryParams(p=p, q=q)
    n = params.n
    if n_obs < 2:
        raise ValueError("n_obs must be at least 2")
    n_days = n_obs - 1
    config = simulate.PathConfig(
        horizon=float(n_days),
        steps=n_days * substeps,
        n_paths=n_series,
        seed=seed,
        chunk_paths=max(n_series, 1),
    )
    y_days = np.empty((n_obs, n_series, n))
    for block in simulate.simulate_noise(params, config):
        if block.first:
            y_run = np.zeros((n_series, n))
        kb = block.z.shape[0]
        for k in range(kb):
            global_k = block.k0 + k
            if global_k % substeps == 0:
                y_days[global_k // substeps] = y_run
            y_run = y_run + (block.sqrt_dt * block.z[k] - block.xi_left[k] * block.dt)
        if block.last:
            y_days[-1] = block.y_end
    loading = sigma / (PERCENT * math.sqrt(TRADING_DAYS))
    log_prices = (
        math.log(s0)
        + np.einsum("ij,dsj->dsi", loading, y_days)
        + drift * np.arange(n_obs)[:, None, None]
    )
    return np.exp(np.transpose(log_prices, (1, 0, 2)))
