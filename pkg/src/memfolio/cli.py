"""Batch command-line front end: solve, growth, simulate, verify, estimate.

Every command resolves its configuration, writes its output files, then
writes a run manifest and prints the manifest path — nothing else — to
stdout.  Diagnostics go to stderr.  All randomness is seeded, so re-running
a command reproduces its output files byte for byte.

Exit codes: 0 success (verify: all checks pass), 1 verify failure, 2 config
error, 3 solver blow-up or inadmissible exponent, 4 estimator overflow,
5 fit non-convergence.

Model configuration is a JSON object with keys:

    schema_version : 1
    p, q           : per-asset memory parameters (lists)
    sigma          : volatility matrix, row-major flat list or nested rows
    curves         : {"family": "constant", "r": ..., "mu": [...]}
                     or {"family": "exponential-decay", "r0": ..., "rbar": ...,
                         "mu0": [...], "mubar": [...], "rate": ...}
    rbar           : long-run average riskless rate
    lambda_bar     : long-run risk premium (list)

Environment: MEMFOLIO_OUT_DIR overrides the default output directory,
MEMFOLIO_THREADS the estimator's multi-start worker count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, estimate, model, riccati, simulate, strategy
from ._backend import backend_name
from .errors import (
    AdmissibilityError,
    BlowUpError,
    ConfigError,
    DegenerateLagError,
    EstimateOverflowError,
    FitConvergenceError,
    MemfolioError,
)

SCHEMA_VERSION = 1

EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_OVERFLOW = 4
EXIT_FIT = 5


# ---------------------------------------------------------------------------
# config and output plumbing

def load_model_config(path):
    """Parse and validate a model configuration file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    for key in ("p", "q", "sigma", "curves", "rbar", "lambda_bar"):
        if key not in raw:
            raise ConfigError(f"config is missing required key '{key}'")
    try:
        params = model.MemoryParams(p=raw["p"], q=raw["q"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid memory parameters: {exc}") from None
    n = params.n
    if "n" in raw and int(raw["n"]) != n:
        raise ConfigError(f"declared n = {raw['n']} does not match p/q length {n}")
    sigma = np.asarray(raw["sigma"], dtype=float)
    if sigma.ndim == 1:
        if sigma.size != n * n:
            raise ConfigError(f"sigma must have {n * n} row-major entries")
        sigma = sigma.reshape(n, n)
    elif sigma.shape != (n, n):
        raise ConfigError(f"sigma must be {n}x{n}")
    spec = raw["curves"]
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("curves must be an object with a 'family' key")
    family = spec["family"]
    try:
        if family == "constant":
            curves = model.CoefficientCurves.constant(
                r=spec["r"], mu=spec["mu"], sigma=sigma
            )
        elif family == "exponential-decay":
            curves = model.CoefficientCurves.exponential_decay(
                r0=spec["r0"],
                rbar=spec["rbar"],
                mu0=spec["mu0"],
                mubar=spec["mubar"],
                sigma=sigma,
                rate=spec.get("rate", 1.0),
            )
        else:
            raise ConfigError(f"unknown curve family '{family}'")
        declared = model.CoefficientCurves(
            r=curves.r,
            mu=curves.mu,
            sigma=curves.sigma,
            rbar=raw["rbar"],
            lambda_bar=raw["lambda_bar"],
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid curves: {exc}") from None
    if declared.lambda_bar.size != n:
        raise ConfigError("lambda_bar length does not match the asset count")
    declared.validate_long_run(horizon=100.0, tol=1e-6)
    return params, declared, raw


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def write_csv(path, header, columns):
    columns = [np.asarray(col) for col in columns]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


class Run:
    """Output directory plus the manifest accumulated over a command."""

    def __init__(self, command, args_dict, out_dir, seed=None):
        self.command = command
        self.args = args_dict
        self.out_dir = out_dir
        self.seed = seed
        self.outputs = []
        self.counts = {}
        self.t0 = time.perf_counter()
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        self.outputs.append(name)
        return os.path.join(self.out_dir, name)

    def finish(self):
        manifest = {
            "command": self.command,
            "configuration": self.args,
            "seed": self.seed,
            "tool_version": __version__,
            "backend": backend_name(),
            "outputs": sorted(self.outputs),
            "counts": self.counts,
            "wall_clock_s": round(time.perf_counter() - self.t0, 6),
        }
        path = os.path.join(self.out_dir, "manifest.json")
        write_json(path, manifest)
        print(path)
        return 0


def _out_dir(args):
    return args.out_dir or os.environ.get("MEMFOLIO_OUT_DIR", "memfolio-out")


def _parse_grid(text, name):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name} must look like start:stop:count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"{name} must look like start:stop:count") from None
    if count < 2 or not hi > lo:
        raise ConfigError(f"{name} needs stop > start and count >= 2")
    return np.linspace(lo, hi, count)


# ---------------------------------------------------------------------------
# commands

def cmd_solve(args):
    params, curves, raw = load_model_config(args.config)
    try:
        utility = model.PowerUtility(args.alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    run = Run("solve", {"config": raw, "alpha": args.alpha, "horizon": args.horizon,
                        "steps_per_unit_time": args.steps}, _out_dir(args))
    policy = strategy.solve_finite_horizon(
        params, curves, utility, args.horizon, steps_per_unit_time=args.steps
    )
    header = (
        ["t"]
        + [f"quad_{j + 1}" for j in range(params.n)]
        + [f"lin_{j + 1}" for j in range(params.n)]
    )
    cols = [policy.grid] + [policy.quad_term[:, j] for j in range(params.n)] + [
        policy.lin_term[:, j] for j in range(params.n)
    ]
    write_csv(run.path("riccati_grids.csv"), header, cols)
    g_table = strategy._g_table(policy)
    g_integrals = np.trapezoid(g_table, policy.grid, axis=0)
    value = strategy.value_function(policy, args.x0)
    write_json(
        run.path("value.json"),
        {
            "alpha": utility.alpha,
            "beta": utility.beta,
            "horizon": args.horizon,
            "initial_wealth": args.x0,
            "branches": list(policy.branches),
            "value": value,
            "g_integrals": g_integrals,
            "log_s0": float(np.trapezoid(policy.r_grid, policy.grid)),
        },
    )
    run.counts = {"grid_points": int(policy.grid.size), "assets": params.n}
    return run.finish()


def cmd_growth(args):
    params, curves, raw = load_model_config(args.config)
    floor = model.alpha_floor(params)
    if args.alpha_grid:
        alphas = _parse_grid(args.alpha_grid, "--alpha-grid")
    elif args.alpha is not None:
        alphas = np.array([args.alpha])
    else:
        raise ConfigError("provide --alpha or --alpha-grid")
    run = Run("growth", {"config": raw, "alpha": args.alpha,
                         "alpha_grid": args.alpha_grid, "c_grid": args.c_grid},
              _out_dir(args))
    reports = []
    for a in alphas:
        utility = model.PowerUtility(float(a))  # may raise ValueError -> config
        reports.append(strategy.growth_rate(params, curves, utility))
    write_json(
        run.path("growth.json"),
        {
            "alpha_floor": floor,
            "reports": [rep.to_dict() for rep in reports],
        },
    )
    slope = [
        strategy.log_mgf_slope(params, curves, rep.alpha) if 0.0 < rep.alpha < 1.0 else math.nan
        for rep in reports
    ]
    write_csv(
        run.path("lmgf_curve.csv"),
        ["alpha", "rate_from_steady", "rate_explicit", "two_route_residual", "lmgf", "lmgf_slope"],
        [
            [rep.alpha for rep in reports],
            [rep.rate_from_steady for rep in reports],
            [rep.rate_explicit for rep in reports],
            [abs(rep.rate_from_steady - rep.rate_explicit) for rep in reports],
            [rep.lmgf if 0.0 < rep.alpha < 1.0 else math.nan for rep in reports],
            slope,
        ],
    )
    if args.c_grid:
        cs = _parse_grid(args.c_grid, "--c-grid")
        points = [strategy.rate_function(params, curves, c) for c in cs]
        write_csv(
            run.path("rate_curve.csv"),
            ["c", "decay_rate", "maximizer"],
            [
                [pt.c for pt in points],
                [pt.value for pt in points],
                [pt.maximizer if pt.maximizer is not None else math.nan for pt in points],
            ],
        )
    run.counts = {"alphas": int(alphas.size)}
    return run.finish()


def _build_policy(tag, params, curves, alpha, horizon, steps_per_unit_time):
    if tag == "p1":
        utility = model.PowerUtility(alpha)
        return strategy.solve_finite_horizon(
            params, curves, utility, horizon, steps_per_unit_time=steps_per_unit_time
        )
    if tag == "p2":
        utility = model.PowerUtility(alpha)
        return strategy.solve_stationary(params, curves, utility)
    if tag == "log":
        return strategy.LogOptimalPolicy(curves)
    if tag == "none":
        def riskless(t, xi):
            xi = np.asarray(xi, dtype=float)
            return np.zeros_like(xi)

        riskless.tag = "none"
        return riskless
    raise ConfigError(f"unknown strategy '{tag}'")


def cmd_simulate(args):
    params, curves, raw = load_model_config(args.config)
    if args.strategy in ("p1", "p2") and args.alpha is None:
        raise ConfigError(f"--alpha is required for strategy {args.strategy}")
    steps = args.steps or simulate.default_steps(args.T)
    config = simulate.PathConfig(
        horizon=args.T, steps=steps, n_paths=args.paths, seed=args.seed
    )
    run = Run(
        "simulate",
        {"config": raw, "strategy": args.strategy, "alpha": args.alpha, "T": args.T,
         "paths": args.paths, "steps": steps, "x0": args.x0, "ldp_c": args.ldp_c},
        _out_dir(args),
        seed=args.seed,
    )
    try:
        policy = _build_policy(args.strategy, params, curves, args.alpha, args.T, 64)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    logx = simulate.collect_log_wealth(
        simulate.simulate_wealth(simulate.simulate_noise(params, config), policy, curves, args.x0)
    )
    payload = {
        "strategy": args.strategy,
        "seed": args.seed,
        "horizon": args.T,
        "steps": steps,
        "n_paths": args.paths,
        "scheme": config.scheme,
        "estimates": {},
        "closed_form": {},
    }
    est = payload["estimates"]
    closed = payload["closed_form"]
    growth_T = (1.0 / args.T) * logx
    est["log_growth_mean"] = float(np.mean(growth_T))
    est["log_growth_sd"] = float(np.std(growth_T, ddof=1)) if logx.size > 1 else 0.0
    if args.strategy == "p1":
        utility = model.PowerUtility(args.alpha)
        pu = simulate.mc_power_utility(logx, utility.alpha)
        est["power_utility"] = pu.to_dict()
        value = strategy.value_function(policy, args.x0)
        closed["value"] = value
        closed["abs_error"] = abs(pu.estimate - value)
        closed["within_3se"] = bool(abs(pu.estimate - value) <= 3.0 * pu.se)
    elif args.strategy == "p2":
        gr = simulate.mc_growth_rate(logx, args.alpha, args.T, bootstrap_seed=args.seed + 1)
        est["growth_rate"] = gr.to_dict()
        report = strategy.growth_rate(params, curves, model.PowerUtility(args.alpha))
        closed["growth_rate"] = report.rate
        closed["ci_contains"] = bool(gr.ci_low <= report.rate <= gr.ci_high)
    elif args.strategy == "log":
        closed["benchmark_rate"] = strategy.benchmark_rate(params, curves)
        se = est["log_growth_sd"] / math.sqrt(max(logx.size, 2))
        closed["within_3se"] = bool(
            abs(est["log_growth_mean"] - closed["benchmark_rate"]) <= 3.0 * se
        )
    else:  # none
        log_s0 = float(np.trapezoid([curves.r(t) for t in config.times()], config.times()))
        closed["riskless_log_growth"] = (math.log(args.x0) + log_s0) / args.T
    if args.ldp_c is not None:
        est["exceedance"] = simulate.mc_ldp_probability(logx, args.ldp_c, args.T).to_dict()
        closed["decay_rate"] = strategy.rate_function(params, curves, args.ldp_c).value
    write_json(run.path("estimates.json"), payload)
    if args.dump_paths:
        dump_cfg = simulate.PathConfig(
            horizon=args.T, steps=min(steps, 2048), n_paths=1, seed=args.seed
        )
        paths = simulate.collect_noise_paths(params, dump_cfg)
        log_wealth = simulate.wealth_path_profile(paths, policy, curves, args.x0)
        header = (
            ["t"]
            + [f"xi_{j + 1}" for j in range(params.n)]
            + [f"y_{j + 1}" for j in range(params.n)]
            + ["log_wealth"]
        )
        cols = (
            [paths.times]
            + [paths.xi[:, 0, j] for j in range(params.n)]
            + [paths.y[:, 0, j] for j in range(params.n)]
            + [log_wealth[:, 0]]
        )
        write_csv(run.path("paths.csv"), header, cols)
    run.counts = {"paths": args.paths, "steps": steps}
    return run.finish()


# ---------------------------------------------------------------------------
# verify battery

def _default_verify_model():
    params = model.MemoryParams(p=[0.0, 0.2], q=[0.3, 0.3])
    sigma = [[0.2, 0.0], [0.05, 0.25]]
    mu = np.array([0.08, 0.085])
    curves = model.CoefficientCurves.constant(r=0.02, mu=mu, sigma=sigma)
    return params, curves


def _verify_checks(params, curves):
    checks = []

    def add(name, value, tol, ok=None):
        checks.append(
            {"name": name, "value": float(value), "tol": float(tol),
             "pass": bool(value <= tol) if ok is None else bool(ok)}
        )

    ts = np.linspace(0.0, 40.0, 501)
    worst = 0.0
    for j in range(params.n):
        gap = np.abs(
            np.array([model.memory_kernel(params, j, t, t) for t in ts])
            - model.innovation_gain(params, j, ts)
        )
        worst = max(worst, float(np.max(gap)))
    add("kernel-identity", worst, 1e-12)

    rng = np.random.default_rng(7)
    worst_two_route = 0.0
    worst_identity = 0.0
    for _ in range(50):
        p1 = float(rng.uniform(0.0, 1.2))
        q1 = float(rng.uniform(0.05, 1.0))
        sweep_params = model.MemoryParams(p=[p1], q=[q1])
        lam = float(rng.uniform(-1.0, 1.0))
        sweep_curves = model.CoefficientCurves.constant(
            r=0.01, mu=[0.01 + 0.3 * lam], sigma=[[0.3]]
        )
        floor = model.alpha_floor(sweep_params)
        lo = max(floor, -6.0)
        alpha = float(rng.uniform(lo + 0.05, 0.95))
        if abs(alpha) < 0.01:
            alpha = 0.25
        rep = strategy.growth_rate(sweep_params, sweep_curves, model.PowerUtility(alpha))
        worst_two_route = max(worst_two_route, abs(rep.rate_from_steady - rep.rate_explicit))
        ident = strategy.infinite_horizon_identities(
            sweep_params, sweep_curves, model.PowerUtility(alpha)
        )
        worst_identity = max(worst_identity, ident.max_residual)
    add("two-route-growth", worst_two_route, 1e-9)
    add("steady-identities", worst_identity, 1e-9)

    merton_params = model.MemoryParams(p=[0.0], q=[0.3])
    merton_curves = model.CoefficientCurves.constant(r=0.02, mu=[0.08], sigma=[[0.2]])
    lam2 = float(merton_curves.lambda_bar[0] ** 2)
    rep = strategy.growth_rate(merton_params, merton_curves, model.PowerUtility(0.5))
    add("merton-growth", abs(rep.rate - (0.02 + lam2 / (2.0 * 0.5))), 1e-10)
    policy = strategy.solve_finite_horizon(
        merton_params, merton_curves, model.PowerUtility(0.5), 5.0
    )
    # classical value: (x e^{rT})^a / a * exp(a ||lam||^2 T / (2 (1-a)))
    merton_value = (math.exp(0.02 * 5.0) ** 0.5 / 0.5) * math.exp(
        0.5 * lam2 * 5.0 / (2.0 * 0.5)
    )
    value = strategy.value_function(policy, 1.0)
    add("merton-value", abs(value - merton_value) / abs(merton_value), 1e-8)

    slow = model.MemoryParams(p=[0.2], q=[0.3])
    slow_curves = model.CoefficientCurves.constant(r=0.02, mu=[0.08], sigma=[[0.25]])
    utility = model.PowerUtility(-1.0)
    consts = strategy.stationary_constants(slow, slow_curves, utility)
    fam_R, fam_v = [], []
    for horizon in (25.0, 50.0, 100.0):
        pol = strategy.solve_finite_horizon(slow, slow_curves, utility, horizon)
        fam_R.append((horizon, riccati.GridSolution(pol.grid, pol.quad_term[:, 0])))
        fam_v.append((horizon, riccati.GridSolution(pol.grid, pol.lin_term[:, 0])))
    rep_R = riccati.asymptotic_diagnostics(fam_R, consts["Rbar"][0], tol=1e-5)
    rep_v = riccati.asymptotic_diagnostics(fam_v, consts["vbar"][0], tol=1e-5)
    add("riccati-asymptotics", max(rep_R.deviations[-1], rep_v.deviations[-1]), 1e-5,
        ok=rep_R.passed and rep_v.passed)

    dyn = simulate.DiagonalDynamics(drift_const=0.0, drift_slope=0.0, noise_scale=1.0)
    quad = simulate.QuadraticWeights(quad=1.2, lin=0.0)
    closed = simulate.cameron_martin_closed_form(
        dyn, quad, 0.0, 2.0, [0.0], steps_per_unit_time=512
    )
    analytic = 1.0 / math.sqrt(math.cosh(math.sqrt(1.2) * 2.0))
    add("cameron-martin-cosh", abs(closed - analytic), 1e-6)
    mc = simulate.mc_cameron_martin(
        dyn, quad, 0.0, 2.0, [0.0],
        simulate.PathConfig(horizon=2.0, steps=1024, n_paths=20000, seed=11),
    )
    add("cameron-martin-mc", abs(mc.value - closed), 3.0 * mc.se)

    var_cfg = simulate.PathConfig(horizon=1.0, steps=512, n_paths=20000, seed=13)
    paths = None
    for block in simulate.simulate_noise(params, var_cfg):
        if block.last:
            paths = block.y_end if paths is None else np.vstack([paths, block.y_end])
    var = np.var(paths, axis=0, ddof=1) / var_cfg.horizon
    law = np.array(
        [model.variance_ratio(params.p[j], params.q[j], var_cfg.horizon) for j in range(params.n)]
    )
    se = var * math.sqrt(2.0 / (var_cfg.n_paths - 1))
    add("noise-variance-law", float(np.max(np.abs(var - law))), float(np.max(3.0 * se)))

    cbar = strategy.benchmark_rate(params, curves)
    slope0 = strategy.log_mgf_slope(params, curves, 1e-5)
    add("lmgf-slope-at-zero", abs(slope0 - cbar) / abs(cbar), 1e-3)
    below = [strategy.rate_function(params, curves, c).value for c in (cbar - 0.05, cbar)]
    above = [strategy.rate_function(params, curves, c).value for c in (cbar + 0.02, cbar + 0.05)]
    shape_ok = all(v == 0.0 for v in below) and above[0] < 0.0 and above[1] < above[0]
    add("rate-function-shape", 0.0 if shape_ok else 1.0, 0.5, ok=shape_ok)

    return checks


def cmd_verify(args):
    if args.config:
        params, curves, raw = load_model_config(args.config)
    else:
        params, curves = _default_verify_model()
        raw = "builtin"
    run = Run("verify", {"config": raw, "filter": args.filter}, _out_dir(args))
    checks = _verify_checks(params, curves)
    if args.filter:
        checks = [c for c in checks if args.filter in c["name"]]
        if not checks:
            raise ConfigError(f"--filter {args.filter!r} matches no checks")
    width = max(len(c["name"]) for c in checks)
    for c in checks:
        status = "PASS" if c["pass"] else "FAIL"
        print(
            f"{c['name']:<{width}}  {status}  value={c['value']:.3e}  tol={c['tol']:.3e}",
            file=sys.stderr,
        )
    write_json(run.path("verify.json"), {"checks": checks})
    run.counts = {"checks": len(checks)}
    run.finish()
    return 0 if all(c["pass"] for c in checks) else EXIT_VERIFY_FAIL


def cmd_estimate(args):
    try:
        prices = estimate.ingest_prices(args.prices)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    try:
        table = estimate.sample_lag_covariance(prices, args.max_lag)
    except DegenerateLagError as exc:
        raise ConfigError(str(exc)) from None
    run = Run(
        "estimate",
        {"prices": args.prices, "max_lag": args.max_lag, "starts": args.starts},
        _out_dir(args),
        seed=args.seed,
    )
    result = estimate.fit_parameters(table, starts=args.starts, seed=args.seed)
    write_json(run.path("fit.json"), result.to_dict())
    model_curve = estimate.model_lag_covariance(result.sigma, result.p, result.q, table.lags)
    for i in range(table.n):
        for j in range(i, table.n):
            write_csv(
                run.path(f"curve_{i + 1}_{j + 1}.csv"),
                ["t", "sample_ssr", "model_ssr"],
                [
                    table.lags,
                    estimate.ssr_transform(table.values[:, i, j]),
                    estimate.ssr_transform(model_curve[:, i, j]),
                ],
            )
    run.counts = {"lags": table.max_lag, "assets": table.n, "observations": prices.n_obs}
    return run.finish()


# ---------------------------------------------------------------------------
# entry point

def build_parser():
    parser = argparse.ArgumentParser(
        prog="memfolio",
        description="Optimal investment with memory: solvers, simulation, estimation.",
    )
    parser.add_argument("--version", action="version", version=f"memfolio {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="finite-horizon policy, grids, and value")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--alpha", type=float, required=True)
    p_solve.add_argument("--horizon", type=float, required=True)
    p_solve.add_argument("--steps", type=int, default=64,
                         help="grid steps per unit time (default 64)")
    p_solve.add_argument("--x0", type=float, default=1.0)
    p_solve.add_argument("--out-dir", default=None)
    p_solve.set_defaults(func=cmd_solve)

    p_growth = sub.add_parser("growth", help="long-run growth rate, log-MGF, decay rates")
    p_growth.add_argument("--config", required=True)
    p_growth.add_argument("--alpha", type=float, default=None)
    p_growth.add_argument("--alpha-grid", default=None, help="start:stop:count")
    p_growth.add_argument("--c-grid", default=None, help="start:stop:count")
    p_growth.add_argument("--out-dir", default=None)
    p_growth.set_defaults(func=cmd_growth)

    p_sim = sub.add_parser("simulate", help="Monte Carlo batteries against closed forms")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--strategy", required=True, choices=["p1", "p2", "log", "none"])
    p_sim.add_argument("--T", type=float, required=True)
    p_sim.add_argument("--paths", type=int, default=10000)
    p_sim.add_argument("--steps", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--alpha", type=float, default=None)
    p_sim.add_argument("--x0", type=float, default=1.0)
    p_sim.add_argument("--ldp-c", type=float, default=None)
    p_sim.add_argument("--dump-paths", action="store_true")
    p_sim.add_argument("--out-dir", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_verify = sub.add_parser("verify", help="named invariant checks, PASS/FAIL table")
    p_verify.add_argument("--config", default=None)
    p_verify.add_argument("--filter", default=None)
    p_verify.add_argument("--out-dir", default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_est = sub.add_parser("estimate", help="fit memory parameters to a price CSV")
    p_est.add_argument("--prices", required=True)
    p_est.add_argument("--max-lag", type=int, default=100)
    p_est.add_argument("--starts", type=int, default=16)
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--out-dir", default=None)
    p_est.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, AdmissibilityError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except EstimateOverflowError as exc:
        print(f"estimator overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except FitConvergenceError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        for diag in getattr(exc, "diagnostics", []):
            print(
                f"  start {diag['start']}: objective={diag['objective']:.6g} "
                f"grad={diag['grad_norm']:.3e} iterations={diag['iterations']}",
                file=sys.stderr,
            )
        return EXIT_FIT
    except MemfolioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
