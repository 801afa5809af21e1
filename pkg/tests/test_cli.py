import json
import math
import subprocess
import sys

import numpy as np
import pytest

from memfolio import estimate


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "memfolio", *args],
        capture_output=True,
        text=True,
    )


MERTON_CONFIG = {
    "schema_version": 1,
    "p": [0.0],
    "q": [0.3],
    "sigma": [0.2],
    "curves": {"family": "constant", "r": 0.02, "mu": [0.08]},
    "rbar": 0.02,
    "lambda_bar": [0.3],
}

MEM2_CONFIG = {
    "schema_version": 1,
    "p": [0.0, 0.2],
    "q": [0.3, 0.4],
    "sigma": [0.2, 0.0, 0.05, 0.25],
    "curves": {"family": "constant", "r": 0.02, "mu": [0.08, 0.085]},
    "rbar": 0.02,
    "lambda_bar": [0.3, 0.2],
}


@pytest.fixture
def merton_config(tmp_path):
    path = tmp_path / "merton.json"
    path.write_text(json.dumps(MERTON_CONFIG))
    return str(path)


@pytest.fixture
def mem2_config(tmp_path):
    path = tmp_path / "mem2.json"
    path.write_text(json.dumps(MEM2_CONFIG))
    return str(path)


def manifest_of(result):
    lines = result.stdout.strip().splitlines()
    assert len(lines) == 1, f"stdout must carry only the manifest path: {result.stdout!r}"
    with open(lines[0]) as fh:
        return json.load(fh), lines[0]


# ---------------------------------------------------------------------------
# solve

def test_solve_merton_value(merton_config, tmp_path):
    out = str(tmp_path / "out")
    result = run_cli("solve", "--config", merton_config, "--alpha", "0.5",
                     "--horizon", "5", "--out-dir", out)
    assert result.returncode == 0, result.stderr
    manifest, _ = manifest_of(result)
    assert manifest["command"] == "solve"
    with open(f"{out}/value.json") as fh:
        payload = json.load(fh)
    lam2 = 0.3**2
    oracle = math.exp(0.02 * 5.0) ** 0.5 / 0.5 * math.exp(0.5 * lam2 * 5.0 / (2.0 * 0.5))
    assert payload["value"] == pytest.approx(oracle, rel=1e-8)
    grids = np.loadtxt(f"{out}/riccati_grids.csv", delimiter=",", skiprows=1)
    assert grids.shape[1] == 3  # t, quad_1, lin_1
    assert grids[-1, 1] == 0.0 and grids[-1, 2] == 0.0


def test_solve_zero_alpha_is_config_error(merton_config, tmp_path):
    result = run_cli("solve", "--config", merton_config, "--alpha", "0",
                     "--horizon", "5", "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 2
    assert "alpha" in result.stderr


def test_solve_missing_sigma_is_config_error(tmp_path):
    broken = dict(MERTON_CONFIG)
    del broken["sigma"]
    cfg = tmp_path / "broken.json"
    cfg.write_text(json.dumps(broken))
    result = run_cli("solve", "--config", str(cfg), "--alpha", "0.5",
                     "--horizon", "5", "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 2
    assert "sigma" in result.stderr


# ---------------------------------------------------------------------------
# growth

def test_growth_below_floor_exit_code(tmp_path):
    config = {
        "schema_version": 1,
        "p": [0.3],
        "q": [0.1],
        "sigma": [0.2],
        "curves": {"family": "constant", "r": 0.02, "mu": [0.08]},
        "rbar": 0.02,
        "lambda_bar": [0.3],
    }
    cfg = tmp_path / "strong.json"
    cfg.write_text(json.dumps(config))
    result = run_cli("growth", "--config", str(cfg), "--alpha", "-11.5",
                     "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 3
    assert "-11" in result.stderr  # the admissibility floor is printed


def test_growth_alpha_grid_two_route_column(mem2_config, tmp_path):
    out = str(tmp_path / "out")
    result = run_cli("growth", "--config", mem2_config, "--alpha-grid=-1.45:0.95:25",
                     "--c-grid", "0.0:0.3:31", "--out-dir", out)
    assert result.returncode == 0, result.stderr
    curve = np.loadtxt(f"{out}/lmgf_curve.csv", delimiter=",", skiprows=1)
    residuals = curve[:, 3]
    assert np.max(residuals) <= 1e-9
    with open(f"{out}/growth.json") as fh:
        payload = json.load(fh)
    cbar = payload["reports"][0]["cbar"]
    rate = np.loadtxt(f"{out}/rate_curve.csv", delimiter=",", skiprows=1)
    below = rate[rate[:, 0] <= cbar]
    assert np.all(below[:, 1] == 0.0)
    above = rate[rate[:, 0] > cbar + 1e-9]
    assert np.all(above[:, 1] < 0.0)


def test_growth_alpha_zero_in_grid_rejected(mem2_config, tmp_path):
    result = run_cli("growth", "--config", mem2_config, "--alpha-grid=-1:1:3",
                     "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 2


# ---------------------------------------------------------------------------
# simulate

def test_simulate_riskless_zero_variance(mem2_config, tmp_path):
    out = str(tmp_path / "out")
    result = run_cli("simulate", "--config", mem2_config, "--strategy", "none",
                     "--T", "2", "--paths", "64", "--steps", "128",
                     "--seed", "7", "--out-dir", out)
    assert result.returncode == 0, result.stderr
    with open(f"{out}/estimates.json") as fh:
        payload = json.load(fh)
    assert payload["estimates"]["log_growth_sd"] == 0.0
    assert payload["estimates"]["log_growth_mean"] == pytest.approx(
        payload["closed_form"]["riskless_log_growth"], abs=1e-12
    )


def test_simulate_deterministic_bytes(mem2_config, tmp_path):
    args = ("simulate", "--config", mem2_config, "--strategy", "p2", "--alpha", "0.5",
            "--T", "2", "--paths", "256", "--steps", "64", "--seed", "11")
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    r1 = run_cli(*args, "--out-dir", out1)
    r2 = run_cli(*args, "--out-dir", out2)
    assert r1.returncode == 0 and r2.returncode == 0
    bytes1 = open(f"{out1}/estimates.json", "rb").read()
    bytes2 = open(f"{out2}/estimates.json", "rb").read()
    assert bytes1 == bytes2


def test_simulate_p1_reports_comparison(merton_config, tmp_path):
    out = str(tmp_path / "out")
    result = run_cli("simulate", "--config", merton_config, "--strategy", "p1",
                     "--alpha", "0.5", "--T", "1", "--paths", "4000",
                     "--steps", "256", "--seed", "3", "--out-dir", out)
    assert result.returncode == 0, result.stderr
    with open(f"{out}/estimates.json") as fh:
        payload = json.load(fh)
    assert payload["closed_form"]["within_3se"] is True


def test_simulate_requires_alpha_for_p1(merton_config, tmp_path):
    result = run_cli("simulate", "--config", merton_config, "--strategy", "p1",
                     "--T", "1", "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 2


def test_simulate_dump_paths(mem2_config, tmp_path):
    out = str(tmp_path / "out")
    result = run_cli("simulate", "--config", mem2_config, "--strategy", "log",
                     "--T", "1", "--paths", "16", "--steps", "64", "--seed", "1",
                     "--dump-paths", "--out-dir", out)
    assert result.returncode == 0, result.stderr
    dump = np.loadtxt(f"{out}/paths.csv", delimiter=",", skiprows=1)
    assert dump.shape == (65, 6)  # t, xi_1, xi_2, y_1, y_2, log_wealth
    assert np.all(dump[0, 1:5] == 0.0)
    assert dump[0, 5] == 0.0  # log of unit initial wealth


# ---------------------------------------------------------------------------
# verify

def test_verify_all_pass(tmp_path):
    result = run_cli("verify", "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 0, result.stderr
    table = result.stderr
    assert "PASS" in table and "FAIL" not in table
    assert "kernel-identity" in table and "cameron-martin-mc" in table


def test_verify_filter_subset(tmp_path):
    result = run_cli("verify", "--filter", "kernel", "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 0
    rows = [ln for ln in result.stderr.splitlines() if "  PASS  " in ln or "  FAIL  " in ln]
    assert rows and all("kernel" in row for row in rows)


def test_verify_corrupted_config_rejected(tmp_path):
    bad = dict(MEM2_CONFIG)
    bad["q"] = [0.0, 0.4]
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(bad))
    result = run_cli("verify", "--config", str(cfg), "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 2
    assert "FAIL" not in result.stderr


# ---------------------------------------------------------------------------
# estimate

@pytest.fixture(scope="module")
def small_prices_csv(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("prices")
    prices = estimate.synthetic_price_series(
        np.array([[20.0, 0.0], [6.0, 18.0]]),
        [0.1, 0.25],
        [0.2, 0.05],
        n_obs=600,
        seed=2,
        substeps=8,
    )[0]
    path = tmp / "prices.csv"
    with open(path, "w") as fh:
        fh.write("date,a,b\n")
        for i, row in enumerate(prices):
            fh.write(f"d{i},{row[0]:.10f},{row[1]:.10f}\n")
    return str(path)


def test_estimate_end_to_end(small_prices_csv, tmp_path):
    out = str(tmp_path / "out")
    result = run_cli("estimate", "--prices", small_prices_csv, "--max-lag", "25",
                     "--starts", "6", "--seed", "0", "--out-dir", out)
    assert result.returncode == 0, result.stderr
    with open(f"{out}/fit.json") as fh:
        fit = json.load(fh)
    assert fit["objective"] >= 0.0 and fit["n_converged"] >= 1
    # one curve file per (i, j) pair with i <= j, each with max-lag rows
    for name in ("curve_1_1.csv", "curve_1_2.csv", "curve_2_2.csv"):
        data = np.loadtxt(f"{out}/{name}", delimiter=",", skiprows=1)
        assert data.shape == (25, 3)
    manifest, _ = manifest_of(result)
    assert set(manifest["outputs"]) >= {"fit.json", "curve_1_1.csv", "curve_1_2.csv", "curve_2_2.csv"}


def test_estimate_degenerate_lag_rejected(small_prices_csv, tmp_path):
    result = run_cli("estimate", "--prices", small_prices_csv, "--max-lag", "599",
                     "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 2


def test_estimate_bad_csv_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("date,a\nd1,100.0\nd2,-3.0\nd3,101.0\n")
    result = run_cli("estimate", "--prices", str(path), "--max-lag", "5",
                     "--out-dir", str(tmp_path / "o"))
    assert result.returncode == 2
    assert "row 3" in result.stderr
