import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memfolio import model
from memfolio.errors import SingularVolatilityError


# ---------------------------------------------------------------------------
# parameter containers

def test_memory_params_validation():
    with pytest.raises(ValueError):
        model.MemoryParams(p=[0.1], q=[0.0])
    with pytest.raises(ValueError):
        model.MemoryParams(p=[0.1], q=[-0.2])
    with pytest.raises(ValueError):
        model.MemoryParams(p=[-0.1], q=[0.2])
    with pytest.raises(ValueError):
        model.MemoryParams(p=[0.1, 0.2], q=[0.3])
    params = model.MemoryParams(p=[0.0, 0.5], q=[0.3, 0.4])
    assert params.n == 2
    with pytest.raises(ValueError):
        params.p[0] = 1.0  # frozen


def test_power_utility_conjugacy():
    u = model.PowerUtility(0.5)
    assert u.beta == -1.0
    u = model.PowerUtility(-1.0)
    assert u.beta == 0.5
    for alpha in (0.5, -1.0, 0.25, -3.7, 0.99):
        u = model.PowerUtility(alpha)
        assert 1.0 / u.alpha + 1.0 / u.beta == pytest.approx(1.0, abs=1e-12)
        if 0 < alpha < 1:
            assert u.beta < 0
        else:
            assert 0 < u.beta < 1
    for bad in (0.0, 1.0, 1.5, np.inf):
        with pytest.raises(ValueError):
            model.PowerUtility(bad)


# ---------------------------------------------------------------------------
# risk premium

def test_risk_premium_identity_vol():
    curves = model.CoefficientCurves.constant(
        r=0.02, mu=[0.1, 0.1, 0.1], sigma=np.eye(3)
    )
    lam = model.risk_premium(curves, 1.7)
    assert lam == pytest.approx([0.08, 0.08, 0.08], abs=1e-15)


def test_risk_premium_zero_excess():
    curves = model.CoefficientCurves.constant(
        r=0.03, mu=[0.03, 0.03], sigma=[[0.3, 0.1], [0.0, 0.2]]
    )
    assert np.allclose(model.risk_premium(curves, 0.0), 0.0, atol=1e-15)


def test_risk_premium_residual_identity():
    # oracle: re-multiply sigma lam + r 1 and compare with mu
    rng = np.random.default_rng(123)
    for _ in range(25):
        n = int(rng.integers(1, 5))
        sigma = rng.normal(size=(n, n)) + 0.5 * np.eye(n)
        if abs(np.linalg.det(sigma)) < 1e-3:
            continue
        mu = rng.normal(size=n)
        r = float(rng.uniform(0, 0.1))
        curves = model.CoefficientCurves.constant(r=r, mu=mu, sigma=sigma)
        lam = model.risk_premium(curves, 2.0)
        assert np.max(np.abs(sigma @ lam + r - mu)) < 1e-12


def test_risk_premium_singular_raises():
    sigma = [[0.2, 0.2], [0.2, 0.2]]
    with pytest.raises(SingularVolatilityError):
        model.CoefficientCurves.constant(r=0.0, mu=[0.05, 0.04], sigma=sigma)


# ---------------------------------------------------------------------------
# kernels

def test_memory_kernel_memoryless():
    params = model.MemoryParams(p=[0.0], q=[0.7])
    for t, s in [(0.0, 0.0), (1.0, 0.3), (10.0, 10.0)]:
        assert model.memory_kernel(params, 0, t, s) == 0.0


def test_memory_kernel_point_value():
    # direct evaluation: p=q=1 gives 1*3*(3-1)/(9-1) at the origin
    params = model.MemoryParams(p=[1.0], q=[1.0])
    assert model.memory_kernel(params, 0, 0.0, 0.0) == pytest.approx(0.75, abs=1e-15)


def test_memory_kernel_domain_errors():
    params = model.MemoryParams(p=[1.0], q=[1.0])
    with pytest.raises(ValueError):
        model.memory_kernel(params, 0, 1.0, 2.0)
    with pytest.raises(ValueError):
        model.memory_kernel(params, 0, 1.0, -0.1)


@settings(max_examples=200, deadline=None)
@given(
    p=st.floats(0.0, 5.0),
    q=st.floats(0.01, 5.0),
    t=st.floats(0.0, 2000.0),
)
def test_kernel_identity_at_zero_lag(p, q, t):
    params = model.MemoryParams(p=[p], q=[q])
    k_diag = model.memory_kernel(params, 0, t, t)
    gain = model.innovation_gain(params, 0, t)
    assert abs(k_diag - gain) <= 1e-12
    assert np.isfinite(k_diag)


def test_innovation_gain_point_value():
    params = model.MemoryParams(p=[1.0], q=[1.0])
    assert model.innovation_gain(params, 0, 0.0) == pytest.approx(0.75, abs=1e-15)


def test_innovation_gain_monotone_and_bounded():
    params = model.MemoryParams(p=[0.8], q=[0.25])
    ts = np.linspace(0.0, 60.0, 400)
    gains = model.innovation_gain(params, 0, ts)
    assert np.all(np.diff(gains) >= -1e-15)
    assert np.all(gains >= 0.0) and np.all(gains <= 0.8 + 1e-15)


def test_innovation_gain_exponential_band():
    # |l(t) - p| <= p^2 e^{-2qt} / (2 (p+q)), tight at t = 0
    p, q = 1.0, 1.0
    params = model.MemoryParams(p=[p], q=[q])
    ts = np.linspace(0.0, 12.0, 200)
    gap = np.abs(model.innovation_gain(params, 0, ts) - p)
    band = p**2 * np.exp(-2.0 * q * ts) / (2.0 * (p + q))
    assert np.all(gap <= band * (1.0 + 1e-12))
    assert gap[0] == pytest.approx(band[0], rel=1e-12)


def test_innovation_gain_no_overflow_long_horizon():
    params = model.MemoryParams(p=[0.5], q=[2.0])
    val = model.innovation_gain(params, 0, 1e6)
    assert val == pytest.approx(0.5, abs=1e-300)


def test_innovation_kernel_values():
    params = model.MemoryParams(p=[1.0], q=[1.0])
    # zero lag reduces to the diagonal gain
    assert model.innovation_kernel(params, 0, 3.0, 3.0) == pytest.approx(
        model.innovation_gain(params, 0, 3.0), abs=1e-15
    )
    # composition of decay and gain
    assert model.innovation_kernel(params, 0, 1.0, 0.0) == pytest.approx(
        np.exp(-2.0) * 0.75, rel=1e-14
    )
    zero = model.MemoryParams(p=[0.0], q=[1.0])
    assert model.innovation_kernel(zero, 0, 5.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        model.innovation_kernel(params, 0, 1.0, 2.0)


def test_innovation_gains_vectorized():
    params = model.MemoryParams(p=[0.0, 0.4], q=[0.3, 0.2])
    out = model.innovation_gains(params, 2.5)
    assert out.shape == (2,)
    assert out[0] == 0.0
    grid = model.innovation_gains(params, np.array([0.0, 1.0, 2.0]))
    assert grid.shape == (3, 2)
    assert grid[1, 1] == pytest.approx(model.innovation_gain(params, 1, 1.0))


# ---------------------------------------------------------------------------
# variance ratio

def test_variance_ratio_memoryless_is_one():
    for t in (1e-8, 0.5, 3.0, 250.0):
        assert model.variance_ratio(0.0, 0.7, t) == pytest.approx(1.0, abs=1e-14)


def test_variance_ratio_limits():
    p, q = 0.4, 0.25
    # long-horizon limit; the transient term decays like 1/t
    limit = q**2 / (p + q) ** 2
    assert model.variance_ratio(p, q, 1e6) == pytest.approx(limit, abs=2e-6)
    assert abs(model.variance_ratio(p, q, 1e9) - limit) < abs(
        model.variance_ratio(p, q, 1e6) - limit
    )
    # series branch at the origin: the two terms sum to one
    assert model.variance_ratio(p, q, 1e-9) == pytest.approx(1.0, rel=1e-9)


def test_variance_ratio_monotone_decreasing():
    ts = np.linspace(1e-3, 50.0, 500)
    vals = model.variance_ratio(0.6, 0.2, ts)
    assert np.all(np.diff(vals) < 0.0)
    assert np.all(vals <= 1.0) and np.all(vals >= 0.2**2 / 0.8**2 - 1e-14)


def test_variance_ratio_domain():
    with pytest.raises(ValueError):
        model.variance_ratio(0.1, 0.2, 0.0)
    with pytest.raises(ValueError):
        model.variance_ratio(0.1, 0.2, -1.0)


# ---------------------------------------------------------------------------
# admissibility floor

def test_alpha_floor_weak_memory_unbounded():
    params = model.MemoryParams(p=[0.1, 0.6], q=[0.3, 0.3])
    assert model.alpha_floor(params) == -np.inf


def test_alpha_floor_point_value():
    params = model.MemoryParams(p=[0.3], q=[0.1])
    assert model.alpha_floor(params) == pytest.approx(-11.0, rel=1e-12)


def test_alpha_floor_fitted_parameters():
    # only the second asset has p > 2q; direct evaluation of the branch
    params = model.MemoryParams(
        p=[0.086, 0.261, 0.076], q=[0.305, 0.044, 0.098]
    )
    floors = model.alpha_floor(params, per_asset=True)
    assert floors[0] == -np.inf and floors[2] == -np.inf
    expected = -3.0 - 8.0 * 0.044 / (0.261 - 2.0 * 0.044)
    assert model.alpha_floor(params) == pytest.approx(expected, rel=1e-14)
    assert model.alpha_floor(params) < -3.0


def test_alpha_floor_monotone_in_p():
    rng = np.random.default_rng(7)
    for _ in range(50):
        q = float(rng.uniform(0.05, 1.0))
        p_lo = float(rng.uniform(0.0, 4.0))
        p_hi = p_lo + float(rng.uniform(0.0, 2.0))
        lo = model.alpha_floor(model.MemoryParams(p=[p_lo], q=[q]))
        hi = model.alpha_floor(model.MemoryParams(p=[p_hi], q=[q]))
        assert hi >= lo


# ---------------------------------------------------------------------------
# coefficient curves

def test_constant_curves_long_run_consistent():
    curves = model.CoefficientCurves.constant(r=0.02, mu=[0.08], sigma=[[0.2]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        r_gap, lam_gap = curves.validate_long_run(horizon=50.0)
    assert r_gap == 0.0 and lam_gap == 0.0
    assert curves.lambda_bar[0] == pytest.approx(0.3)


def test_exponential_decay_curves_converge():
    curves = model.CoefficientCurves.exponential_decay(
        r0=0.05, rbar=0.02, mu0=[0.1], mubar=[0.08], sigma=[[0.2]], rate=0.5
    )
    assert curves.r(0.0) == pytest.approx(0.05)
    assert curves.r(100.0) == pytest.approx(0.02, abs=1e-12)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        curves.validate_long_run(horizon=100.0)


def test_validate_long_run_warns_on_mismatch():
    base = model.CoefficientCurves.constant(r=0.02, mu=[0.08], sigma=[[0.2]])
    skewed = model.CoefficientCurves(
        r=base.r, mu=base.mu, sigma=base.sigma, rbar=0.03, lambda_bar=base.lambda_bar
    )
    with pytest.warns(UserWarning):
        skewed.validate_long_run(horizon=10.0)


def test_tabulated_curves_interpolate():
    times = [0.0, 1.0, 2.0]
    r_vals = [0.0, 0.02, 0.02]
    mu_vals = [[0.05], [0.07], [0.07]]
    sig_vals = [[[0.2]], [[0.3]], [[0.3]]]
    curves = model.CoefficientCurves.tabulated(
        times, r_vals, mu_vals, sig_vals, rbar=0.02, lambda_bar=[0.1]
    )
    assert curves.r(0.5) == pytest.approx(0.01)
    assert curves.mu(0.5)[0] == pytest.approx(0.06)
    assert curves.sigma(0.5)[0, 0] == pytest.approx(0.25)
    # clamped outside the table
    assert curves.r(5.0) == pytest.approx(0.02)
