import numpy as np
import pytest

from memfolio import model

# forward-model fixture: a fitted 3-asset parameter set used to exercise the
# estimation pipeline at realistic scale
FITTED_SIGMA = np.array(
    [[28.7, -14.1, 9.1], [20.4, 22.3, 13.4], [-1.8, -4.6, 24.9]]
)
FITTED_P = np.array([0.086, 0.261, 0.076])
FITTED_Q = np.array([0.305, 0.044, 0.098])


@pytest.fixture(scope="session")
def merton1():
    """n=1, memoryless: the classical constant-coefficient benchmark."""
    params = model.MemoryParams(p=[0.0], q=[0.3])
    curves = model.CoefficientCurves.constant(r=0.02, mu=[0.08], sigma=[[0.2]])
    return params, curves


@pytest.fixture(scope="session")
def mem1():
    """n=1 with memory."""
    params = model.MemoryParams(p=[0.3], q=[0.3])
    curves = model.CoefficientCurves.constant(r=0.02, mu=[0.08], sigma=[[0.2]])
    return params, curves


@pytest.fixture(scope="session")
def mem2():
    """n=2, one memoryless and one memory asset; the main desk fixture."""
    params = model.MemoryParams(p=[0.0, 0.2], q=[0.3, 0.4])
    sigma = np.array([[0.2, 0.0], [0.05, 0.25]])
    lam = np.array([0.3, 0.2])
    mu = 0.02 + sigma @ lam
    curves = model.CoefficientCurves.constant(r=0.02, mu=mu, sigma=sigma)
    return params, curves


@pytest.fixture(scope="session")
def slow2():
    """n=2 with small spectral gaps, used for plateau-convergence checks."""
    params = model.MemoryParams(p=[0.0, 0.2], q=[0.22, 0.25])
    sigma = np.array([[0.2, 0.0], [0.05, 0.25]])
    lam = np.array([0.3, 0.2])
    mu = 0.02 + sigma @ lam
    curves = model.CoefficientCurves.constant(r=0.02, mu=mu, sigma=sigma)
    return params, curves
