"""Shared fixtures.

Continuous bridges are expensive to compile (one dense ODE solve per
distinct quadrature panel), so the two gallery problems and their schemes
are session-scoped and shared across test modules.
"""

import numpy as np
import pytest

import shadowkit as sk


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def disc_toy():
    return sk.gallery("disc-toy")


@pytest.fixture(scope="session")
def disc_forced():
    return sk.gallery("disc-forced")


@pytest.fixture(scope="session")
def cont_sin():
    """Full-size window, dichotomy-backed scheme, shared bridge."""
    problem = sk.gallery("cont-sin", {"lambda": 0.5, "eps": 0.1})
    cert = sk.certify_dichotomy(
        problem.system.lin, problem.system.proj, sk.ContinuousWindow(-10, 10, boundary=0.0), 0.5
    )
    scheme = sk.scheme_from_dichotomy(cert, 0.1)
    return problem, cert, scheme


@pytest.fixture(scope="session")
def cont_sin_bounds(cont_sin):
    problem, _, scheme = cont_sin
    return sk.estimate_bounds_continuous(problem.system, scheme)


@pytest.fixture(scope="session")
def cont_rho():
    problem = sk.gallery("cont-rho", {"a": 3})
    scheme = sk.QuadratureScheme(t_tail=problem.t_tail, tail_source="user")
    return problem, scheme


@pytest.fixture(scope="session")
def cont_rho_bounds(cont_rho):
    problem, scheme = cont_rho
    return sk.estimate_bounds_continuous(problem.system, scheme)


@pytest.fixture(scope="session")
def cont_sin_small():
    """Cheap small-window variant for operator-level unit tests."""
    problem = sk.gallery(
        "cont-sin", {"lambda": 0.5, "eps": 0.1, "t_lo": -8.0, "t_hi": 8.0, "h_grid": 0.1,
                     "boundary": 2.0}
    )
    scheme = sk.QuadratureScheme(t_tail=8.0, tail_source="user")
    return problem, scheme


def random_invertible(rng, d, spread=0.3):
    """Random well-conditioned matrix near a scaled rotation."""
    m = np.eye(d) * rng.uniform(0.5, 1.5) + spread * rng.normal(size=(d, d)) / np.sqrt(d)
    while abs(np.linalg.det(m)) < 0.1:
        m = np.eye(d) * rng.uniform(0.5, 1.5) + spread * rng.normal(size=(d, d)) / np.sqrt(d)
    return m


def random_projection(rng, d):
    """Random rank-k idempotent with moderate conditioning."""
    k = int(rng.integers(0, d + 1))
    if k == 0:
        return np.zeros((d, d))
    if k == d:
        return np.eye(d)
    basis = rng.normal(size=(d, d)) + 2 * np.eye(d)
    inv = np.linalg.inv(basis)
    diag = np.diag([1.0] * k + [0.0] * (d - k))
    return basis @ diag @ inv
