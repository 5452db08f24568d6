"""Evolution family integration and the continuous Green kernel."""

import math

import numpy as np
import pytest

import shadowkit as sk


def scalar_lin(coeff, tol=1e-10):
    return sk.LinearPartContinuous(1, coeff, tol_ode=tol)


def rho(t):
    return 1.0 + t if t >= 0 else 1.0 / (1.0 + abs(t))


def test_constant_decay_matches_exponential():
    lin = scalar_lin(lambda t: -1.0)
    val = sk.evolution(lin, 1.0, 0.0)[0, 0]
    assert val == pytest.approx(math.exp(-1.0), abs=1e-9)


def test_identity_at_coincidence():
    lin = scalar_lin(lambda t: -1.0)
    assert np.array_equal(sk.evolution(lin, 2.5, 2.5), np.eye(1))


def test_rho_quotient_evolution():
    problem = sk.gallery("cont-rho", {"a": 3})
    lin = problem.system.lin
    for t, s in [(2.0, -1.0), (-3.0, 1.5), (0.25, 4.0), (5.0, 0.0)]:
        expected = rho(s) / rho(t)
        assert sk.evolution(lin, t, s)[0, 0] == pytest.approx(expected, rel=1e-7)


def test_composition_property(rng):
    lin = sk.LinearPartContinuous(
        2, lambda t: np.array([[0.1 * math.sin(t), 0.3], [-0.3, -0.2 + 0.1 * math.cos(t)]])
    )
    for _ in range(5):
        t, s, r = rng.uniform(-3, 3, size=3)
        lhs = sk.evolution(lin, t, s) @ sk.evolution(lin, s, r)
        rhs = sk.evolution(lin, t, r)
        assert np.max(np.abs(lhs - rhs)) < 10 * lin.tol_ode


def test_green_branches_constant_decay():
    lin = scalar_lin(lambda t: -1.0)
    proj = sk.ProjectionFamily(1)
    assert sk.green_continuous(lin, proj, 2.0, 0.5)[0, 0] == pytest.approx(
        math.exp(-1.5), abs=1e-9
    )
    assert sk.green_continuous(lin, proj, 0.5, 2.0)[0, 0] == 0.0
    assert sk.green_continuous(lin, proj, 1.0, 1.0)[0, 0] == 1.0


def test_rho_kernel_bounded_by_one():
    problem = sk.gallery("cont-rho", {"a": 3})
    lin, proj = problem.system.lin, problem.system.proj
    ts = np.linspace(-10, 10, 11)
    worst = 0.0
    for s in ts:
        col = lin.column(float(s), ts)
        p = proj.at(float(s))
        for i, t in enumerate(ts):
            if t >= s:
                worst = max(worst, abs((col[i] @ p)[0, 0]))
            else:
                worst = max(worst, abs((col[i] @ (np.eye(1) - p))[0, 0]))
    assert worst <= 1.0 + 1e-7


def test_column_consistent_with_pairs():
    lin = scalar_lin(lambda t: -0.5 + 0.2 * math.sin(t))
    ts = np.array([-2.0, -0.5, 0.0, 1.0, 3.0])
    col = lin.column(0.5, ts)
    for i, t in enumerate(ts):
        assert col[i][0, 0] == pytest.approx(sk.evolution(lin, float(t), 0.5)[0, 0], abs=1e-8)


def test_nonfinite_coefficient_raises():
    lin = scalar_lin(lambda t: float("nan"))
    with pytest.raises(sk.IntegrationError):
        sk.evolution(lin, 1.0, 0.0)
