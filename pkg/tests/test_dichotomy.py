"""Dichotomy certification: fitted constants and failure modes."""

import math

import numpy as np
import pytest

import shadowkit as sk


def test_constant_decay_recovers_unit_constants():
    lin = sk.LinearPartContinuous(1, lambda t: -1.0)
    proj = sk.ProjectionFamily(1)
    cert = sk.certify_dichotomy(lin, proj, sk.ContinuousWindow(-10, 10, boundary=0.0), 0.5)
    assert cert.D == pytest.approx(1.0, rel=0.02)
    assert cert.rho == pytest.approx(1.0, rel=0.02)
    assert cert.margin <= 1e-8


def test_no_decay_detected():
    lin = sk.LinearPartContinuous(1, lambda t: 0.0)
    proj = sk.ProjectionFamily(1)
    with pytest.raises(sk.NoDichotomyError) as err:
        sk.certify_dichotomy(lin, proj, sk.ContinuousWindow(-5, 5, boundary=0.0), 1.0)
    assert err.value.worst_pair is not None


def test_discrete_saddle_recovers_log_two():
    w = sk.DiscreteWindow(-20, 20, margin=0)
    lin = sk.LinearPartDiscrete(2, lambda n: np.diag([0.5, 2.0]), w)
    proj = sk.ProjectionFamily(2, lambda n: np.diag([1.0, 0.0]))
    cert = sk.certify_dichotomy(lin, proj, w, 2)
    assert cert.D == pytest.approx(1.0, rel=0.02)
    assert cert.rho == pytest.approx(math.log(2.0), rel=0.02)


def test_certified_bound_holds_on_samples():
    w = sk.DiscreteWindow(-15, 15, margin=0)
    lin = sk.LinearPartDiscrete(1, lambda n: 0.6, w)
    proj = sk.ProjectionFamily(1)
    cert = sk.certify_dichotomy(lin, proj, w, 1)
    for m in range(-15, 16, 3):
        for n in range(-15, 16, 3):
            norm = abs(sk.green_discrete(lin, proj, m, n)[0, 0])
            assert norm <= cert.D * math.exp(-cert.rho * abs(m - n)) * (1 + 1e-6)


def test_noncommuting_projection_rejected():
    w = sk.DiscreteWindow(-8, 8, margin=0)
    lin = sk.LinearPartDiscrete(2, lambda n: np.array([[0.5, 1.0], [0.0, 2.0]]), w)
    proj = sk.ProjectionFamily(2, lambda n: np.diag([1.0, 0.0]))
    with pytest.raises(sk.NoDichotomyError, match="commute"):
        sk.certify_dichotomy(lin, proj, w, 2)
