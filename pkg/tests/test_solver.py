"""Contraction bounds, the discrete solver, and its certificates."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import shadowkit as sk
from test_systems import exact_toy_orbit


def brute_bound_sums(sys_):
    """Independent oracle: direct double loop over kernel norms."""
    w = sys_.window
    q_best = l_best = 0.0
    for m in range(w.interior_lo, w.interior_hi + 1):
        q_m = l_m = 0.0
        for k in range(w.n_lo + 1, w.n_hi + 1):
            norm = float(np.abs(sk.green_discrete(sys_.lin, sys_.proj, m, k)).sum(axis=-1).max())
            q_m += sys_.f.lip(k - 1) * norm
            l_m += sys_.eps.at(k - 1) * norm
        q_best = max(q_best, q_m)
        l_best = max(l_best, l_m)
    return q_best, l_best


def two_sided_system(n_lo=-40, n_hi=40, c=0.2):
    w = sk.DiscreteWindow(n_lo, n_hi, margin=10)
    lin = sk.LinearPartDiscrete(2, lambda n: np.diag([0.5, 2.0]), w)
    proj = sk.ProjectionFamily(2, lambda n: np.diag([1.0, 0.0]))
    f = sk.Nonlinearity(
        2, 1,
        value=lambda n, x, lam: c * np.sin(x),
        dx=lambda n, x, lam: np.diag(c * np.cos(x)),
        dlam=lambda n, x, lam: np.zeros((2, 1)),
        lip_envelope=lambda n: c,
    )
    return sk.DiscreteSystem(w, lin, proj, f, sk.DefectEnvelope(lambda n: 0.05))


def test_bounds_disc_toy_geometric(disc_toy):
    b = sk.estimate_bounds_discrete(disc_toy.system, disc_toy.orbit)
    assert b.q == pytest.approx(0.5, abs=1e-12)
    assert b.L == pytest.approx(0.2, abs=1e-9)
    assert b.radius == pytest.approx(0.4, abs=1e-9)
    assert b.method == "exact-window-sum"


def test_bounds_match_brute_force_small_window():
    problem = sk.gallery("disc-toy", {"n_lo": -15, "n_hi": 15, "margin": 3})
    b = sk.estimate_bounds_discrete(problem.system, problem.orbit)
    q_ref, l_ref = brute_bound_sums(problem.system)
    assert b.q == pytest.approx(q_ref, abs=1e-13)
    assert b.L == pytest.approx(l_ref, abs=1e-13)


def test_bounds_zero_lipschitz(disc_forced):
    b = sk.estimate_bounds_discrete(disc_forced.system, disc_forced.orbit)
    assert b.q == 0.0


def test_bounds_two_sided_kernel():
    sys_ = two_sided_system()
    b = sk.estimate_bounds_discrete(sys_, None)
    # geometric sums of both kernel branches: 0.2 * (2 + 1) in the long-window limit
    assert b.q == pytest.approx(0.6, abs=1e-9)


def test_not_a_contraction_reports_location():
    sys_ = two_sided_system(c=0.5)  # 0.5 * 3 = 1.5 >= 1
    with pytest.raises(sk.NotAContractionError) as err:
        sk.estimate_bounds_discrete(sys_, None)
    assert err.value.q == pytest.approx(1.5, abs=1e-6)
    assert err.value.attained_at is not None


def test_apply_T_zero_for_exact_solution(disc_toy):
    orbit = exact_toy_orbit(disc_toy)
    out = sk.apply_T_discrete(disc_toy.system, orbit, np.zeros((orbit.window.size, 1)))
    assert np.max(np.abs(out)) < 1e-14


def test_apply_T_state_independent_lands_on_fixed_point(disc_forced):
    sys_, orbit = disc_forced.system, disc_forced.orbit
    z1 = sk.apply_T_discrete(sys_, orbit, np.zeros((sys_.window.size, 1)))
    z2 = sk.apply_T_discrete(sys_, orbit, z1)
    assert np.max(np.abs(z2 - z1)) < 1e-14


def test_apply_T_zero_bounded_by_L(disc_toy):
    b = sk.estimate_bounds_discrete(disc_toy.system, disc_toy.orbit)
    out = sk.apply_T_discrete(disc_toy.system, disc_toy.orbit, np.zeros((disc_toy.system.window.size, 1)))
    assert np.max(np.abs(out)) <= b.L + 1e-15


def test_solve_disc_toy_certificates(disc_toy):
    res = sk.solve_shadow_discrete(disc_toy.system, disc_toy.orbit, tol=1e-12)
    assert res.iterations <= 50
    assert res.measured_ratio <= 0.55
    assert res.sup_z <= 0.4
    assert res.residual <= 1e-12
    assert res.equation_residual_interior <= 1e-9
    assert res.aposteriori_bound <= 1e-12
    assert np.allclose(res.x, disc_toy.orbit.values + res.z)


def test_solve_exact_solution_single_iteration(disc_toy):
    orbit = exact_toy_orbit(disc_toy)
    res = sk.solve_shadow_discrete(disc_toy.system, orbit, tol=1e-12)
    assert res.iterations == 1
    assert res.sup_z < 1e-14


def test_solve_forced_single_iteration(disc_forced):
    res = sk.solve_shadow_discrete(disc_forced.system, disc_forced.orbit, tol=1e-12)
    assert res.iterations == 1
    assert res.equation_residual <= 1e-12
    assert res.sup_z <= res.bounds.radius


def test_solver_nonconvergence_error(disc_toy):
    with pytest.raises(sk.NonConvergenceError) as err:
        sk.solve_shadow_discrete(disc_toy.system, disc_toy.orbit, tol=1e-12, max_iter=3)
    assert len(err.value.step_history) == 3


def test_uniqueness_probe(disc_toy):
    b = sk.estimate_bounds_discrete(disc_toy.system, disc_toy.orbit)
    size = disc_toy.system.window.size
    seeds = [np.zeros((size, 1)), np.full((size, 1), b.radius), np.full((size, 1), -b.radius)]
    spread = sk.uniqueness_probe(disc_toy.system, disc_toy.orbit, seeds, tol=1e-13)
    assert spread <= 1e-10


def test_uniqueness_probe_single_seed(disc_toy):
    size = disc_toy.system.window.size
    assert sk.uniqueness_probe(disc_toy.system, disc_toy.orbit, [np.zeros((size, 1))]) == 0.0


def test_uniqueness_probe_rejects_outside_ball(disc_toy):
    size = disc_toy.system.window.size
    with pytest.raises(ValueError, match="outside ball"):
        sk.uniqueness_probe(disc_toy.system, disc_toy.orbit, [np.full((size, 1), 10.0)])


def test_hyers_ulam_reference_values():
    assert sk.hyers_ulam_constants(0.0, 0.1, 1.0, 1.0) == (0.0, 0.2, 0.2)
    q_t, l_t, bound = sk.hyers_ulam_constants(0.25, 1.0, 1.0, 1.0)
    assert (q_t, l_t, bound) == (0.5, 2.0, 4.0)


def test_hyers_ulam_boundary_rejected():
    with pytest.raises(sk.NotAContractionError):
        sk.hyers_ulam_constants(0.5, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        sk.hyers_ulam_constants(-0.1, 1.0, 1.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(
    c=st.floats(min_value=0.0, max_value=2.0),
    eps=st.floats(min_value=1e-6, max_value=10.0),
    decay_d=st.floats(min_value=1e-3, max_value=10.0),
    rate=st.floats(min_value=1e-3, max_value=10.0),
)
def test_hyers_ulam_formula_properties(c, eps, decay_d, rate):
    if 2 * c * decay_d / rate >= 1.0:
        with pytest.raises(sk.NotAContractionError):
            sk.hyers_ulam_constants(c, eps, decay_d, rate)
    else:
        q_t, l_t, bound = sk.hyers_ulam_constants(c, eps, decay_d, rate)
        assert q_t == 2 * c * decay_d / rate
        assert l_t == 2 * eps * decay_d / rate
        assert bound == pytest.approx(l_t / (1 - q_t))
        assert bound >= l_t


def random_ball_element(rng, size, dim, radius):
    z = rng.uniform(-1.0, 1.0, size=(size, dim))
    return z * radius / max(np.max(np.abs(z)), 1e-12)


def test_measured_contraction_and_growth(disc_toy, rng):
    sys_, orbit = disc_toy.system, disc_toy.orbit
    b = sk.estimate_bounds_discrete(sys_, orbit)
    size = sys_.window.size
    for _ in range(20):
        z1 = random_ball_element(rng, size, 1, b.radius)
        z2 = random_ball_element(rng, size, 1, b.radius)
        gap = np.max(np.abs(sk.apply_T_discrete(sys_, orbit, z1) - sk.apply_T_discrete(sys_, orbit, z2)))
        assert gap <= (b.q + 1e-9) * np.max(np.abs(z1 - z2))
    for _ in range(5):
        z = random_ball_element(rng, size, 1, 2 * b.radius)
        out = sk.apply_T_discrete(sys_, orbit, z)
        assert np.max(np.abs(out)) <= b.L + b.q * np.max(np.abs(z)) + 1e-12


def test_ball_invariance(disc_toy, rng):
    sys_, orbit = disc_toy.system, disc_toy.orbit
    b = sk.estimate_bounds_discrete(sys_, orbit)
    size = sys_.window.size
    for _ in range(10):
        z = random_ball_element(rng, size, 1, b.radius)
        out = sk.apply_T_discrete(sys_, orbit, z)
        assert np.max(np.abs(out)) <= b.radius + 1e-12


def test_aposteriori_certificate_by_overiteration(disc_toy):
    sys_, orbit = disc_toy.system, disc_toy.orbit
    b = sk.estimate_bounds_discrete(sys_, orbit)
    gain = b.q / (1 - b.q)
    z = np.zeros((sys_.window.size, 1))
    iterates, steps = [], []
    for _ in range(25):
        z_new = sk.apply_T_discrete(sys_, orbit, z)
        steps.append(np.max(np.abs(z_new - z)))
        z = z_new
        iterates.append(z)
    z_star = z
    for _ in range(20):
        z_star = sk.apply_T_discrete(sys_, orbit, z_star)
    for k in range(3, 15):
        dist = np.max(np.abs(iterates[k] - z_star))
        assert dist <= gain * steps[k] + 1e-14
