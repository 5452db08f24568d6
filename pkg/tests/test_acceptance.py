"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see them
on success).  Criteria with stated runtime budgets build their systems from
scratch inside the timed block.
"""

import math
import time

import numpy as np
import pytest

import shadowkit as sk
from conftest import random_invertible, random_projection


def _report(num, ok, detail):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_1_cont_sin_reproduction():
    t0 = time.monotonic()
    eps = 0.1
    problem = sk.gallery("cont-sin", {"eps": eps})
    system = problem.system
    cert = sk.certify_dichotomy(
        system.lin, system.proj, sk.ContinuousWindow(-10, 10, boundary=0.0), 0.5
    )
    scheme = sk.scheme_from_dichotomy(cert, eps)
    bounds = sk.estimate_bounds_continuous(system, scheme)
    _, _, hu_bound = sk.hyers_ulam_constants(0.0, eps, cert.D, cert.rho)

    grid = system.window.grid
    mask = (grid >= -15.0) & (grid <= 15.0)
    worst_match = worst_supz = 0.0
    bound_ok = True
    for lam in (0.1, 0.5, 0.9):
        res = sk.solve_shadow_continuous(
            system, problem.orbit_at([lam]), scheme, tol=1e-9, bounds=bounds
        )
        x_true = lam / 2 * (np.sin(grid) - np.cos(grid))
        worst_match = max(worst_match, float(np.max(np.abs(res.x[:, 0] - x_true)[mask])))
        worst_supz = max(worst_supz, abs(res.sup_z - lam * eps / math.sqrt(2.0)))
        bound_ok = bound_ok and res.sup_z <= min(2 * eps, hu_bound)
    elapsed = time.monotonic() - t0
    ok = worst_match <= 1e-6 and worst_supz <= 1e-6 and bound_ok and elapsed <= 30.0
    _report(
        1,
        ok,
        f"analytic match {worst_match:.2e} <= 1e-6, sup|x-y| error {worst_supz:.2e} <= 1e-6, "
        f"bound 2*eps respected: {bound_ok}, runtime {elapsed:.1f}s <= 30s",
    )


def test_criterion_2_cont_sin_jets(cont_sin, cont_sin_bounds):
    problem, _, scheme = cont_sin
    eps = 0.1
    system = problem.system
    grid = system.window.grid
    orbit = problem.orbit_at([0.5])
    res = sk.solve_shadow_continuous(system, orbit, scheme, tol=1e-10, bounds=cont_sin_bounds)
    jet1 = sk.solve_jet1(system, orbit, res, [1.0], tol=1e-10, scheme=scheme)
    # dx/dlam = w1 + dy/dlam should equal (sin t - cos t)/2
    dy = np.array([orbit.dy(float(t))[0, 0] for t in grid])
    dx_dlam = jet1.w1[:, 0] + dy
    target = 0.5 * (np.sin(grid) - np.cos(grid))
    err1 = float(np.max(np.abs(dx_dlam - target)))
    jet2 = sk.solve_jet2(system, orbit, res, jet1, [1.0], tol=1e-10, scheme=scheme)
    w2_sup = float(np.max(np.abs(jet2.w2)))
    ok = err1 <= 1e-6 and w2_sup <= 1e-8
    _report(2, ok, f"order-1 jet error {err1:.2e} <= 1e-6, order-2 sup {w2_sup:.2e} <= 1e-8")


def test_criterion_3_cont_rho_reproduction():
    t0 = time.monotonic()
    problem = sk.gallery("cont-rho", {"a": 3})
    system = problem.system
    scheme = sk.QuadratureScheme(t_tail=problem.t_tail, tail_source="user")
    bounds = sk.estimate_bounds_continuous(system, scheme)
    q_ok = bounds.q <= 2.0 / 3.0 + 0.01
    res = sk.solve_shadow_continuous(
        system, problem.orbit, scheme, tol=1e-11, ode_check_tol=1e-4, bounds=bounds
    )
    jet1 = sk.solve_jet1(system, problem.orbit, res, [1.0], tol=1e-11, scheme=scheme)
    err_h, err_h2, ratio = sk.richardson_ratio(
        system, problem.orbit_at, problem.lam, [1.0], problem.richardson_step,
        jet1.w1, order=1, tol=1e-11, scheme=scheme, bounds=bounds,
    )
    elapsed = time.monotonic() - t0
    ok = q_ok and 3.5 <= ratio <= 4.5 and elapsed <= 60.0
    _report(
        3,
        ok,
        f"q {bounds.q:.4f} <= 2/3+0.01, shadow converged in {res.iterations} iterations, "
        f"Richardson ratio {ratio:.3f} in [3.5, 4.5], runtime {elapsed:.1f}s <= 60s",
    )


def test_criterion_4_hyers_ulam_formulas():
    exact = sk.hyers_ulam_constants(0.25, 1.0, 1.0, 1.0) == (0.5, 2.0, 4.0)
    rejected = False
    try:
        sk.hyers_ulam_constants(0.5, 1.0, 1.0, 1.0)
    except sk.NotAContractionError:
        rejected = True
    ok = exact and rejected
    _report(4, ok, f"(0.25,1,1,1) -> (0.5, 2, 4): {exact}, q_tilde >= 1 rejected: {rejected}")


def test_criterion_5_disc_toy_contraction_suite():
    problem = sk.gallery("disc-toy")  # 257 indices
    system, orbit = problem.system, problem.orbit
    assert system.window.size >= 200
    bounds = sk.estimate_bounds_discrete(system, orbit)
    res = sk.solve_shadow_discrete(system, orbit, tol=1e-12, bounds=bounds)
    size = system.window.size
    seeds = [np.zeros((size, 1)), np.full((size, 1), bounds.radius),
             np.full((size, 1), -bounds.radius)]
    spread = sk.uniqueness_probe(system, orbit, seeds, tol=1e-13)
    checks = {
        "q = 0.5 +- 1e-12": abs(bounds.q - 0.5) <= 1e-12,
        "step ratios <= 0.55": res.measured_ratio <= 0.55,
        "residual <= 1e-12": res.residual <= 1e-12,
        "iterations <= 50": res.iterations <= 50,
        "sup z <= 0.4": res.sup_z <= 0.4,
        "interior equation residual <= 1e-9": res.equation_residual_interior <= 1e-9,
        "uniqueness spread <= 1e-10": spread <= 1e-10,
    }
    ok = all(checks.values())
    _report(5, ok, "; ".join(f"{k}: {v}" for k, v in checks.items()))


def test_criterion_6_structural_identities():
    rng = np.random.default_rng(2718)
    worst_comp = worst_jump = 0.0
    for trial in range(100):
        d = int(rng.integers(1, 5))
        w = sk.DiscreteWindow(0, 12, margin=0)
        mats = [random_invertible(rng, d) for _ in range(w.n_lo, w.n_hi)]
        lin = sk.LinearPartDiscrete(d, lambda n: mats[n - w.n_lo], w)
        if trial % 2:
            p = random_projection(rng, d)
            proj = sk.ProjectionFamily(d, lambda n: p)
        else:
            proj = sk.ProjectionFamily(d)
        for _ in range(3):
            m, k, n = (int(v) for v in rng.integers(w.n_lo, w.n_hi + 1, size=3))
            gap = np.max(np.abs(
                sk.cocycle(lin, m, k) @ sk.cocycle(lin, k, n) - sk.cocycle(lin, m, n)
            ))
            worst_comp = max(worst_comp, float(gap))
        eye = np.eye(d)
        for n in range(w.n_lo, w.n_hi):
            a_n = lin.step(n)
            for k in range(w.n_lo, w.n_hi + 1):
                rhs = a_n @ sk.green_discrete(lin, proj, n, k)
                if k == n + 1:
                    rhs = rhs + eye
                gap = np.max(np.abs(sk.green_discrete(lin, proj, n + 1, k) - rhs))
                worst_jump = max(worst_jump, float(gap))

    lin_c = sk.LinearPartContinuous(1, lambda t: -1.0)
    cert_c = sk.certify_dichotomy(
        lin_c, sk.ProjectionFamily(1), sk.ContinuousWindow(-10, 10, boundary=0.0), 0.5
    )
    w_d = sk.DiscreteWindow(-20, 20, margin=0)
    lin_d = sk.LinearPartDiscrete(2, lambda n: np.diag([0.5, 2.0]), w_d)
    cert_d = sk.certify_dichotomy(
        lin_d, sk.ProjectionFamily(2, lambda n: np.diag([1.0, 0.0])), w_d, 2
    )
    dich_ok = (
        abs(cert_c.D - 1.0) <= 0.02
        and abs(cert_c.rho - 1.0) <= 0.02
        and abs(cert_d.D - 1.0) <= 0.02
        and abs(cert_d.rho - math.log(2)) <= 0.02 * math.log(2)
    )
    ok = worst_comp <= 1e-10 and worst_jump <= 1e-10 and dich_ok
    _report(
        6,
        ok,
        f"composition worst {worst_comp:.2e} <= 1e-10, jump recurrence worst "
        f"{worst_jump:.2e} <= 1e-10, dichotomies (D={cert_c.D:.4f}, rho={cert_c.rho:.4f}) "
        f"and (D={cert_d.D:.4f}, rho={cert_d.rho:.4f}) within 2%",
    )


def _ball_element(rng, shape, radius, grid=None):
    if grid is None:
        z = rng.uniform(-1.0, 1.0, size=shape)
    else:
        coeffs = rng.uniform(-1.0, 1.0, size=3)
        vals = (
            coeffs[0] * np.sin(0.9 * grid)
            + coeffs[1] * np.cos(1.6 * grid)
            + coeffs[2] * np.sin(2.2 * grid + 0.3)
        )
        z = vals[:, None]
    return z * radius / max(np.max(np.abs(z)), 1e-12)


def test_criterion_7_operator_properties(cont_sin, cont_sin_bounds, cont_rho, cont_rho_bounds):
    rng = np.random.default_rng(99)
    worst = []

    def check(apply_fn, bounds, shape, grid, pairs, slack):
        for _ in range(pairs):
            z1 = _ball_element(rng, shape, bounds.radius, grid)
            z2 = _ball_element(rng, shape, bounds.radius, grid)
            t1, t2 = apply_fn(z1), apply_fn(z2)
            gap = np.max(np.abs(t1 - t2))
            lip_ok = gap <= (bounds.q + 1e-9) * np.max(np.abs(z1 - z2)) + slack
            growth_ok = np.max(np.abs(t1)) <= bounds.L + bounds.q * np.max(np.abs(z1)) + slack
            ball_ok = np.max(np.abs(t1)) <= bounds.radius + slack
            worst.append(lip_ok and growth_ok and ball_ok)

    for name in ("disc-toy", "disc-forced"):
        problem = sk.gallery(name)
        b = sk.estimate_bounds_discrete(problem.system, problem.orbit)
        check(
            lambda z, p=problem: sk.apply_T_discrete(p.system, p.orbit, z),
            b, (problem.system.window.size, 1), None, 6, 1e-12,
        )
    sin_problem, _, sin_scheme = cont_sin
    check(
        lambda z: sk.apply_T_continuous(sin_problem.system, sin_problem.orbit, z, sin_scheme),
        cont_sin_bounds, None, sin_problem.system.window.grid, 4, sin_scheme.quad_tol,
    )
    rho_problem, rho_scheme = cont_rho
    check(
        lambda z: sk.apply_T_continuous(rho_problem.system, rho_problem.orbit, z, rho_scheme),
        cont_rho_bounds, None, rho_problem.system.window.grid, 4, rho_scheme.quad_tol,
    )
    ok = all(worst) and len(worst) == 20
    _report(7, ok, f"{sum(worst)}/20 random ball pairs satisfy contraction, growth, invariance")


def test_criterion_8_jet_linearity_and_residuals(cont_rho, cont_rho_bounds):
    rng = np.random.default_rng(11)
    problem = sk.gallery("disc-toy")
    system, orbit = problem.system, problem.orbit
    bounds = sk.estimate_bounds_discrete(system, orbit)
    res = sk.solve_shadow_discrete(system, orbit, tol=1e-13, bounds=bounds)
    jet_a = sk.solve_jet1(system, orbit, res, [1.0], tol=1e-13)
    scale = -1.7
    jet_b = sk.solve_jet1(system, orbit, res, [scale], tol=1e-13)
    lin_err = float(np.max(np.abs(jet_b.w1 - scale * jet_a.w1)))
    dz_norm_disc = sk.measured_dz_norm(system, orbit, res.z, rng, trials=10)

    rho_problem, rho_scheme = cont_rho
    rho_res = sk.solve_shadow_continuous(
        rho_problem.system, rho_problem.orbit, rho_scheme, tol=1e-11,
        ode_check_tol=1e-4, bounds=cont_rho_bounds,
    )
    rho_jet = sk.solve_jet1(
        rho_problem.system, rho_problem.orbit, rho_res, [1.0], tol=1e-11, scheme=rho_scheme
    )
    dz_norm_cont = sk.measured_dz_norm(
        rho_problem.system, rho_problem.orbit, rho_res.z, rng, trials=5, scheme=rho_scheme
    )
    checks = {
        "linearity <= 1e-9": lin_err <= 1e-9,
        "discrete residual <= 1e-9": jet_a.residual_1 <= 1e-9,
        "continuous residual <= 1e-7": rho_jet.residual_1 <= 1e-7,
        "discrete |dT/dz| <= q + 1e-9": dz_norm_disc <= bounds.q + 1e-9,
        "continuous |dT/dz| <= q + 1e-9": dz_norm_cont <= cont_rho_bounds.q + 1e-9,
    }
    ok = all(checks.values())
    _report(8, ok, "; ".join(f"{k}: {v}" for k, v in checks.items()))
