"""Sampled verification of the standing hypotheses.

Lipschitz bounds, envelope domination of second partials, and consistency
of user-supplied derivative oracles are global statements the artifact can
only spot-check.  Everything here samples, records the worst case, and
reports "sampled-verified" rather than "proved"; certificates carry these
labels verbatim.
"""

import numpy as np

from .linalg import vec_norm
from .systems import ContinuousSystem, DiscreteSystem

_PARTIAL_REL_TOL = 1e-5
_ORBIT_REL_TOL = 1e-4
_FD_EXACT_FLOOR = 1e-11


def _sample_lam(param_box, rng):
    return np.array([rng.uniform(lo, hi) for lo, hi in param_box])


def _locations(system, rng, count):
    if isinstance(system, DiscreteSystem):
        w = system.window
        return rng.integers(w.n_lo, w.n_hi, size=count)
    w = system.window
    return rng.uniform(w.t_lo, w.t_hi, size=count)


def check_lipschitz(system, rng, samples=200, state_scale=2.0):
    """Sample |f(t,x)-f(t,y)| <= c(t) |x-y| at random points and parameters.

    Returns the worst ratio against the envelope (<= 1 means verified).
    """
    f = system.f
    worst = 0.0
    for t in _locations(system, rng, samples):
        t = float(t) if isinstance(system, ContinuousSystem) else int(t)
        lam = _sample_lam(system.param_box, rng)
        x = rng.normal(0.0, state_scale, size=f.dim)
        y = rng.normal(0.0, state_scale, size=f.dim)
        gap = vec_norm(f.value(t, x, lam) - f.value(t, y, lam))
        allowed = f.lip(t) * vec_norm(x - y)
        if gap > allowed * (1 + 1e-12) + 1e-300:
            ratio = gap / allowed if allowed > 0 else np.inf
            worst = max(worst, ratio)
        elif allowed > 0:
            worst = max(worst, gap / allowed)
    return worst


def _fd_vector(func, center, h, axis):
    e = np.zeros_like(center)
    e[axis] = h
    return (func(center + e) - func(center - e)) / (2 * h)


def check_partials(system, rng, samples=50, h=1e-5):
    """Central-difference spot check of every supplied partial of f.

    Returns the max relative error over all samples and oracles.  Exact
    (e.g. linear) dependencies produce zero error, which trivially passes.
    """
    f = system.f
    worst = 0.0
    for t in _locations(system, rng, samples):
        t = float(t) if isinstance(system, ContinuousSystem) else int(t)
        lam = _sample_lam(system.param_box, rng)
        x = rng.normal(0.0, 1.0, size=f.dim)
        scale = 1.0 + vec_norm(f.value(t, x, lam))

        for j in range(f.dim):
            fd = _fd_vector(lambda xx: f.value(t, xx, lam), x, h, j)
            worst = max(worst, vec_norm(fd - f.dx(t, x, lam)[:, j]) / scale)
        for q in range(f.param_dim):
            fd = _fd_vector(lambda ll: f.value(t, x, ll), lam, h, q)
            worst = max(worst, vec_norm(fd - f.dlam(t, x, lam)[:, q]) / scale)
        if f.has_second_order:
            for j in range(f.dim):
                fd = _fd_vector(lambda xx: f.dx(t, xx, lam), x, h, j)
                worst = max(worst, vec_norm(fd - f.dxx(t, x, lam)[:, :, j]) / scale)
            for q in range(f.param_dim):
                fd = _fd_vector(lambda ll: f.dx(t, x, ll), lam, h, q)
                worst = max(worst, vec_norm(fd - f.dxlam(t, x, lam)[:, :, q]) / scale)
                fd = _fd_vector(lambda ll: f.dlam(t, x, ll), lam, h, q)
                worst = max(worst, vec_norm(fd - f.dlamlam(t, x, lam)[:, :, q]) / scale)
    return worst


def fd_convergence_ratio(errors_h, errors_h2):
    """Richardson ratio e(h)/e(h/2); None when both are at the exactness floor."""
    if errors_h < _FD_EXACT_FLOOR and errors_h2 < _FD_EXACT_FLOOR:
        return None
    return errors_h / errors_h2 if errors_h2 > 0 else np.inf


def check_second_order_envelope(system, rng, samples=100):
    """Sampled max of |second partials of f| / eps(t) against the declared constant.

    Returns (sampled_max_ratio, declared_C).
    """
    f = system.f
    if not f.has_second_order:
        return 0.0, f.bound_const
    worst = 0.0
    for t in _locations(system, rng, samples):
        t = float(t) if isinstance(system, ContinuousSystem) else int(t)
        lam = _sample_lam(system.param_box, rng)
        x = rng.normal(0.0, 2.0, size=f.dim)
        env = system.eps.at(t)
        for block in (f.dxx(t, x, lam), f.dxlam(t, x, lam), f.dlamlam(t, x, lam)):
            worst = max(worst, float(np.max(np.abs(block))) / env)
    return worst, f.bound_const


def check_orbit_family_discrete(system, orbit_at, lam, rng, samples=30, h=1e-6):
    """FD check of a discrete orbit family's parameter-derivative oracles.

    Compares dy/dlam (and d2y/dlam2 when present) of the orbit at ``lam``
    against central differences of orbits at shifted parameters.  Returns the
    max relative error.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    base = orbit_at(lam)
    if not base.has_first_jet:
        return None
    w = system.window
    ns = rng.integers(w.n_lo, w.n_hi + 1, size=samples)
    worst = 0.0
    for q in range(lam.size):
        e = np.zeros_like(lam)
        e[q] = h
        plus, minus = orbit_at(lam + e), orbit_at(lam - e)
        for n in ns:
            n = int(n)
            scale = 1.0 + vec_norm(base.y(n))
            fd1 = (plus.y(n) - minus.y(n)) / (2 * h)
            worst = max(worst, vec_norm(fd1 - base.dy(n)[:, q]) / scale)
            if base.has_second_jet:
                fd2 = (plus.y(n) - 2 * base.y(n) + minus.y(n)) / h**2
                worst = max(worst, vec_norm(fd2 - base.d2y(n)[:, q, q]) / scale)
    return worst


def check_orbit_family_continuous(system, orbit_at, lam, rng, samples=30, h=1e-6):
    """Continuous counterpart of the discrete family check, sampling times."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    base = orbit_at(lam)
    if not base.has_first_jet:
        return None
    w = system.window
    ts = rng.uniform(w.t_lo, w.t_hi, size=samples)
    worst = 0.0
    for q in range(lam.size):
        e = np.zeros_like(lam)
        e[q] = h
        plus, minus = orbit_at(lam + e), orbit_at(lam - e)
        for t in ts:
            t = float(t)
            scale = 1.0 + vec_norm(base.y(t))
            fd1 = (plus.y(t) - minus.y(t)) / (2 * h)
            worst = max(worst, vec_norm(fd1 - base.dy(t)[:, q]) / scale)
            fd1p = (plus.y_prime(t) - minus.y_prime(t)) / (2 * h)
            worst = max(worst, vec_norm(fd1p - base.dy_prime(t)[:, q]) / scale)
    return worst


def check_y_prime_consistency(orbit, window, rng, samples=30, h=1e-5):
    """Central differences of y against the supplied derivative y'.

    The defect definition uses y' directly, so a mismatched derivative oracle
    silently corrupts every certificate; this catches gross inconsistencies.
    Returns the max relative error.
    """
    ts = rng.uniform(window.t_lo + h, window.t_hi - h, size=samples)
    worst = 0.0
    for t in ts:
        t = float(t)
        fd = (orbit.y(t + h) - orbit.y(t - h)) / (2 * h)
        scale = 1.0 + vec_norm(orbit.y_prime(t))
        worst = max(worst, vec_norm(fd - orbit.y_prime(t)) / scale)
    return worst


def check_pseudo_derivative_residual(system, orbit, rng, samples=50):
    """Sampled residual of the differentiated defect inequality.

    For a discrete orbit with first-jet oracles this is
    |dy_{n+1} - A_n dy_n - (df/dlam + df/dx dy_n)| / eps_n; the sampled max
    is compared against the declared constant.
    """
    if not isinstance(system, DiscreteSystem) or not orbit.has_first_jet:
        return None
    w = system.window
    ns = rng.integers(w.n_lo, w.n_hi, size=samples)
    worst = 0.0
    for n in ns:
        n = int(n)
        y_n = orbit.y(n)
        total = system.f.dlam(n, y_n, orbit.lam) + system.f.dx(n, y_n, orbit.lam) @ orbit.dy(n)
        res = orbit.dy(n + 1) - system.lin.step(n) @ orbit.dy(n) - total
        worst = max(worst, float(np.max(np.abs(res))) / system.eps.at(n))
    return worst


def hypothesis_report(system, orbit=None, rng=None, orbit_at=None, lam=None):
    """Aggregate sampled hypothesis checks into certificate labels."""
    rng = rng if rng is not None else np.random.default_rng(0)
    lip_worst = check_lipschitz(system, rng)
    partial_worst = check_partials(system, rng)
    env_worst, declared = check_second_order_envelope(system, rng)
    report = {
        "lipschitz": {
            "status": "sampled-verified" if lip_worst <= 1 + 1e-9 else "violated",
            "worst_ratio": lip_worst,
        },
        "derivative_oracles": {
            "status": "sampled-verified" if partial_worst <= _PARTIAL_REL_TOL else "violated",
            "worst_rel_error": partial_worst,
        },
        "second_order_envelope": {
            "status": "sampled-verified" if env_worst <= declared * (1 + 1e-9) else "violated",
            "sampled_max_ratio": env_worst,
            "declared_constant": declared,
        },
    }
    if orbit is not None and isinstance(system, DiscreteSystem):
        res = check_pseudo_derivative_residual(system, orbit, rng)
        if res is not None:
            report["pseudo_orbit_derivatives"] = {
                "status": "sampled-verified" if res <= declared * (1 + 1e-9) else "violated",
                "worst_ratio": res,
            }
    if orbit is not None and isinstance(system, ContinuousSystem):
        worst = check_y_prime_consistency(orbit, system.window, rng)
        report["y_prime_consistency"] = {
            "status": "sampled-verified" if worst <= 1e-5 else "violated",
            "worst_rel_error": worst,
        }
    if orbit_at is not None and lam is not None:
        if isinstance(system, DiscreteSystem):
            worst = check_orbit_family_discrete(system, orbit_at, lam, rng)
        else:
            worst = check_orbit_family_continuous(system, orbit_at, lam, rng)
        if worst is not None:
            report["orbit_family_oracles"] = {
                "status": "sampled-verified" if worst <= _ORBIT_REL_TOL else "violated",
                "worst_rel_error": worst,
            }
    return report
