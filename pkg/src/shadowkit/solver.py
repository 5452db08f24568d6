"""Contraction estimates and the discrete shadowing solver.

The correction operator sends a bounded sequence z to the kernel sum of the
forcing A_{k-1} y_{k-1} + f(k-1, y_{k-1} + z_{k-1}) - y_k.  Its contraction
factor is the kernel-weighted sum of the Lipschitz envelope; once that is
below one, Picard iteration from zero converges geometrically and the
a-posteriori bound q/(1-q) * |step| certifies the distance to the fixed
point.  All sums are truncated to the window, and the sup defining the
constants runs over interior indices only, where truncation does not bite.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatchError, NonConvergenceError, NotAContractionError
from .linalg import seq_norm
from .systems import DiscreteSystem, PseudoOrbitDiscrete

_RATIO_FLOOR = 1e-13


@dataclass(frozen=True)
class BoundEstimates:
    """Contraction factor q, forcing bound L, and the certified radius L/(1-q)."""

    q: float
    L: float
    radius: float
    sup_attained_at: float
    method: str  # "exact-window-sum" | "quadrature"
    tail_bound: float = None

    @staticmethod
    def build(q, L, attained_at, method, tail_bound=None):
        if q >= 1.0:
            raise NotAContractionError(
                f"contraction constant {q:.6g} >= 1 (attained at {attained_at})",
                q=q,
                attained_at=attained_at,
            )
        return BoundEstimates(
            q=float(q),
            L=float(L),
            radius=float(L / (1.0 - q)),
            sup_attained_at=attained_at,
            method=method,
            tail_bound=tail_bound,
        )


@dataclass
class ShadowResult:
    """Converged correction z, shadow orbit x = y + z, and its certificates."""

    locations: np.ndarray
    z: np.ndarray
    x: np.ndarray
    iterations: int
    step_history: list
    residual: float
    aposteriori_bound: float
    sup_z: float
    bounds: BoundEstimates
    equation_residual: float
    equation_residual_interior: float
    measured_ratio: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def radius(self):
        return self.bounds.radius


def hyers_ulam_constants(c, eps, D, rho):
    """Constants of the constant-envelope specialization under a dichotomy.

    Returns (q_tilde, L_tilde, bound) with q_tilde = 2 c D / rho and
    L_tilde = 2 eps D / rho; raises NotAContractionError when q_tilde >= 1.
    """
    if c < 0 or eps <= 0 or D <= 0 or rho <= 0:
        raise ValueError("need c >= 0, eps > 0, D > 0, rho > 0")
    q_t = 2.0 * c * D / rho
    if q_t >= 1.0:
        raise NotAContractionError(
            f"Hyers-Ulam contraction constant {q_t:.6g} >= 1", q=q_t
        )
    l_t = 2.0 * eps * D / rho
    return q_t, l_t, l_t / (1.0 - q_t)


def estimate_bounds_discrete(sys: DiscreteSystem, orbit=None) -> BoundEstimates:
    """Exact window sums of the envelope-weighted kernel, sup over interior rows.

    Raises NotAContractionError carrying the attaining row when q >= 1.
    """
    w = sys.window
    kern = sys.kernels()
    c_w = np.array([sys.f.lip(int(k - 1)) for k in range(w.n_lo + 1, w.n_hi + 1)])
    e_w = np.array([sys.eps.at(int(k - 1)) for k in range(w.n_lo + 1, w.n_hi + 1)])
    q_best, l_best, arg = -1.0, 0.0, w.interior_lo
    for m in range(w.interior_lo, w.interior_hi + 1):
        norms = kern.row_norms(m)[1:]  # kernel row over k = n_lo+1 .. n_hi
        q_m = float(norms @ c_w)
        if q_m > q_best:
            q_best, arg = q_m, m
        l_best = max(l_best, float(norms @ e_w))
    return BoundEstimates.build(q_best, l_best, arg, "exact-window-sum")


def _as_correction(sys, z):
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape != (sys.window.size, sys.dim):
        raise DomainMismatchError(
            f"correction shape {z.shape} does not match window ({sys.window.size}, {sys.dim})"
        )
    return z


def _forcing_discrete(sys, orbit, z):
    """Forcing entries aligned to the window; slot n_lo is unused and zero."""
    w = sys.window
    g = np.zeros((w.size, sys.dim))
    for k in range(w.n_lo + 1, w.n_hi + 1):
        km1 = k - 1
        y_prev = orbit.y(km1)
        g[w.offset(k)] = (
            sys.lin.step(km1) @ y_prev
            + sys.f.value(km1, z[w.offset(km1)] + y_prev, orbit.lam)
            - orbit.y(k)
        )
    return g


def apply_T_discrete(sys: DiscreteSystem, orbit: PseudoOrbitDiscrete, z):
    """One application of the correction operator, truncated to the window."""
    if orbit.window != sys.window:
        raise DomainMismatchError("orbit window differs from system window")
    z = _as_correction(sys, z)
    return sys.kernels().apply_rows(_forcing_discrete(sys, orbit, z))


def picard_iterate(apply_fn, z0, q, tol, max_iter, what="fixed point"):
    """Iterate z <- apply_fn(z) until the contraction a-posteriori bound meets tol.

    Stops when q/(1-q) * |step| <= tol, or on the absolute fallback
    |step| <= tol * (1-q) if measured ratios exceed the estimated q.
    Returns (z, step_history, measured_ratio).
    """
    z = z0
    steps = []
    gain = q / (1.0 - q)
    for _ in range(max_iter):
        z_new = apply_fn(z)
        step = seq_norm(z_new - z)
        steps.append(step)
        z = z_new
        if gain * step <= tol or step <= tol * (1.0 - q):
            ratio = _max_ratio(steps)
            return z, steps, ratio
    raise NonConvergenceError(
        f"{what}: no convergence in {max_iter} iterations (last step {steps[-1]:.3e})",
        step_history=steps,
    )


def _max_ratio(steps):
    ratio = 0.0
    for prev, cur in zip(steps, steps[1:]):
        if prev > _RATIO_FLOOR:
            ratio = max(ratio, cur / prev)
    return ratio


def _equation_residuals(sys, orbit, x):
    w = sys.window
    res = np.empty(w.size - 1)
    for n in range(w.n_lo, w.n_hi):
        j = w.offset(n)
        res[j] = np.max(
            np.abs(x[j + 1] - sys.lin.step(n) @ x[j] - sys.f.value(n, x[j], orbit.lam))
        )
    lo, hi = w.interior_offsets()
    interior = res[lo:hi] if hi > lo else res[lo:lo + 1]
    return float(res.max()), float(interior.max())


def solve_shadow_discrete(sys: DiscreteSystem, orbit: PseudoOrbitDiscrete,
                          tol=1e-12, max_iter=200, bounds=None,
                          eq_check_tol=1e-9) -> ShadowResult:
    """Picard iteration from zero; certifies the orbit equation on the interior.

    Requires the contraction estimate q < 1 (recomputed unless ``bounds`` is
    passed in).  Raises NonConvergenceError with the step history if max_iter
    is exhausted.
    """
    if bounds is None:
        bounds = estimate_bounds_discrete(sys, orbit)
    apply_fn = lambda z: apply_T_discrete(sys, orbit, z)
    z0 = np.zeros((sys.window.size, sys.dim))
    z, steps, ratio = picard_iterate(apply_fn, z0, bounds.q, tol, max_iter, "shadow solve")
    residual = seq_norm(apply_fn(z) - z)
    x = orbit.values + z
    eq_full, eq_interior = _equation_residuals(sys, orbit, x)
    return ShadowResult(
        locations=sys.window.indices,
        z=z,
        x=x,
        iterations=len(steps),
        step_history=steps,
        residual=residual,
        aposteriori_bound=bounds.q / (1.0 - bounds.q) * steps[-1],
        sup_z=seq_norm(z),
        bounds=bounds,
        equation_residual=eq_full,
        equation_residual_interior=eq_interior,
        measured_ratio=ratio,
        extras={
            "equation_check_tol": eq_check_tol,
            "equation_check_passed": bool(eq_interior <= eq_check_tol),
        },
    )


def uniqueness_probe(sys, orbit, seeds, tol=1e-12, max_iter=200, scheme=None):
    """Run Picard from several seeds in the certified ball; return the max
    pairwise distance of the limits.

    Seeds must lie inside the ball of radius L/(1-q).  Continuous systems
    need the quadrature ``scheme`` used by the bridge.
    """
    if isinstance(sys, DiscreteSystem):
        bounds = estimate_bounds_discrete(sys, orbit)
        apply_fn = lambda z: apply_T_discrete(sys, orbit, z)
        shape = (sys.window.size, sys.dim)
    else:
        from .bridge import compiled_bridge, estimate_bounds_continuous

        bridge = compiled_bridge(sys, scheme)
        bounds = estimate_bounds_continuous(sys, scheme)
        apply_fn = lambda z: bridge.apply_correction_operator(orbit, z)
        shape = (bridge.grid.size, sys.dim)
    limits = []
    for seed in seeds:
        seed = np.asarray(seed, dtype=float)
        if seed.ndim == 1:
            seed = seed[:, None]
        if seed.shape != shape:
            raise DomainMismatchError(f"seed shape {seed.shape}, expected {shape}")
        if seq_norm(seed) > bounds.radius * (1 + 1e-12) + 1e-15:
            raise ValueError(f"seed norm {seq_norm(seed):.3g} outside ball radius {bounds.radius:.3g}")
        z, _, _ = picard_iterate(apply_fn, seed, bounds.q, tol, max_iter, "uniqueness probe")
        limits.append(z)
    spread = 0.0
    for i in range(len(limits)):
        for j in range(i + 1, len(limits)):
            spread = max(spread, seq_norm(limits[i] - limits[j]))
    return spread
