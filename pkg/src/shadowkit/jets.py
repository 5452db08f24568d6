"""Directional parameter derivatives of the shadow correction.

Differentiating the fixed-point identity z = T(lam, z) once gives the affine
equation

    w1 = (dT/dz) w1 + (dT/dlam) mu,

and twice (for a fixed direction mu) gives the same equation for w2 with
right-hand side

    (d2T/dlam2)(mu, mu) + 2 (d2T/dlam dz)(mu, w1) + (d2T/dz2)(w1, w1).

Since |dT/dz| <= q < 1 at the fixed point, both are solved by the same
Picard iteration as the shadow itself; the inverse is never formed.  Every
jet carries the residual of its affine equation, and second-order solves run
a sampled consistency diagnostic of the curvature hypotheses, downgrading
the jet to "unverified-hypotheses" when it fails.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import JetUnavailableError
from .linalg import seq_norm
from .solver import picard_iterate, solve_shadow_discrete
from .systems import DiscreteSystem

_DIAG_TERM_COUNT = 5  # expansion terms of the second total lambda-derivative


@dataclass
class ParameterJet:
    """Directional derivatives of the correction with residual certificates."""

    direction: np.ndarray
    lam: np.ndarray
    w1: np.ndarray
    residual_1: float
    iterations_1: int
    w2: np.ndarray = None
    residual_2: float = None
    iterations_2: int = None
    hypothesis_flag: str = "sampled-verified"
    diagnostics: dict = field(default_factory=dict)


def _as_direction(mu, p):
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.shape != (p,):
        raise ValueError(f"direction has shape {mu.shape}, expected ({p},)")
    return mu


def _total_dlam_f(f, t, x, lam, dy_mu, mu):
    """d/dlam of f(t, y(lam) + z, lam) contracted with mu, z held fixed."""
    return f.dlam(t, x, lam) @ mu + f.dx(t, x, lam) @ dy_mu


def _total_d2lam_f(f, t, x, lam, dy_mu, d2y_mumu, mu):
    """Second total lambda-derivative of f(t, y(lam) + z, lam) in direction mu."""
    out = np.einsum("ipq,p,q->i", f.dlamlam(t, x, lam), mu, mu)
    out += 2.0 * np.einsum("ijq,j,q->i", f.dxlam(t, x, lam), dy_mu, mu)
    out += np.einsum("ijk,j,k->i", f.dxx(t, x, lam), dy_mu, dy_mu)
    out += f.dx(t, x, lam) @ d2y_mumu
    return out


# -- discrete kernel applications --------------------------------------------


class _DiscreteJetContext:
    """Kernel rows plus orbit/correction samples for one jet solve."""

    def __init__(self, sys, orbit, z):
        self.sys = sys
        self.orbit = orbit
        self.kern = sys.kernels()
        w = sys.window
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            z = z[:, None]
        self.z = z
        # Slot k holds data evaluated at k-1; slot n_lo stays zero.
        self.jac = np.zeros((w.size, sys.dim, sys.dim))
        for k in range(w.n_lo + 1, w.n_hi + 1):
            km1 = k - 1
            x = orbit.y(km1) + z[w.offset(km1)]
            self.jac[w.offset(k)] = sys.f.dx(km1, x, orbit.lam)

    def apply_dz(self, eta):
        w = self.sys.window
        vals = np.zeros_like(eta)
        vals[1:] = np.einsum("kij,kj->ki", self.jac[1:], eta[:-1])
        return self.kern.apply_rows(vals)

    def dlam_forcing(self, mu):
        sys, orbit, w = self.sys, self.orbit, self.sys.window
        vals = np.zeros((w.size, sys.dim))
        for k in range(w.n_lo + 1, w.n_hi + 1):
            km1 = k - 1
            x = orbit.y(km1) + self.z[w.offset(km1)]
            dy_mu = orbit.dy(km1) @ mu
            vals[w.offset(k)] = (
                sys.lin.step(km1) @ dy_mu
                + _total_dlam_f(sys.f, km1, x, orbit.lam, dy_mu, mu)
                - orbit.dy(k) @ mu
            )
        return self.kern.apply_rows(vals)

    def second_forcing(self, mu, w1):
        sys, orbit, w = self.sys, self.orbit, self.sys.window
        vals = np.zeros((w.size, sys.dim))
        for k in range(w.n_lo + 1, w.n_hi + 1):
            km1 = k - 1
            x = orbit.y(km1) + self.z[w.offset(km1)]
            dy_mu = orbit.dy(km1) @ mu
            d2y_mm = np.einsum("ipq,p,q->i", orbit.d2y(km1), mu, mu)
            v = w1[w.offset(km1)]
            term = (
                sys.lin.step(km1) @ d2y_mm
                + _total_d2lam_f(sys.f, km1, x, orbit.lam, dy_mu, d2y_mm, mu)
                - np.einsum("ipq,p,q->i", orbit.d2y(k), mu, mu)
            )
            term += 2.0 * (
                np.einsum("ijq,j,q->i", sys.f.dxlam(km1, x, orbit.lam), v, mu)
                + np.einsum("ijk,j,k->i", sys.f.dxx(km1, x, orbit.lam), v, dy_mu)
            )
            term += np.einsum("ijk,j,k->i", sys.f.dxx(km1, x, orbit.lam), v, v)
            vals[w.offset(k)] = term
        return self.kern.apply_rows(vals)

    def diagnostic_locations(self):
        w = self.sys.window
        return [(int(n), self.orbit.y(int(n)), self.z[w.offset(int(n))]) for n in w.indices]


# -- continuous kernel applications -------------------------------------------


class _ContinuousJetContext:
    def __init__(self, sys, orbit, z, scheme):
        from .bridge import compiled_bridge

        self.sys = sys
        self.orbit = orbit
        self.bridge = compiled_bridge(sys, scheme)
        self.z = self.bridge._as_grid(z)
        self.data = self.bridge.orbit_node_data(orbit)
        self.z_nodes = self.bridge.interpolate(self.z, self.bridge.nodes)
        self.x_nodes = self.data["y"] + self.z_nodes
        self.jac = np.stack(
            [
                sys.f.dx(float(s), self.x_nodes[j], orbit.lam)
                for j, s in enumerate(self.bridge.nodes)
            ]
        )

    def apply_dz(self, eta):
        eta_nodes = self.bridge.interpolate(eta, self.bridge.nodes)
        return self.bridge.apply_rows(np.einsum("nij,nj->ni", self.jac, eta_nodes))

    def dlam_forcing(self, mu):
        sys, orbit = self.sys, self.orbit
        nodes = self.bridge.nodes
        vals = np.empty((nodes.size, sys.dim))
        for j, s in enumerate(nodes):
            s = float(s)
            dy_mu = orbit.dy(s) @ mu
            vals[j] = (
                sys.lin.coeff(s) @ dy_mu
                + _total_dlam_f(sys.f, s, self.x_nodes[j], orbit.lam, dy_mu, mu)
                - orbit.dy_prime(s) @ mu
            )
        return self.bridge.apply_rows(vals)

    def second_forcing(self, mu, w1):
        sys, orbit = self.sys, self.orbit
        nodes = self.bridge.nodes
        w1_nodes = self.bridge.interpolate(w1, nodes)
        vals = np.empty((nodes.size, sys.dim))
        for j, s in enumerate(nodes):
            s = float(s)
            x = self.x_nodes[j]
            dy_mu = orbit.dy(s) @ mu
            d2y_mm = np.einsum("ipq,p,q->i", orbit.d2y(s), mu, mu)
            v = w1_nodes[j]
            term = (
                sys.lin.coeff(s) @ d2y_mm
                + _total_d2lam_f(sys.f, s, x, orbit.lam, dy_mu, d2y_mm, mu)
                - np.einsum("ipq,p,q->i", orbit.d2y_prime(s), mu, mu)
            )
            term += 2.0 * (
                np.einsum("ijq,j,q->i", sys.f.dxlam(s, x, orbit.lam), v, mu)
                + np.einsum("ijk,j,k->i", sys.f.dxx(s, x, orbit.lam), v, dy_mu)
            )
            term += np.einsum("ijk,j,k->i", sys.f.dxx(s, x, orbit.lam), v, v)
            vals[j] = term
        return self.bridge.apply_rows(vals)

    def diagnostic_locations(self):
        grid = self.bridge.grid
        return [
            (float(t), self.orbit.y(float(t)), self.z[i]) for i, t in enumerate(grid)
        ]


def _context(sys, orbit, z, scheme):
    if isinstance(sys, DiscreteSystem):
        return _DiscreteJetContext(sys, orbit, z)
    return _ContinuousJetContext(sys, orbit, z, scheme)


def _require_first_jet(orbit):
    if not orbit.has_first_jet:
        raise JetUnavailableError(
            "pseudo-orbit carries no parameter-derivative oracles; "
            "jets need a gallery system or API-supplied derivatives"
        )


# -- public operations ---------------------------------------------------------


def apply_dTdz(sys, orbit, z, eta, scheme=None):
    """Derivative of the correction operator in z, applied to a direction eta."""
    ctx = _context(sys, orbit, z, scheme)
    eta = np.asarray(eta, dtype=float)
    if eta.ndim == 1:
        eta = eta[:, None]
    return ctx.apply_dz(eta)


def apply_dTdlambda(sys, orbit, z, mu, scheme=None):
    """Derivative of the correction operator in the parameter, contracted with mu."""
    _require_first_jet(orbit)
    mu = _as_direction(mu, orbit.lam.size)
    return _context(sys, orbit, z, scheme).dlam_forcing(mu)


def solve_jet1(sys, orbit, shadow, mu, tol=1e-12, max_iter=200, scheme=None) -> ParameterJet:
    """First directional derivative of the correction via the affine equation."""
    _require_first_jet(orbit)
    mu = _as_direction(mu, orbit.lam.size)
    ctx = _context(sys, orbit, shadow.z, scheme)
    b = ctx.dlam_forcing(mu)
    q = shadow.bounds.q
    apply_fn = lambda w: ctx.apply_dz(w) + b
    w1, steps, _ = picard_iterate(apply_fn, np.zeros_like(b), q, tol, max_iter, "first jet")
    residual = seq_norm(w1 - ctx.apply_dz(w1) - b)
    return ParameterJet(
        direction=mu,
        lam=orbit.lam.copy(),
        w1=w1,
        residual_1=residual,
        iterations_1=len(steps),
    )


def solve_jet2(sys, orbit, shadow, jet1, mu, tol=1e-12, max_iter=200, scheme=None) -> ParameterJet:
    """Second directional derivative; requires second-order oracles all around."""
    _require_first_jet(orbit)
    if not orbit.has_second_jet:
        raise JetUnavailableError("pseudo-orbit has no second parameter derivatives")
    if not sys.f.has_second_order:
        raise JetUnavailableError("nonlinearity has no second-order oracles")
    mu = _as_direction(mu, orbit.lam.size)
    ctx = _context(sys, orbit, shadow.z, scheme)
    b2 = ctx.second_forcing(mu, jet1.w1)
    q = shadow.bounds.q
    apply_fn = lambda w: ctx.apply_dz(w) + b2
    w2, steps, _ = picard_iterate(apply_fn, np.zeros_like(b2), q, tol, max_iter, "second jet")
    residual = seq_norm(w2 - ctx.apply_dz(w2) - b2)
    flag, diag = _curvature_diagnostic(sys, orbit, ctx, mu, shadow)
    return ParameterJet(
        direction=mu,
        lam=orbit.lam.copy(),
        w1=jet1.w1,
        residual_1=jet1.residual_1,
        iterations_1=jet1.iterations_1,
        w2=w2,
        residual_2=residual,
        iterations_2=len(steps),
        hypothesis_flag=flag,
        diagnostics=diag,
    )


def _curvature_diagnostic(sys, orbit, ctx, mu, shadow):
    """Compare the shift of the second total derivative of f along the orbit
    against the declared envelope product C * eps * N * M^2 * |z|.

    A violation does not invalidate the computed jet; it downgrades the
    certificate because the declared constants failed a sampled inequality.
    """
    f = sys.f
    sup_z = shadow.sup_z
    m_const = 1.0 + 1e-9
    worst_gap, worst_at = 0.0, None
    locs = ctx.diagnostic_locations()
    for t, y_t, z_t in locs:
        dy_mu = orbit.dy(t) @ mu
        d2y_mm = np.einsum("ipq,p,q->i", orbit.d2y(t), mu, mu)
        m_const = max(m_const, float(np.max(np.abs(dy_mu))), float(np.max(np.abs(d2y_mm))))
    for t, y_t, z_t in locs:
        dy_mu = orbit.dy(t) @ mu
        d2y_mm = np.einsum("ipq,p,q->i", orbit.d2y(t), mu, mu)
        shifted = _total_d2lam_f(f, t, y_t + z_t, orbit.lam, dy_mu, d2y_mm, mu)
        base = _total_d2lam_f(f, t, y_t, orbit.lam, dy_mu, d2y_mm, mu)
        gap = float(np.max(np.abs(shifted - base)))
        allowed = f.bound_const * sys.eps.at(t) * _DIAG_TERM_COUNT * m_const**2 * sup_z
        excess = gap - allowed
        if excess > worst_gap:
            worst_gap, worst_at = excess, t
    ok = worst_gap <= 1e-12
    diag = {
        "curvature_excess": worst_gap,
        "curvature_worst_at": worst_at,
        "m_constant": m_const,
        "term_count": _DIAG_TERM_COUNT,
    }
    return ("sampled-verified" if ok else "unverified-hypotheses"), diag


def fd_jet_oracle(sys, orbit_at, lam, mu, h=None, order=1, tol=1e-12, max_iter=200,
                  scheme=None, bounds=None):
    """Central finite differences of the full shadow solve in direction mu.

    Independent of the affine-equation path: it only reruns the solver at
    shifted parameters.  Order 1 uses (z+ - z-) / 2h, order 2 the standard
    second central difference; the default steps are 1e-4 and 1e-3.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    mu = _as_direction(mu, lam.size)
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if h is None:
        h = 1e-4 if order == 1 else 1e-3

    def solve_at(l_val):
        orbit = orbit_at(l_val)
        if isinstance(sys, DiscreteSystem):
            return solve_shadow_discrete(sys, orbit, tol=tol, max_iter=max_iter, bounds=bounds)
        from .bridge import solve_shadow_continuous

        return solve_shadow_continuous(
            sys, orbit, scheme, tol=tol, max_iter=max_iter, bounds=bounds
        )

    plus = solve_at(lam + h * mu).z
    minus = solve_at(lam - h * mu).z
    if order == 1:
        return (plus - minus) / (2.0 * h)
    center = solve_at(lam).z
    return (plus - 2.0 * center + minus) / h**2


def richardson_ratio(sys, orbit_at, lam, mu, h, reference, order=1, tol=1e-12,
                     scheme=None, bounds=None):
    """Errors of the FD oracle at steps h and h/2 against a computed jet.

    Returns (err_h, err_h2, ratio); second-order central differences give
    ratios near 4.
    """
    fd_h = fd_jet_oracle(sys, orbit_at, lam, mu, h, order, tol=tol, scheme=scheme, bounds=bounds)
    fd_h2 = fd_jet_oracle(sys, orbit_at, lam, mu, h / 2, order, tol=tol, scheme=scheme, bounds=bounds)
    err_h = seq_norm(fd_h - reference)
    err_h2 = seq_norm(fd_h2 - reference)
    ratio = err_h / err_h2 if err_h2 > 0 else np.inf
    return err_h, err_h2, ratio


def measured_dz_norm(sys, orbit, z, rng, trials=10, scheme=None):
    """Measured operator norm of dT/dz at z over random directions."""
    ctx = _context(sys, orbit, z, scheme)
    size = ctx.z.shape[0] if isinstance(sys, DiscreteSystem) else ctx.bridge.grid.size
    worst = 0.0
    for _ in range(trials):
        eta = rng.uniform(-1.0, 1.0, size=(size, sys.dim))
        norm_eta = seq_norm(eta)
        worst = max(worst, seq_norm(ctx.apply_dz(eta)) / norm_eta)
    return worst
