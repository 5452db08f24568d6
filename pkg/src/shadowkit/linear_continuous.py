"""Evolution families for linear nonautonomous ODEs.

The solution operator of x' = A(t) x is integrated numerically with an
adaptive embedded Runge-Kutta 4(5) pair at tolerance ``tol_ode``.  Three
access patterns are cached:

* arbitrary pairs ``propagator(t, s)``, memoized per pair;
* whole columns ``column(s, ts)`` (one dense solve per direction), used by
  the dichotomy certifier;
* panel solves ``panel(a, b)`` giving the operator from every interior point
  of [a, b] to b, used by the quadrature bridge.  One adjoint solve per
  panel serves every Gauss node inside it.
"""

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError
from .linalg import as_matrix


class PanelSolve:
    """Dense solution of the adjoint equation on one panel [a, b].

    ``to_right(s)`` is the operator from time s in [a, b] to the right
    endpoint b; ``step`` is the full panel operator from a to b.
    """

    def __init__(self, sol, a, b, dim):
        self._sol = sol
        self.a = a
        self.b = b
        self.dim = dim
        self.step = self.to_right(a)

    def to_right(self, s):
        return self._sol(s).reshape(self.dim, self.dim)


class LinearPartContinuous:
    """Continuous coefficient t -> A(t) with an attached evolution cache."""

    def __init__(self, dim, coeff, tol_ode=1e-10):
        self.dim = int(dim)
        self._coeff = coeff
        self.tol_ode = float(tol_ode)
        self._pair_cache = {}
        self._panel_cache = {}

    def coeff(self, t):
        a = as_matrix(self._coeff(t), self.dim, what=f"A({t})")
        if not np.all(np.isfinite(a)):
            raise IntegrationError(f"A({t}) has non-finite entries", t_span=(t, t))
        return a

    # -- raw integrations ---------------------------------------------------

    def _forward_rhs(self, t, flat):
        return (self.coeff(t) @ flat.reshape(self.dim, self.dim)).ravel()

    def _adjoint_rhs(self, s, flat):
        return (-flat.reshape(self.dim, self.dim) @ self.coeff(s)).ravel()

    def _solve(self, rhs, t0, t1, dense=False):
        if t0 == t1:
            raise ValueError("degenerate span")
        res = solve_ivp(
            rhs,
            (t0, t1),
            np.eye(self.dim).ravel(),
            method="RK45",
            rtol=self.tol_ode,
            atol=self.tol_ode,
            dense_output=dense,
        )
        if not res.success:
            raise IntegrationError(
                f"integration failed on [{t0}, {t1}]: {res.message}", t_span=(t0, t1)
            )
        return res

    # -- cached access ------------------------------------------------------

    def propagator(self, t, s):
        """Solution operator from time s to time t; identity when t == s."""
        t = float(t)
        s = float(s)
        if t == s:
            return np.eye(self.dim)
        key = (t, s)
        hit = self._pair_cache.get(key)
        if hit is None:
            res = self._solve(self._forward_rhs, s, t)
            hit = res.y[:, -1].reshape(self.dim, self.dim)
            self._pair_cache[key] = hit
        return hit

    def column(self, s, ts):
        """Operators from fixed s to every time in ``ts`` via two dense solves."""
        ts = np.asarray(ts, dtype=float)
        out = np.empty((ts.size, self.dim, self.dim))
        up = ts > s
        down = ts < s
        out[~up & ~down] = np.eye(self.dim)
        if np.any(up):
            sol = self._solve(self._forward_rhs, s, float(ts[up].max()), dense=True).sol
            for i in np.nonzero(up)[0]:
                out[i] = sol(ts[i]).reshape(self.dim, self.dim)
        if np.any(down):
            sol = self._solve(self._forward_rhs, s, float(ts[down].min()), dense=True).sol
            for i in np.nonzero(down)[0]:
                out[i] = sol(ts[i]).reshape(self.dim, self.dim)
        return out

    def panel(self, a, b):
        """Memoized PanelSolve on [a, b]; keys are rounded to tame float noise."""
        key = (round(float(a), 12), round(float(b), 12))
        hit = self._panel_cache.get(key)
        if hit is None:
            res = self._solve(self._adjoint_rhs, float(b), float(a), dense=True)
            hit = PanelSolve(res.sol, float(a), float(b), self.dim)
            self._panel_cache[key] = hit
        return hit


def evolution(lin: LinearPartContinuous, t, s):
    """Solution operator of x' = A(t) x from time s to time t."""
    return lin.propagator(t, s)


def green_continuous(lin: LinearPartContinuous, proj, t, s):
    """Green kernel: forward branch through P for t >= s, backward through Id - P."""
    p = proj.at(float(s))
    if t >= s:
        return lin.propagator(t, s) @ p
    return -lin.propagator(t, s) @ (np.eye(lin.dim) - p)
