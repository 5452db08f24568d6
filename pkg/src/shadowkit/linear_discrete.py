"""Linear nonautonomous machinery for difference equations.

A family of invertible one-step matrices A_n generates the two-sided
transition products

    transition(m, n) = A_{m-1} ... A_n          for m > n,
                       Id                       for m = n,
                       A_m^{-1} ... A_{n-1}^{-1} for m < n,

and, together with a projection family P_n, the piecewise kernel

    kernel(m, n) = transition(m, n) P_n             for m >= n,
                   -transition(m, n) (Id - P_n)     for m < n.

The kernel satisfies the one-step recurrence with a unit jump on the
diagonal, which is what turns kernel sums into solutions of the
inhomogeneous difference equation.
"""

import numpy as np

from .errors import SingularLinearPartError, WindowBoundsError
from .linalg import as_matrix, op_norm, op_norms
from .windows import DiscreteWindow

_INVERT_TOL = 1e-10
_IDEMPOTENT_TOL = 1e-10

# Dense pair cache is used when the full kernel tensor fits comfortably in
# memory; beyond this the kernel is streamed row by row.
_DENSE_CACHE_LIMIT = 40_000_000


class LinearPartDiscrete:
    """One-step coefficients A_n of x_{n+1} = A_n x_n over a window.

    ``coeff`` maps an index n in [n_lo, n_hi - 1] to a d x d matrix (a bare
    float is fine for d = 1).  All matrices and their inverses are cached at
    construction and each inverse is checked against A_n A_n^{-1} = Id.
    """

    def __init__(self, dim, coeff, window: DiscreteWindow):
        self.dim = int(dim)
        self.window = window
        n_steps = window.n_hi - window.n_lo
        self._a = np.empty((n_steps, dim, dim))
        self._a_inv = np.empty((n_steps, dim, dim))
        eye = np.eye(dim)
        for j, n in enumerate(range(window.n_lo, window.n_hi)):
            a = as_matrix(coeff(n), dim, what=f"A_{n}")
            if not np.all(np.isfinite(a)):
                raise SingularLinearPartError(f"A_{n} has non-finite entries")
            try:
                a_inv = np.linalg.inv(a)
            except np.linalg.LinAlgError as exc:
                raise SingularLinearPartError(f"A_{n} is singular") from exc
            defect = op_norm(a @ a_inv - eye)
            if defect > _INVERT_TOL:
                raise SingularLinearPartError(
                    f"A_{n} inverse check failed: |A A^-1 - Id| = {defect:.3e}"
                )
            self._a[j] = a
            self._a_inv[j] = a_inv
        self._pair_cache = {}

    def step(self, n):
        """A_n, defined for n in [n_lo, n_hi - 1]."""
        if not self.window.n_lo <= n < self.window.n_hi:
            raise WindowBoundsError(f"step index {n} outside [{self.window.n_lo}, {self.window.n_hi - 1}]")
        return self._a[n - self.window.n_lo]

    def step_inv(self, n):
        if not self.window.n_lo <= n < self.window.n_hi:
            raise WindowBoundsError(f"step index {n} outside [{self.window.n_lo}, {self.window.n_hi - 1}]")
        return self._a_inv[n - self.window.n_lo]


def cocycle(lin: LinearPartDiscrete, m, n):
    """Transition matrix of the linear difference equation from level n to m.

    Values are memoized per (m, n) pair; concurrent fills agree because the
    product is deterministic.
    """
    w = lin.window
    if not (w.contains(m) and w.contains(n)):
        raise WindowBoundsError(f"pair ({m}, {n}) outside window [{w.n_lo}, {w.n_hi}]")
    key = (int(m), int(n))
    hit = lin._pair_cache.get(key)
    if hit is not None:
        return hit
    out = np.eye(lin.dim)
    if m > n:
        for j in range(n, m):
            out = lin.step(j) @ out
    elif m < n:
        for j in range(n - 1, m - 1, -1):
            out = lin.step_inv(j) @ out
    lin._pair_cache[key] = out
    return out


class ProjectionFamily:
    """Projections P at each index or time; defaults to the identity.

    Idempotence is checked (and the value cached) the first time a key is
    evaluated.
    """

    def __init__(self, dim, proj=None):
        self.dim = int(dim)
        self._proj = proj
        self._cache = {}
        self._eye = np.eye(self.dim)

    @property
    def is_identity(self):
        return self._proj is None

    def at(self, key):
        if self._proj is None:
            return self._eye
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        p = as_matrix(self._proj(key), self.dim, what=f"P({key})")
        defect = op_norm(p @ p - p)
        if defect > _IDEMPOTENT_TOL:
            raise ValueError(f"P({key}) is not idempotent: |P^2 - P| = {defect:.3e}")
        self._cache[key] = p
        return p


def green_discrete(lin: LinearPartDiscrete, proj: ProjectionFamily, m, n):
    """Green kernel of the linear part: forward branch for m >= n, backward for m < n."""
    a = cocycle(lin, m, n)
    p = proj.at(int(n))
    if m >= n:
        return a @ p
    return -a @ (np.eye(lin.dim) - p)


def green_row(lin: LinearPartDiscrete, proj: ProjectionFamily, m):
    """All kernel values kernel(m, k) for k in the window, as one (size, d, d) array.

    Built by one-step recurrences in k, so one row costs O(size) small matrix
    products instead of O(size^2).
    """
    w = lin.window
    if not w.contains(m):
        raise WindowBoundsError(f"row index {m} outside window")
    d = lin.dim
    row = np.empty((w.size, d, d))
    eye = np.eye(d)
    # k <= m branch: transition(m, k) accumulated downward.
    trans = eye
    row[w.offset(m)] = proj.at(int(m))
    for k in range(m - 1, w.n_lo - 1, -1):
        trans = trans @ lin.step(k)
        row[w.offset(k)] = trans @ proj.at(int(k))
    # k > m branch: transition(m, k) accumulated upward.
    trans = eye
    for k in range(m + 1, w.n_hi + 1):
        trans = trans @ lin.step_inv(k - 1)
        row[w.offset(k)] = -trans @ (eye - proj.at(int(k)))
    return row


class DiscreteKernelCache:
    """Kernel rows for one (linear part, projections) pair over the window.

    Small windows keep the whole (size, size, d, d) tensor; large ones fall
    back to per-row evaluation.
    """

    def __init__(self, lin: LinearPartDiscrete, proj: ProjectionFamily):
        self.lin = lin
        self.proj = proj
        self.window = lin.window
        size = self.window.size
        self._dense = None
        if size * size * lin.dim * lin.dim <= _DENSE_CACHE_LIMIT:
            tensor = np.empty((size, size, lin.dim, lin.dim))
            for m in range(self.window.n_lo, self.window.n_hi + 1):
                tensor[self.window.offset(m)] = green_row(lin, proj, m)
            self._dense = tensor
            self._norms = op_norms(tensor)
        else:
            self._norms = None

    def row(self, m):
        if self._dense is not None:
            return self._dense[self.window.offset(m)]
        return green_row(self.lin, self.proj, m)

    def row_norms(self, m):
        if self._norms is not None:
            return self._norms[self.window.offset(m)]
        return op_norms(self.row(m))

    def apply_rows(self, values):
        """Contract kernel rows against per-index vectors.

        ``values`` has shape (size, d) indexed like the window; entry m of the
        result is sum_k kernel(m, k) values[k].  The diagonal-jump recurrence
        of the kernel makes this the solution operator used everywhere else.
        """
        values = np.asarray(values, dtype=float)
        if values.shape != (self.window.size, self.lin.dim):
            raise WindowBoundsError(
                f"values shape {values.shape} does not match window/state dims"
            )
        if self._dense is not None:
            return np.einsum("mkij,kj->mi", self._dense, values)
        out = np.empty_like(values)
        for m in range(self.window.n_lo, self.window.n_hi + 1):
            out[self.window.offset(m)] = np.einsum("kij,kj->i", self.row(m), values)
        return out
