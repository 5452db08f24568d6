"""Problem descriptions: nonlinearities, envelopes, pseudo-orbits, defects.

A system bundles the linear part, projections, a parameterized nonlinearity
with its Lipschitz envelope, and the defect envelope over one computation
window.  Pseudo-orbits carry the approximate solution and, when available,
its parameter derivatives; those oracles are what make parameter jets
computable.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatchError, JetUnavailableError
from .linalg import vec_norm
from .linear_continuous import LinearPartContinuous
from .linear_discrete import DiscreteKernelCache, LinearPartDiscrete, ProjectionFamily
from .windows import ContinuousWindow, DiscreteWindow


def _shaped(arr, shape, what):
    out = np.asarray(arr, dtype=float)
    if out.shape == shape:
        return out
    if out.size == int(np.prod(shape)):
        return out.reshape(shape)
    raise ValueError(f"{what} has shape {out.shape}, expected {shape}")


class Nonlinearity:
    """Parameterized nonlinearity f(t, x, lam) with derivative oracles.

    ``value`` and the partials are callables of (t, x, lam); missing second
    order oracles disable second-order jets.  ``lip_envelope`` is the
    pointwise Lipschitz bound in x (uniform over the parameter set) and
    ``bound_const`` the declared constant bounding second and higher partials
    against the defect envelope.
    """

    def __init__(self, dim, param_dim, value, dx, dlam,
                 dxx=None, dxlam=None, dlamlam=None,
                 lip_envelope=None, bound_const=1.0):
        self.dim = int(dim)
        self.param_dim = int(param_dim)
        self._value = value
        self._dx = dx
        self._dlam = dlam
        self._dxx = dxx
        self._dxlam = dxlam
        self._dlamlam = dlamlam
        self.lip_envelope = lip_envelope if lip_envelope is not None else (lambda t: 0.0)
        self.bound_const = float(bound_const)

    @property
    def has_second_order(self):
        return all(o is not None for o in (self._dxx, self._dxlam, self._dlamlam))

    def value(self, t, x, lam):
        return _shaped(self._value(t, x, lam), (self.dim,), "f")

    def dx(self, t, x, lam):
        return _shaped(self._dx(t, x, lam), (self.dim, self.dim), "df/dx")

    def dlam(self, t, x, lam):
        return _shaped(self._dlam(t, x, lam), (self.dim, self.param_dim), "df/dlam")

    def dxx(self, t, x, lam):
        if self._dxx is None:
            raise JetUnavailableError("nonlinearity has no d2f/dx2 oracle")
        return _shaped(self._dxx(t, x, lam), (self.dim,) * 3, "d2f/dx2")

    def dxlam(self, t, x, lam):
        if self._dxlam is None:
            raise JetUnavailableError("nonlinearity has no d2f/dxdlam oracle")
        return _shaped(
            self._dxlam(t, x, lam), (self.dim, self.dim, self.param_dim), "d2f/dxdlam"
        )

    def dlamlam(self, t, x, lam):
        if self._dlamlam is None:
            raise JetUnavailableError("nonlinearity has no d2f/dlam2 oracle")
        return _shaped(
            self._dlamlam(t, x, lam), (self.dim, self.param_dim, self.param_dim), "d2f/dlam2"
        )

    def lip(self, t):
        return float(self.lip_envelope(t))


class DefectEnvelope:
    """Pointwise defect bound, strictly positive on the window."""

    def __init__(self, values):
        self._values = values

    def at(self, t):
        v = float(self._values(t))
        if v <= 0:
            raise ValueError(f"defect envelope must be > 0, got {v} at {t}")
        return v


class PseudoOrbitDiscrete:
    """Approximate solution over a discrete window, with optional parameter jets.

    ``values`` has shape (window.size, d).  Derivative arrays, when given,
    have shapes (size, d, p) and (size, d, p, p).
    """

    def __init__(self, window: DiscreteWindow, lam, values, dvalues=None, d2values=None):
        self.window = window
        self.lam = np.atleast_1d(np.asarray(lam, dtype=float))
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.shape[0] != window.size:
            raise DomainMismatchError(
                f"orbit has {self.values.shape[0]} entries, window needs {window.size}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("orbit contains non-finite entries")
        self.dim = self.values.shape[1]
        self.dvalues = None if dvalues is None else np.asarray(dvalues, dtype=float)
        self.d2values = None if d2values is None else np.asarray(d2values, dtype=float)

    @classmethod
    def from_callable(cls, window, lam, y, dy=None, d2y=None):
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        p = lam_arr.size
        ns = window.indices
        vals = np.stack([np.atleast_1d(np.asarray(y(int(n)), dtype=float)) for n in ns])
        d = vals.shape[1]
        dvals = None
        if dy is not None:
            dvals = np.stack([_shaped(dy(int(n)), (d, p), "dy/dlam") for n in ns])
        d2vals = None
        if d2y is not None:
            d2vals = np.stack([_shaped(d2y(int(n)), (d, p, p), "d2y/dlam2") for n in ns])
        return cls(window, lam_arr, vals, dvals, d2vals)

    @property
    def has_first_jet(self):
        return self.dvalues is not None

    @property
    def has_second_jet(self):
        return self.dvalues is not None and self.d2values is not None

    def y(self, n):
        return self.values[self.window.offset(n)]

    def dy(self, n):
        if self.dvalues is None:
            raise JetUnavailableError("orbit has no dy/dlam oracle")
        return self.dvalues[self.window.offset(n)]

    def d2y(self, n):
        if self.d2values is None:
            raise JetUnavailableError("orbit has no d2y/dlam2 oracle")
        return self.d2values[self.window.offset(n)]


class PseudoSolutionContinuous:
    """Approximate solution y with explicit derivative y' and parameter oracles.

    y' is required as data rather than finite-differenced: the defect is
    defined through y' directly and differencing noise would contaminate
    envelope compliance.
    """

    def __init__(self, lam, y, y_prime, dy=None, dy_prime=None, d2y=None, d2y_prime=None):
        self.lam = np.atleast_1d(np.asarray(lam, dtype=float))
        self._y = y
        self._y_prime = y_prime
        self._dy = dy
        self._dy_prime = dy_prime
        self._d2y = d2y
        self._d2y_prime = d2y_prime

    @property
    def has_first_jet(self):
        return self._dy is not None and self._dy_prime is not None

    @property
    def has_second_jet(self):
        return self.has_first_jet and self._d2y is not None and self._d2y_prime is not None

    def y(self, t):
        return np.atleast_1d(np.asarray(self._y(t), dtype=float))

    def y_prime(self, t):
        return np.atleast_1d(np.asarray(self._y_prime(t), dtype=float))

    def _need(self, oracle, name):
        if oracle is None:
            raise JetUnavailableError(f"pseudo-solution has no {name} oracle")
        return oracle

    def dy(self, t):
        d = self.y(t).size
        return _shaped(self._need(self._dy, "dy/dlam")(t), (d, self.lam.size), "dy/dlam")

    def dy_prime(self, t):
        d = self.y(t).size
        return _shaped(
            self._need(self._dy_prime, "dy'/dlam")(t), (d, self.lam.size), "dy'/dlam"
        )

    def d2y(self, t):
        d = self.y(t).size
        p = self.lam.size
        return _shaped(self._need(self._d2y, "d2y/dlam2")(t), (d, p, p), "d2y/dlam2")

    def d2y_prime(self, t):
        d = self.y(t).size
        p = self.lam.size
        return _shaped(
            self._need(self._d2y_prime, "d2y'/dlam2")(t), (d, p, p), "d2y'/dlam2"
        )


@dataclass
class DiscreteSystem:
    """Semilinear difference equation x_{n+1} = A_n x_n + f(n, x_n, lam)."""

    window: DiscreteWindow
    lin: LinearPartDiscrete
    proj: ProjectionFamily
    f: Nonlinearity
    eps: DefectEnvelope
    param_box: tuple = ((-1.0, 1.0),)
    label: str = ""
    _kernels: DiscreteKernelCache = field(default=None, repr=False, compare=False)

    @property
    def dim(self):
        return self.lin.dim

    def kernels(self):
        if self._kernels is None:
            self._kernels = DiscreteKernelCache(self.lin, self.proj)
        return self._kernels


@dataclass
class ContinuousSystem:
    """Semilinear ODE x' = A(t) x + f(t, x, lam).

    ``breakpoints`` lists times where the data has kinks; quadrature panels
    are split there.  ``bridges`` caches compiled quadrature bridges per
    scheme.
    """

    window: ContinuousWindow
    lin: LinearPartContinuous
    proj: ProjectionFamily
    f: Nonlinearity
    eps: DefectEnvelope
    param_box: tuple = ((-1.0, 1.0),)
    breakpoints: tuple = ()
    label: str = ""
    bridges: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self):
        return self.lin.dim


@dataclass(frozen=True)
class DefectReport:
    """Pointwise defect norms against the envelope."""

    locations: np.ndarray
    defects: np.ndarray
    envelope: np.ndarray
    sup_defect: float
    attained_at: float
    compliant: bool


def _report(locations, defects, envelope):
    defects = np.asarray(defects)
    j = int(np.argmax(defects)) if defects.size else 0
    compliant = bool(np.all(defects <= np.asarray(envelope) * (1 + 1e-12) + 1e-300))
    return DefectReport(
        locations=np.asarray(locations),
        defects=defects,
        envelope=np.asarray(envelope),
        sup_defect=float(defects[j]) if defects.size else 0.0,
        attained_at=float(locations[j]) if defects.size else float("nan"),
        compliant=compliant,
    )


def defect_discrete(sys: DiscreteSystem, orbit: PseudoOrbitDiscrete) -> DefectReport:
    """Per-index residual |y_{n+1} - A_n y_n - f(n, y_n)| against the envelope."""
    if orbit.window != sys.window:
        raise DomainMismatchError("orbit window differs from system window")
    w = sys.window
    ns = np.arange(w.n_lo, w.n_hi)
    defects = np.empty(ns.size)
    env = np.empty(ns.size)
    for j, n in enumerate(ns):
        n = int(n)
        y_n = orbit.y(n)
        res = orbit.y(n + 1) - sys.lin.step(n) @ y_n - sys.f.value(n, y_n, orbit.lam)
        defects[j] = vec_norm(res)
        env[j] = sys.eps.at(n)
    return _report(ns, defects, env)


def defect_continuous(sys: ContinuousSystem, y: PseudoSolutionContinuous, grid=None) -> DefectReport:
    """Sampled residual |y'(t) - A(t) y(t) - f(t, y(t))| against the envelope."""
    ts = sys.window.grid if grid is None else np.asarray(grid, dtype=float)
    defects = np.empty(ts.size)
    env = np.empty(ts.size)
    for j, t in enumerate(ts):
        t = float(t)
        y_t = y.y(t)
        res = y.y_prime(t) - sys.lin.coeff(t) @ y_t - sys.f.value(t, y_t, y.lam)
        defects[j] = vec_norm(res)
        env[j] = sys.eps.at(t)
    return _report(ts, defects, env)
