"""Built-in example problems.

Each entry builds a fully consistent system plus a pseudo-orbit family with
analytic parameter-derivative oracles, so every solver and jet path can be
exercised end to end:

* ``cont-sin``:  x' = -x + lam sin t, hyperbolic scalar ODE with constant
  envelopes; the shadow orbit is known in closed form.
* ``cont-rho``:  scalar ODE whose evolution is rho(s)/rho(t) for a piecewise
  rational rho; the kernel is bounded but admits no exponential dichotomy.
* ``disc-toy``:  contractive scalar difference equation with a tanh
  nonlinearity; the orbit is generated by injecting a defect of exactly
  0.1 |cos n| into the recursion.
* ``disc-forced``: state-independent forcing, so the contraction constant is
  zero and one operator application lands on the fixed point.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .linear_continuous import LinearPartContinuous
from .linear_discrete import LinearPartDiscrete, ProjectionFamily
from .systems import (
    ContinuousSystem,
    DefectEnvelope,
    DiscreteSystem,
    Nonlinearity,
    PseudoOrbitDiscrete,
    PseudoSolutionContinuous,
)
from .windows import ContinuousWindow, DiscreteWindow

GALLERY_NAMES = ("cont-sin", "cont-rho", "disc-toy", "disc-forced")


@dataclass
class GalleryProblem:
    """A named system with its pseudo-orbit family and run hints."""

    name: str
    kind: str  # "discrete" | "continuous"
    system: object
    lam: np.ndarray
    orbit_at: object = field(repr=False)  # callable lam -> pseudo-orbit
    tail_mode: str = "dichotomy"  # how the quadrature tail cutoff is justified
    t_tail: float = None
    fd_step: float = 1e-4
    richardson_step: float = 1e-2
    assume_no_bounded_solutions: bool = True
    expected: dict = field(default_factory=dict)

    @property
    def orbit(self):
        return self.orbit_at(self.lam)


def _pick(params, key, default, cast=float):
    if key in params:
        return cast(params.pop(key))
    return default


def _reject_leftovers(params, name):
    if params:
        raise ConfigError(f"unknown parameter(s) for gallery '{name}': {sorted(params)}")


def _scalar(v):
    return np.array([float(v)])


def _build_cont_sin(params):
    lam0 = _pick(params, "lambda", 0.5)
    eps = _pick(params, "eps", 0.1)
    t_lo = _pick(params, "t_lo", -20.0)
    t_hi = _pick(params, "t_hi", 20.0)
    h_grid = _pick(params, "h_grid", 0.05)
    boundary = _pick(params, "boundary", 5.0)
    _reject_leftovers(params, "cont-sin")
    if not 0.0 < lam0 < 1.0:
        raise ConfigError(f"cont-sin needs 0 < lambda < 1, got {lam0}")
    if eps <= 0:
        raise ConfigError(f"cont-sin needs eps > 0, got {eps}")

    window = ContinuousWindow(t_lo, t_hi, h_grid=h_grid, boundary=boundary)
    lin = LinearPartContinuous(1, lambda t: -1.0)
    proj = ProjectionFamily(1)
    zero_mat = lambda t, x, lam: 0.0
    f = Nonlinearity(
        dim=1,
        param_dim=1,
        value=lambda t, x, lam: lam[0] * math.sin(t),
        dx=zero_mat,
        dlam=lambda t, x, lam: math.sin(t),
        dxx=zero_mat,
        dxlam=zero_mat,
        dlamlam=zero_mat,
        lip_envelope=lambda t: 0.0,
        bound_const=1.0,
    )
    system = ContinuousSystem(
        window=window,
        lin=lin,
        proj=proj,
        f=f,
        eps=DefectEnvelope(lambda t: eps),
        param_box=((0.01, 0.99),),
        label="cont-sin",
    )

    def orbit_at(lam):
        lv = float(np.atleast_1d(lam)[0])
        y = lambda t: lv / 2 * (math.sin(t) - math.cos(t)) + lv * eps / 2 * (math.sin(t) + math.cos(t))
        yp = lambda t: lv / 2 * (math.cos(t) + math.sin(t)) + lv * eps / 2 * (math.cos(t) - math.sin(t))
        dy = lambda t: 0.5 * (math.sin(t) - math.cos(t)) + eps / 2 * (math.sin(t) + math.cos(t))
        dyp = lambda t: 0.5 * (math.cos(t) + math.sin(t)) + eps / 2 * (math.cos(t) - math.sin(t))
        zero = lambda t: 0.0
        return PseudoSolutionContinuous(
            lam=[lv], y=y, y_prime=yp, dy=dy, dy_prime=dyp, d2y=zero, d2y_prime=zero
        )

    return GalleryProblem(
        name="cont-sin",
        kind="continuous",
        system=system,
        lam=_scalar(lam0),
        orbit_at=orbit_at,
        tail_mode="dichotomy",
        fd_step=1e-4,
        richardson_step=2e-2,
        expected={
            "eps": eps,
            "defect_sup": lam0 * eps,
            "sup_z": lam0 * eps / math.sqrt(2.0),
            "hyers_ulam_bound": 2 * eps,
            "dichotomy": (1.0, 1.0),
        },
    )


def _rho(t):
    return 1.0 + t if t >= 0 else 1.0 / (1.0 + abs(t))


def _rho_prime(t):
    return 1.0 if t >= 0 else 1.0 / (1.0 + abs(t)) ** 2


def _build_cont_rho(params):
    a = _pick(params, "a", 3.0)
    lam0 = _pick(params, "lambda", 0.5)
    t_lo = _pick(params, "t_lo", -10.0)
    t_hi = _pick(params, "t_hi", 10.0)
    h_grid = _pick(params, "h_grid", 0.05)
    boundary = _pick(params, "boundary", 5.0)
    t_tail = _pick(params, "t_tail", 14.0)
    _reject_leftovers(params, "cont-rho")
    if a <= 2.0:
        raise ConfigError(f"cont-rho needs a > 2, got {a}")
    if not -1.0 < lam0 < 1.0:
        raise ConfigError(f"cont-rho needs -1 < lambda < 1, got {lam0}")

    window = ContinuousWindow(t_lo, t_hi, h_grid=h_grid, boundary=boundary)
    lin = LinearPartContinuous(1, lambda t: -_rho_prime(t) / _rho(t))
    proj = ProjectionFamily(1)

    def c_env(t):
        return math.exp(-a * abs(t)) * _rho(-abs(t))

    zero_mat = lambda t, x, lam: 0.0
    f = Nonlinearity(
        dim=1,
        param_dim=1,
        value=lambda t, x, lam: lam[0] * c_env(t) * x[0],
        dx=lambda t, x, lam: lam[0] * c_env(t),
        dlam=lambda t, x, lam: c_env(t) * x[0],
        dxx=zero_mat,
        dxlam=lambda t, x, lam: c_env(t),
        dlamlam=zero_mat,
        lip_envelope=c_env,
        bound_const=1.0,
    )
    system = ContinuousSystem(
        window=window,
        lin=lin,
        proj=proj,
        f=f,
        eps=DefectEnvelope(lambda t: math.exp(-a * abs(t))),
        param_box=((-0.9, 0.9),),
        breakpoints=(0.0,),
        label="cont-rho",
    )

    def orbit_at(lam):
        lv = float(np.atleast_1d(lam)[0])
        y = lambda t: lv / (2 * _rho(t))
        yp = lambda t: -lv * _rho_prime(t) / (2 * _rho(t) ** 2)
        dy = lambda t: 1.0 / (2 * _rho(t))
        dyp = lambda t: -_rho_prime(t) / (2 * _rho(t) ** 2)
        zero = lambda t: 0.0
        return PseudoSolutionContinuous(
            lam=[lv], y=y, y_prime=yp, dy=dy, dy_prime=dyp, d2y=zero, d2y_prime=zero
        )

    return GalleryProblem(
        name="cont-rho",
        kind="continuous",
        system=system,
        lam=_scalar(lam0),
        orbit_at=orbit_at,
        tail_mode="user",
        t_tail=t_tail,
        fd_step=1e-4,
        richardson_step=4e-2,
        expected={"a": a, "q_upper": 2.0 / a},
    )


def _tanh_orbit_arrays(window, lam_val):
    """Orbit of the toy recursion with an injected 0.1 cos n defect.

    The orbit and its first two parameter derivatives satisfy the
    differentiated recursions exactly, so the oracles are consistent with
    finite differences by construction.
    """
    size = window.size
    y = np.zeros(size)
    s = np.zeros(size)  # dy/dlam
    q = np.zeros(size)  # d2y/dlam2
    for j, n in enumerate(range(window.n_lo, window.n_hi)):
        th = math.tanh(y[j])
        sech2 = 1.0 / math.cosh(y[j]) ** 2
        dsech2 = -2.0 * sech2 * th
        y[j + 1] = 0.5 * y[j] + 0.25 * lam_val * th + 0.1 * math.cos(n)
        s[j + 1] = 0.5 * s[j] + 0.25 * th + 0.25 * lam_val * sech2 * s[j]
        q[j + 1] = (
            0.5 * q[j]
            + 0.5 * sech2 * s[j]
            + 0.25 * lam_val * dsech2 * s[j] ** 2
            + 0.25 * lam_val * sech2 * q[j]
        )
    return y, s, q


def _build_disc_toy(params):
    lam0 = _pick(params, "lambda", 0.5)
    n_lo = _pick(params, "n_lo", -128, cast=int)
    n_hi = _pick(params, "n_hi", 128, cast=int)
    margin = _pick(params, "margin", 10, cast=int)
    _reject_leftovers(params, "disc-toy")
    if not -1.0 < lam0 < 1.0:
        raise ConfigError(f"disc-toy needs -1 < lambda < 1, got {lam0}")

    window = DiscreteWindow(n_lo, n_hi, margin=margin)
    lin = LinearPartDiscrete(1, lambda n: 0.5, window)
    proj = ProjectionFamily(1)
    f = Nonlinearity(
        dim=1,
        param_dim=1,
        value=lambda n, x, lam: 0.25 * lam[0] * math.tanh(x[0]),
        dx=lambda n, x, lam: 0.25 * lam[0] / math.cosh(x[0]) ** 2,
        dlam=lambda n, x, lam: 0.25 * math.tanh(x[0]),
        dxx=lambda n, x, lam: -0.5 * lam[0] * math.tanh(x[0]) / math.cosh(x[0]) ** 2,
        dxlam=lambda n, x, lam: 0.25 / math.cosh(x[0]) ** 2,
        dlamlam=lambda n, x, lam: 0.0,
        lip_envelope=lambda n: 0.25,
        bound_const=6.0,
    )
    system = DiscreteSystem(
        window=window,
        lin=lin,
        proj=proj,
        f=f,
        eps=DefectEnvelope(lambda n: 0.1),
        param_box=((-0.9, 0.9),),
        label="disc-toy",
    )

    def orbit_at(lam):
        lv = float(np.atleast_1d(lam)[0])
        y, s, q = _tanh_orbit_arrays(window, lv)
        return PseudoOrbitDiscrete(
            window,
            [lv],
            y[:, None],
            dvalues=s[:, None, None],
            d2values=q[:, None, None, None],
        )

    return GalleryProblem(
        name="disc-toy",
        kind="discrete",
        system=system,
        lam=_scalar(lam0),
        orbit_at=orbit_at,
        fd_step=1e-4,
        richardson_step=1e-2,
        expected={"q": 0.5, "L": 0.2, "radius": 0.4},
    )


def _build_disc_forced(params):
    lam0 = _pick(params, "lambda", 0.5)
    n_lo = _pick(params, "n_lo", -128, cast=int)
    n_hi = _pick(params, "n_hi", 128, cast=int)
    margin = _pick(params, "margin", 10, cast=int)
    _reject_leftovers(params, "disc-forced")
    if not -1.0 < lam0 < 1.0:
        raise ConfigError(f"disc-forced needs -1 < lambda < 1, got {lam0}")

    window = DiscreteWindow(n_lo, n_hi, margin=margin)
    lin = LinearPartDiscrete(1, lambda n: 0.5, window)
    proj = ProjectionFamily(1)
    zero_mat = lambda n, x, lam: 0.0
    f = Nonlinearity(
        dim=1,
        param_dim=1,
        value=lambda n, x, lam: lam[0] * math.sin(n),
        dx=zero_mat,
        dlam=lambda n, x, lam: math.sin(n),
        dxx=zero_mat,
        dxlam=zero_mat,
        dlamlam=zero_mat,
        lip_envelope=lambda n: 0.0,
        bound_const=1.0,
    )
    system = DiscreteSystem(
        window=window,
        lin=lin,
        proj=proj,
        f=f,
        eps=DefectEnvelope(lambda n: 1.0),
        param_box=((-0.9, 0.9),),
        label="disc-forced",
    )

    def orbit_at(lam):
        lv = float(np.atleast_1d(lam)[0])
        size = window.size
        return PseudoOrbitDiscrete(
            window,
            [lv],
            np.zeros((size, 1)),
            dvalues=np.zeros((size, 1, 1)),
            d2values=np.zeros((size, 1, 1, 1)),
        )

    return GalleryProblem(
        name="disc-forced",
        kind="discrete",
        system=system,
        lam=_scalar(lam0),
        orbit_at=orbit_at,
        fd_step=1e-4,
        richardson_step=1e-2,
        expected={"q": 0.0},
    )


_BUILDERS = {
    "cont-sin": _build_cont_sin,
    "cont-rho": _build_cont_rho,
    "disc-toy": _build_disc_toy,
    "disc-forced": _build_disc_forced,
}


def gallery(name, params=None) -> GalleryProblem:
    """Build a named gallery problem; unknown names or bad parameters raise ConfigError."""
    if name not in _BUILDERS:
        raise ConfigError(f"unknown gallery name '{name}', choose from {GALLERY_NAMES}")
    return _BUILDERS[name](dict(params or {}))
