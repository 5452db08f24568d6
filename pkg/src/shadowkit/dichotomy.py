"""Numerical certification of exponential dichotomies.

A dichotomy certificate states that the sampled Green kernel obeys
|kernel(t, s)| <= D exp(-rho |t - s|) at every sampled pair, together with
the commutation of the evolution with the projections.  The rate rho is
fitted by least squares on log kernel norms at separations >= 1 (short
separations bias the slope), and D is then taken as the max of
|kernel| * exp(rho |t - s|) over all samples, so the certified inequality
holds on the grid by construction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoDichotomyError
from .linalg import op_norm
from .linear_continuous import LinearPartContinuous
from .linear_discrete import LinearPartDiscrete, cocycle, green_row
from .windows import ContinuousWindow, DiscreteWindow

_FIT_MIN_SEPARATION = 1.0
_ZERO_NORM_FLOOR = 1e-250
_COMMUTATION_TOL = 1e-8


@dataclass(frozen=True)
class DichotomyCertificate:
    """Sampled kernel decay bound |kernel| <= D exp(-rho |t-s|) + margin."""

    D: float
    rho: float
    margin: float
    grid: str

    def bound(self, separation):
        return self.D * np.exp(-self.rho * np.abs(separation))


def _fit_and_bound(samples, grid_desc):
    """samples: list of (t, s, norm, commutation_defect)."""
    worst_comm = max(s[3] for s in samples)
    if worst_comm > _COMMUTATION_TOL:
        bad = max(samples, key=lambda s: s[3])
        raise NoDichotomyError(
            f"projections do not commute with the evolution: defect {worst_comm:.3e} "
            f"at (t, s) = ({bad[0]}, {bad[1]})",
            worst_pair=(bad[0], bad[1]),
        )
    seps = np.array([abs(t - s) for t, s, _, _ in samples])
    norms = np.array([n for _, _, n, _ in samples])
    fit_mask = (seps >= _FIT_MIN_SEPARATION) & (norms > _ZERO_NORM_FLOOR)
    if not np.any(fit_mask):
        raise NoDichotomyError(
            "no sampled pairs with separation >= 1 and nonzero kernel to fit",
            worst_pair=None,
        )
    x = seps[fit_mask]
    ylog = np.log(norms[fit_mask])
    slope, _ = np.polyfit(x, ylog, 1)
    rho = -float(slope)
    if rho <= 0:
        j = int(np.argmax(norms * (seps >= _FIT_MIN_SEPARATION)))
        raise NoDichotomyError(
            f"fitted decay rate {rho:.3e} <= 0: sampled kernel does not decay",
            worst_pair=(samples[j][0], samples[j][1]),
            fitted_rate=rho,
        )
    live = norms > _ZERO_NORM_FLOOR
    d_const = float(np.max(norms[live] * np.exp(rho * seps[live])))
    margin = float(max(0.0, np.max(norms - d_const * np.exp(-rho * seps))))
    return DichotomyCertificate(D=d_const, rho=rho, margin=margin, grid=grid_desc)


def _certify_discrete(lin: LinearPartDiscrete, proj, window: DiscreteWindow, step):
    if step <= 0:
        raise ValueError("grid_step must be > 0")
    step = max(1, int(round(step)))
    points = list(range(window.n_lo, window.n_hi + 1, step))
    samples = []
    for m in points:
        row = green_row(lin, proj, m)
        for n in points:
            norm = op_norm(row[window.offset(n)])
            trans = cocycle(lin, m, n)
            comm = op_norm(trans @ proj.at(int(n)) - proj.at(int(m)) @ trans)
            samples.append((float(m), float(n), norm, comm))
    desc = f"indices {window.n_lo}..{window.n_hi} step {step} ({len(points)} points)"
    return _fit_and_bound(samples, desc)


def _certify_continuous(lin: LinearPartContinuous, proj, window: ContinuousWindow, step):
    if step <= 0:
        raise ValueError("grid_step must be > 0")
    n = int(round((window.t_hi - window.t_lo) / step))
    points = window.t_lo + step * np.arange(n + 1)
    eye = np.eye(lin.dim)
    samples = []
    for s in points:
        col = lin.column(float(s), points)  # col[i] = operator from s to points[i]
        p_s = proj.at(float(s))
        for i, t in enumerate(points):
            trans = col[i]
            if t >= s:
                norm = op_norm(trans @ p_s)
            else:
                norm = op_norm(-trans @ (eye - p_s))
            comm = op_norm(trans @ p_s - proj.at(float(t)) @ trans)
            samples.append((float(t), float(s), norm, comm))
    desc = f"times {window.t_lo}..{window.t_hi} step {step} ({points.size} points)"
    return _fit_and_bound(samples, desc)


def certify_dichotomy(lin, proj, window, grid_step):
    """Fit (D, rho) on a sample grid and return a DichotomyCertificate.

    Raises NoDichotomyError when the fitted rate is not positive or the
    projections fail to commute with the evolution, carrying the worst
    offending pair.
    """
    if isinstance(lin, LinearPartDiscrete):
        return _certify_discrete(lin, proj, window, grid_step)
    return _certify_continuous(lin, proj, window, grid_step)
