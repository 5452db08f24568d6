"""Serialization: orbit CSV files, JSON certificates, INI run configs.

All floating-point CSV output uses 17 significant digits so that written
orbits re-ingest to bitwise-identical doubles; JSON floats use Python's
shortest exact round-trip representation.
"""

import configparser
import csv
import json

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError, WindowBoundsError
from .systems import PseudoOrbitDiscrete, PseudoSolutionContinuous
from .windows import DiscreteWindow

_FMT = "%.17g"


def _fmt(v):
    return _FMT % float(v)


def write_orbit_csv(path, locations, x, z, discrete):
    """Shadow orbit columns: n (or t), x components, z components."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=float))
    d = x.shape[1]
    head = ["n" if discrete else "t"]
    head += [f"x{i+1}" for i in range(d)] + [f"z{i+1}" for i in range(d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(head)
        for j, loc in enumerate(locations):
            loc_s = str(int(loc)) if discrete else _fmt(loc)
            w.writerow([loc_s] + [_fmt(v) for v in x[j]] + [_fmt(v) for v in z[j]])


def read_orbit_csv(path):
    """Raw orbit CSV back as (locations, x, z)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head = rows[0]
    d = (len(head) - 1) // 2
    locs = np.array([float(r[0]) for r in rows[1:]])
    x = np.array([[float(v) for v in r[1 : 1 + d]] for r in rows[1:]])
    z = np.array([[float(v) for v in r[1 + d :]] for r in rows[1:]])
    return locs, x, z


def write_jet_csv(path, locations, w1, w2=None, discrete=True):
    w1 = np.atleast_2d(np.asarray(w1, dtype=float))
    d = w1.shape[1]
    head = ["n" if discrete else "t"] + [f"w1_{i+1}" for i in range(d)]
    if w2 is not None:
        w2 = np.atleast_2d(np.asarray(w2, dtype=float))
        head += [f"w2_{i+1}" for i in range(d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(head)
        for j, loc in enumerate(locations):
            loc_s = str(int(loc)) if discrete else _fmt(loc)
            row = [loc_s] + [_fmt(v) for v in w1[j]]
            if w2 is not None:
                row += [_fmt(v) for v in w2[j]]
            w.writerow(row)


def read_pseudo_orbit_csv(path, lam, margin=10):
    """Discrete pseudo-orbit from columns n, y1..yd.

    CSV orbits carry no parameter-derivative oracles, so jets are
    unavailable for them; the window is inferred from the index column.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0].strip().lower() != "n":
        raise ConfigError(f"{path}: expected discrete orbit header starting with 'n'")
    ns = [int(float(r[0])) for r in rows[1:]]
    vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    if ns != list(range(ns[0], ns[0] + len(ns))):
        raise ConfigError(f"{path}: index column must be contiguous integers")
    window = DiscreteWindow(ns[0], ns[-1], margin=margin)
    return PseudoOrbitDiscrete(window, lam, vals)


def read_pseudo_solution_csv(path, lam):
    """Continuous pseudo-solution from columns t, y1..yd, yp1..ypd.

    Samples are splined; evaluation outside the sampled range raises, so
    solving requires samples covering the window extended by the quadrature
    tail.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0].strip().lower() != "t":
        raise ConfigError(f"{path}: expected continuous orbit header starting with 't'")
    head = rows[0]
    d = (len(head) - 1) // 2
    ts = np.array([float(r[0]) for r in rows[1:]])
    y = np.array([[float(v) for v in r[1 : 1 + d]] for r in rows[1:]])
    yp = np.array([[float(v) for v in r[1 + d :]] for r in rows[1:]])
    y_spl = CubicSpline(ts, y, axis=0)
    yp_spl = CubicSpline(ts, yp, axis=0)
    lo, hi = ts[0], ts[-1]

    def guarded(spl):
        def call(t):
            if not lo <= t <= hi:
                raise WindowBoundsError(
                    f"CSV orbit sampled on [{lo}, {hi}] evaluated at {t}; "
                    "samples must cover the window extended by the quadrature tail"
                )
            return spl(t)

        return call

    return PseudoSolutionContinuous(lam, guarded(y_spl), guarded(yp_spl))


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def parse_config_file(path):
    """INI run config with [system], [window], [tolerances], [quadrature], [run]."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    out = {}
    for section in parser.sections():
        out[section] = dict(parser.items(section))
    return out


def parse_params(*sources):
    """Merge key=value parameter strings ('lambda=0.5,eps=0.1') into one dict."""
    params = {}
    for source in sources:
        if not source:
            continue
        for item in source.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise ConfigError(f"malformed parameter '{item}', expected key=value")
            key, val = item.split("=", 1)
            params[key.strip()] = val.strip()
    return params
