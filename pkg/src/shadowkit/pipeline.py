"""Workflow orchestration behind the CLI.

Each command builds a run bundle (system + orbit + quadrature scheme +
dichotomy attempt), executes the requested computation, and returns a JSON
payload plus an exit code: 0 success, 2 certification failure, 3
non-convergence, 64 config error, 65 jets unavailable.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks
from .bridge import (
    QuadratureScheme,
    estimate_bounds_continuous,
    scheme_from_dichotomy,
    solve_shadow_continuous,
)
from .dichotomy import certify_dichotomy
from .errors import (
    ConfigError,
    JetUnavailableError,
    NoDichotomyError,
    NonConvergenceError,
    NotAContractionError,
)
from .gallery import gallery
from .io import (
    read_pseudo_orbit_csv,
    read_pseudo_solution_csv,
    write_jet_csv,
    write_json,
    write_orbit_csv,
)
from .jets import fd_jet_oracle, richardson_ratio, solve_jet1, solve_jet2
from .linalg import seq_norm
from .solver import (
    estimate_bounds_discrete,
    hyers_ulam_constants,
    solve_shadow_discrete,
    uniqueness_probe,
)
from .systems import defect_continuous, defect_discrete
from .windows import ContinuousWindow

EXIT_OK = 0
EXIT_CERTIFICATION = 2
EXIT_NONCONVERGENCE = 3
EXIT_CONFIG = 64
EXIT_JET_UNAVAILABLE = 65

_RICHARDSON_RANGE = (3.5, 4.5)


@dataclass
class Tolerances:
    tol: float = None  # solver stop; kind-dependent default
    jet_tol: float = None
    tail_tol: float = 1e-8
    quad_tol: float = 1e-8
    ode_check_tol: float = 1e-6
    tol_ode: float = 1e-10
    max_iter: int = 200

    def resolved(self, kind):
        tol = self.tol if self.tol is not None else (1e-12 if kind == "discrete" else 1e-9)
        jet_tol = self.jet_tol if self.jet_tol is not None else (
            1e-9 if kind == "discrete" else 1e-7
        )
        if min(tol, jet_tol, self.tail_tol, self.quad_tol, self.ode_check_tol,
               self.tol_ode) <= 0:
            raise ConfigError("tolerances must be > 0")
        return tol, jet_tol


@dataclass
class RunBundle:
    kind: str
    system: object
    orbit: object
    lam: np.ndarray
    orbit_at: object = None
    scheme: QuadratureScheme = None
    dichotomy: object = None
    assume_no_bounded_solutions: bool = False
    fd_step: float = 1e-4
    richardson_step: float = 1e-2
    label: str = ""
    expected: dict = field(default_factory=dict)


def worker_count():
    env = os.environ.get("SHADOWKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"SHADOWKIT_THREADS={env!r} is not an integer") from exc
    return os.cpu_count() or 1


def prefetch_panels(sys, scheme, workers):
    """Solve all distinct quadrature panels concurrently before bridge assembly.

    Panel results land in the write-once cache of the linear part, so the
    later sequential assembly is unchanged; results are bit-identical to a
    sequential build.
    """
    w = scheme.panel_width
    n_panels = max(2, int(math.ceil(scheme.t_tail / w)))
    keys = set()
    for t in sys.window.grid:
        for k in range(n_panels):
            p_hi = t - k * w
            keys.add((round(p_hi - w, 12), round(p_hi, 12)))
            if not sys.proj.is_identity:
                u_lo = t + k * w
                keys.add((round(u_lo, 12), round(u_lo + w, 12)))
    with ThreadPoolExecutor(max_workers=workers) as ex:
        list(ex.map(lambda ab: sys.lin.panel(*ab), keys))


def _attempt_dichotomy(system, kind):
    try:
        if kind == "discrete":
            w = system.window
            step = max(1, w.size // 40)
            return certify_dichotomy(system.lin, system.proj, w, step)
        w = system.window
        half = min(10.0, (w.t_hi - w.t_lo) / 2.0)
        mid = 0.5 * (w.t_lo + w.t_hi)
        sub = ContinuousWindow(mid - half, mid + half, h_grid=w.h_grid, boundary=0.0)
        return certify_dichotomy(system.lin, system.proj, sub, 0.5)
    except NoDichotomyError:
        return None


def _sup_envelopes(system):
    if hasattr(system.window, "grid"):
        pts = system.window.grid
        return max(
            max(system.f.lip(float(t)) for t in pts),
            max(system.eps.at(float(t)) for t in pts),
        )
    pts = system.window.indices
    return max(
        max(system.f.lip(int(n)) for n in pts),
        max(system.eps.at(int(n)) for n in pts),
    )


def build_bundle(gallery_name=None, params=None, orbit_csv=None, tolerances=None,
                 assume_no_bounded_solutions=False, parallel=False,
                 scheme_overrides=None):
    """Assemble system, orbit, dichotomy attempt, and quadrature scheme."""
    tolerances = tolerances or Tolerances()
    if not gallery_name:
        raise ConfigError("a gallery system is required (use --gallery or a config file)")
    problem = gallery(gallery_name, params)
    system = problem.system
    kind = problem.kind
    lam = problem.lam
    if kind == "continuous":
        # applied before any evolution solve populates the caches
        system.lin.tol_ode = float(tolerances.tol_ode)

    orbit = problem.orbit
    orbit_at = problem.orbit_at
    if orbit_csv:
        if kind == "discrete":
            orbit = read_pseudo_orbit_csv(orbit_csv, lam, margin=system.window.margin)
            if orbit.window != system.window:
                raise ConfigError(
                    f"orbit CSV window [{orbit.window.n_lo}, {orbit.window.n_hi}] does not "
                    f"match system window [{system.window.n_lo}, {system.window.n_hi}]"
                )
        else:
            orbit = read_pseudo_solution_csv(orbit_csv, lam)
        orbit_at = None  # CSV orbits carry no derivative oracles

    cert = _attempt_dichotomy(system, kind)
    scheme = None
    if kind == "continuous":
        overrides = dict(scheme_overrides or {})
        panel_width = float(overrides.pop("panel_width", 0.5))
        gauss_order = int(overrides.pop("gauss_order", 8))
        t_tail_user = overrides.pop("t_tail", None)
        if overrides:
            raise ConfigError(f"unknown quadrature option(s): {sorted(overrides)}")
        if t_tail_user is not None:
            scheme = QuadratureScheme(
                t_tail=float(t_tail_user),
                panel_width=panel_width,
                gauss_order=gauss_order,
                tail_tol=tolerances.tail_tol,
                quad_tol=tolerances.quad_tol,
                tail_source="user",
            )
        elif problem.tail_mode == "dichotomy" and cert is not None:
            scheme = scheme_from_dichotomy(
                cert,
                _sup_envelopes(system),
                tail_tol=tolerances.tail_tol,
                panel_width=panel_width,
                gauss_order=gauss_order,
                quad_tol=tolerances.quad_tol,
            )
        else:
            scheme = QuadratureScheme(
                t_tail=problem.t_tail if problem.t_tail else 10.0,
                panel_width=panel_width,
                gauss_order=gauss_order,
                tail_tol=tolerances.tail_tol,
                quad_tol=tolerances.quad_tol,
                tail_source="user" if problem.t_tail else "assumed",
            )
        if parallel:
            prefetch_panels(system, scheme, worker_count())

    return RunBundle(
        kind=kind,
        system=system,
        orbit=orbit,
        lam=lam,
        orbit_at=orbit_at,
        scheme=scheme,
        dichotomy=cert,
        assume_no_bounded_solutions=assume_no_bounded_solutions
        or problem.assume_no_bounded_solutions,
        fd_step=problem.fd_step,
        richardson_step=problem.richardson_step,
        label=problem.name,
        expected=problem.expected,
    )


def _estimate_bounds(bundle):
    if bundle.kind == "discrete":
        return estimate_bounds_discrete(bundle.system, bundle.orbit)
    return estimate_bounds_continuous(bundle.system, bundle.scheme)


def _solve(bundle, tol, max_iter, bounds, ode_check_tol=1e-6):
    if bundle.kind == "discrete":
        return solve_shadow_discrete(
            bundle.system, bundle.orbit, tol=tol, max_iter=max_iter, bounds=bounds
        )
    return solve_shadow_continuous(
        bundle.system,
        bundle.orbit,
        bundle.scheme,
        tol=tol,
        max_iter=max_iter,
        ode_check_tol=ode_check_tol,
        bounds=bounds,
    )


def _defect(bundle):
    if bundle.kind == "discrete":
        return defect_discrete(bundle.system, bundle.orbit)
    return defect_continuous(bundle.system, bundle.orbit)


def _constant_envelopes(system):
    """(c, eps) when both envelopes are constant on the window, else None."""
    if hasattr(system.window, "grid"):
        pts = [float(t) for t in system.window.grid[:: max(1, system.window.grid.size // 50)]]
    else:
        pts = [int(n) for n in system.window.indices[:: max(1, system.window.size // 50)]]
    cs = {round(system.f.lip(p), 14) for p in pts}
    es = {round(system.eps.at(p), 14) for p in pts}
    if len(cs) == 1 and len(es) == 1:
        return next(iter(cs)), next(iter(es))
    return None


def run_certify(bundle, tolerances=None, rng=None):
    """Contraction certificate payload and exit code."""
    tolerances = tolerances or Tolerances()
    rng = rng if rng is not None else np.random.default_rng(2024)
    payload = {"kind": bundle.kind, "system": bundle.label}
    exit_code = EXIT_OK

    defect = _defect(bundle)
    payload["defect"] = {
        "sup": defect.sup_defect,
        "attained_at": defect.attained_at,
        "compliant": defect.compliant,
    }

    try:
        bounds = _estimate_bounds(bundle)
        payload.update(
            q=bounds.q,
            L=bounds.L,
            radius=bounds.radius,
            sup_attained_at=bounds.sup_attained_at,
            method=bounds.method,
        )
    except NotAContractionError as exc:
        payload.update(q=exc.q, L=None, radius=None, method=None, error=str(exc))
        bounds = None
        exit_code = EXIT_CERTIFICATION

    cert = bundle.dichotomy
    payload["dichotomy"] = (
        None
        if cert is None
        else {"D": cert.D, "rho": cert.rho, "margin": cert.margin, "grid": cert.grid}
    )

    payload["hyers_ulam"] = None
    const = _constant_envelopes(bundle.system)
    if cert is not None and const is not None:
        c_const, e_const = const
        try:
            q_t, l_t, bound = hyers_ulam_constants(c_const, e_const, cert.D, cert.rho)
            payload["hyers_ulam"] = {"q_tilde": q_t, "L_tilde": l_t, "bound": bound}
        except NotAContractionError as exc:
            payload["hyers_ulam"] = {"q_tilde": exc.q, "error": str(exc)}

    hyp = checks.hypothesis_report(
        bundle.system, orbit=bundle.orbit, rng=rng, orbit_at=bundle.orbit_at, lam=bundle.lam
    )
    if cert is not None:
        hyp["no_bounded_solutions"] = {"status": "certified-dichotomy"}
    elif bundle.assume_no_bounded_solutions:
        hyp["no_bounded_solutions"] = {"status": "assumed"}
    else:
        hyp["no_bounded_solutions"] = {"status": "not-verified"}
    payload["hypotheses"] = hyp

    tail = {"bound": None, "source": None}
    if bundle.kind == "continuous" and bundle.scheme is not None:
        tail = {
            "t_tail": bundle.scheme.t_tail,
            "source": bundle.scheme.tail_source,
            "bound": bundle.scheme.tail_bound(_sup_envelopes(bundle.system)),
        }
    elif bundle.kind == "discrete" and cert is not None:
        m = bundle.system.window.margin
        tail = {
            "margin": m,
            "source": "dichotomy",
            "bound": cert.D
            * math.exp(-cert.rho * m)
            / (1.0 - math.exp(-cert.rho))
            * _sup_envelopes(bundle.system),
        }
    payload["tail"] = tail

    if not defect.compliant:
        exit_code = EXIT_CERTIFICATION
    for block in hyp.values():
        if block.get("status") == "violated":
            exit_code = EXIT_CERTIFICATION
    return payload, exit_code


def run_shadow(bundle, tolerances=None, out_dir=None):
    """Solve the shadow orbit; write orbit CSV and summary JSON when out_dir given."""
    tolerances = tolerances or Tolerances()
    tol, _ = tolerances.resolved(bundle.kind)
    try:
        bounds = _estimate_bounds(bundle)
    except NotAContractionError as exc:
        return {"error": str(exc), "q": exc.q}, EXIT_CERTIFICATION
    try:
        res = _solve(bundle, tol, tolerances.max_iter, bounds, tolerances.ode_check_tol)
    except NonConvergenceError as exc:
        payload = {"error": str(exc), "step_history": list(exc.step_history)}
        return payload, EXIT_NONCONVERGENCE

    payload = {
        "kind": bundle.kind,
        "system": bundle.label,
        "iterations": res.iterations,
        "residual": res.residual,
        "aposteriori_bound": res.aposteriori_bound,
        "sup_z": res.sup_z,
        "radius": res.bounds.radius,
        "q": res.bounds.q,
        "L": res.bounds.L,
        "equation_residual": res.equation_residual,
        "equation_residual_interior": res.equation_residual_interior,
        "measured_step_ratio": res.measured_ratio,
        "converged": True,
        "tol": tol,
    }
    ok = res.sup_z <= res.bounds.radius + 1e-9 and res.residual <= tol
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_orbit_csv(
            out / "shadow_orbit.csv", res.locations, res.x, res.z, bundle.kind == "discrete"
        )
        write_json(out / "shadow.json", payload)
        payload["orbit_csv"] = str(out / "shadow_orbit.csv")
    return payload, EXIT_OK if ok else EXIT_CERTIFICATION


def run_jet(bundle, mu=None, order=1, verify=False, tolerances=None, out_dir=None):
    """Solve first (and second) parameter jets; optionally verify against FD."""
    tolerances = tolerances or Tolerances()
    tol, jet_tol = tolerances.resolved(bundle.kind)
    if order not in (1, 2):
        raise ConfigError("jet order must be 1 or 2")
    mu = np.atleast_1d(np.asarray(mu if mu is not None else np.ones(bundle.lam.size), dtype=float))

    try:
        bounds = _estimate_bounds(bundle)
        shadow = _solve(bundle, tol, tolerances.max_iter, bounds, tolerances.ode_check_tol)
        jet = solve_jet1(
            bundle.system, bundle.orbit, shadow, mu,
            tol=min(tol, jet_tol), max_iter=tolerances.max_iter, scheme=bundle.scheme,
        )
        if order == 2:
            jet = solve_jet2(
                bundle.system, bundle.orbit, shadow, jet, mu,
                tol=min(tol, jet_tol), max_iter=tolerances.max_iter, scheme=bundle.scheme,
            )
    except NonConvergenceError as exc:
        return {"error": str(exc)}, EXIT_NONCONVERGENCE

    payload = {
        "kind": bundle.kind,
        "system": bundle.label,
        "order": order,
        "direction": mu.tolist(),
        "lambda": bundle.lam.tolist(),
        "residual_1": jet.residual_1,
        "iterations_1": jet.iterations_1,
        "jet_tol": jet_tol,
        "hypothesis_flag": jet.hypothesis_flag,
    }
    ok = jet.residual_1 <= jet_tol
    if order == 2:
        payload["residual_2"] = jet.residual_2
        payload["iterations_2"] = jet.iterations_2
        ok = ok and jet.residual_2 <= jet_tol

    if verify:
        if bundle.orbit_at is None:
            raise JetUnavailableError("FD verification needs an orbit family (gallery systems)")
        h = bundle.richardson_step
        err_h, err_h2, ratio = richardson_ratio(
            bundle.system, bundle.orbit_at, bundle.lam, mu, h,
            jet.w1 if order == 1 else jet.w2,
            order=order, tol=tol, scheme=bundle.scheme, bounds=bounds,
        )
        # errors at the roundoff floor mean the solve is exactly polynomial in
        # the parameter; the ratio carries no information then
        graded = checks.fd_convergence_ratio(err_h, err_h2)
        payload["fd_check"] = {
            "step": h,
            "error_h": err_h,
            "error_h2": err_h2,
            "richardson_ratio": ratio,
            "exact_match": graded is None,
        }
        ok = ok and (graded is None or _RICHARDSON_RANGE[0] <= graded <= _RICHARDSON_RANGE[1])

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_jet_csv(
            out / "jet.csv",
            shadow.locations,
            jet.w1,
            jet.w2 if order == 2 else None,
            discrete=bundle.kind == "discrete",
        )
        write_json(out / "jet.json", payload)
        payload["jet_csv"] = str(out / "jet.csv")
    return payload, EXIT_OK if ok else EXIT_CERTIFICATION


# -- reproduction reports -------------------------------------------------------


def _row(rows, name, expected, measured, ok):
    rows.append({"check": name, "expected": expected, "measured": measured, "pass": bool(ok)})


def _within(value, target, tol):
    return abs(value - target) <= tol


def _reproduce_cont_sin(params, tolerances):
    eps = float(params.get("eps", 0.1))
    lams = (0.1, 0.5, 0.9)
    problem = gallery("cont-sin", {"eps": eps})
    system = problem.system
    rows = []

    cert = _attempt_dichotomy(system, "continuous")
    _row(rows, "dichotomy D", "1 within 2%", cert.D, _within(cert.D, 1.0, 0.02))
    _row(rows, "dichotomy rho", "1 within 2%", cert.rho, _within(cert.rho, 1.0, 0.02))
    scheme = scheme_from_dichotomy(cert, _sup_envelopes(system), tail_tol=tolerances.tail_tol)
    bounds = estimate_bounds_continuous(system, scheme)
    _, l_t, hu_bound = hyers_ulam_constants(0.0, eps, cert.D, cert.rho)
    _row(rows, "Hyers-Ulam bound", f"2*eps = {2 * eps}", hu_bound, _within(hu_bound, 2 * eps, 0.02 * 2 * eps))

    grid = system.window.grid
    interior = system.window.interior_mask
    sin_g, cos_g = np.sin(grid), np.cos(grid)
    for lam in lams:
        orbit = problem.orbit_at([lam])
        tag = f"lambda={lam}"
        defect = defect_continuous(system, orbit)
        _row(rows, f"{tag}: defect sup", f"lam*eps = {lam * eps:.6g}",
             defect.sup_defect, _within(defect.sup_defect, lam * eps, 1e-4 * eps))
        _row(rows, f"{tag}: defect compliant", True, defect.compliant, defect.compliant)

        res = solve_shadow_continuous(system, orbit, scheme, tol=1e-9, bounds=bounds)
        target = lam * eps / math.sqrt(2.0)
        _row(rows, f"{tag}: sup|x - y|", f"lam*eps/sqrt2 = {target:.9g}",
             res.sup_z, _within(res.sup_z, target, 1e-6))
        _row(rows, f"{tag}: sup|x - y| <= bound", f"<= {hu_bound}", res.sup_z, res.sup_z <= hu_bound)
        x_true = lam / 2 * (sin_g - cos_g)
        err = float(np.max(np.abs(res.x[:, 0] - x_true)[interior]))
        _row(rows, f"{tag}: shadow vs analytic (interior)", "<= 1e-6", err, err <= 1e-6)

        jet1 = solve_jet1(system, orbit, res, [1.0], tol=1e-10, scheme=scheme)
        w1_true = -(eps / 2) * (sin_g + cos_g)
        jerr = float(np.max(np.abs(jet1.w1[:, 0] - w1_true)))
        _row(rows, f"{tag}: first jet vs analytic", "<= 1e-6", jerr, jerr <= 1e-6)
        jet2 = solve_jet2(system, orbit, res, jet1, [1.0], tol=1e-10, scheme=scheme)
        w2_sup = seq_norm(jet2.w2)
        _row(rows, f"{tag}: second jet sup", "<= 1e-8", w2_sup, w2_sup <= 1e-8)
    return rows


def _reproduce_cont_rho(params, tolerances):
    a = float(params.get("a", 3.0))
    problem = gallery("cont-rho", {"a": a})
    system = problem.system
    scheme = QuadratureScheme(t_tail=problem.t_tail, tail_tol=tolerances.tail_tol,
                              tail_source="user")
    rows = []
    bounds = estimate_bounds_continuous(system, scheme)
    _row(rows, "q", f"<= 2/a + 0.01 = {2 / a + 0.01:.6g}", bounds.q, bounds.q <= 2 / a + 0.01)

    orbit = problem.orbit
    res = solve_shadow_continuous(system, orbit, scheme, tol=1e-10,
                                  ode_check_tol=1e-4, bounds=bounds)
    _row(rows, "shadow converged", True, True, True)
    _row(rows, "step ratio", f"<= q + 0.05 = {bounds.q + 0.05:.4g}",
         res.measured_ratio, res.measured_ratio <= bounds.q + 0.05)
    _row(rows, "sup z <= radius", f"<= {bounds.radius:.6g}", res.sup_z, res.sup_z <= bounds.radius + 1e-9)

    jet1 = solve_jet1(system, orbit, res, [1.0], tol=1e-11, scheme=scheme)
    _row(rows, "first jet residual", "<= 1e-7", jet1.residual_1, jet1.residual_1 <= 1e-7)
    err_h, err_h2, ratio = richardson_ratio(
        system, problem.orbit_at, problem.lam, [1.0], problem.richardson_step,
        jet1.w1, order=1, tol=1e-11, scheme=scheme, bounds=bounds,
    )
    _row(rows, "FD Richardson ratio", "in [3.5, 4.5]", ratio,
         _RICHARDSON_RANGE[0] <= ratio <= _RICHARDSON_RANGE[1])
    _row(rows, "FD agreement at h/2", "<= 1e-4", err_h2, err_h2 <= 1e-4)
    return rows


def _reproduce_disc_toy(params, tolerances):
    problem = gallery("disc-toy", dict(params))
    system = problem.system
    orbit = problem.orbit
    rows = []

    defect = defect_discrete(system, orbit)
    _row(rows, "defect compliant", True, defect.compliant, defect.compliant)
    bounds = estimate_bounds_discrete(system, orbit)
    _row(rows, "q", "0.5 within 1e-12", bounds.q, _within(bounds.q, 0.5, 1e-12))
    _row(rows, "L", "0.2 within 1e-9", bounds.L, _within(bounds.L, 0.2, 1e-9))
    _row(rows, "radius", "0.4 within 1e-9", bounds.radius, _within(bounds.radius, 0.4, 1e-9))

    cert = _attempt_dichotomy(system, "discrete")
    _row(rows, "dichotomy D", "1 within 2%", cert.D, _within(cert.D, 1.0, 0.02))
    _row(rows, "dichotomy rho", "ln 2 within 2%", cert.rho, _within(cert.rho, math.log(2), 0.02 * math.log(2)))

    res = solve_shadow_discrete(system, orbit, tol=1e-12, bounds=bounds)
    _row(rows, "iterations", "<= 50", res.iterations, res.iterations <= 50)
    _row(rows, "step ratios", "<= 0.55", res.measured_ratio, res.measured_ratio <= 0.55)
    _row(rows, "sup z", "<= 0.4", res.sup_z, res.sup_z <= 0.4)
    _row(rows, "orbit equation residual (interior)", "<= 1e-9",
         res.equation_residual_interior, res.equation_residual_interior <= 1e-9)

    r = bounds.radius
    size = system.window.size
    seeds = [np.zeros((size, 1)), np.full((size, 1), r), np.full((size, 1), -r)]
    spread = uniqueness_probe(system, orbit, seeds, tol=1e-13)
    _row(rows, "uniqueness probe spread", "<= 1e-10", spread, spread <= 1e-10)

    jet1 = solve_jet1(system, orbit, res, [1.0], tol=1e-13)
    fd1 = fd_jet_oracle(system, problem.orbit_at, problem.lam, [1.0], problem.fd_step, 1,
                        tol=1e-13, bounds=bounds)
    err1 = seq_norm(fd1 - jet1.w1)
    _row(rows, "first jet vs FD", "<= 1e-6", err1, err1 <= 1e-6)
    jet2 = solve_jet2(system, orbit, res, jet1, [1.0], tol=1e-13)
    fd2 = fd_jet_oracle(system, problem.orbit_at, problem.lam, [1.0], 1e-3, 2,
                        tol=1e-13, bounds=bounds)
    rel2 = seq_norm(fd2 - jet2.w2) / max(seq_norm(jet2.w2), 1e-300)
    _row(rows, "second jet vs FD (relative)", "<= 1e-4", rel2, rel2 <= 1e-4)
    return rows


_REPRODUCERS = {
    "sec3.2": _reproduce_cont_sin,
    "sec3.3": _reproduce_cont_rho,
    "disc-toy": _reproduce_disc_toy,
}


def run_reproduce(example, params=None, tolerances=None, out_dir=None):
    """Full certify/shadow/jet reproduction of a named example, as a report."""
    tolerances = tolerances or Tolerances()
    if example not in _REPRODUCERS:
        raise ConfigError(
            f"unknown reproduce target '{example}', choose from {sorted(_REPRODUCERS)}"
        )
    rows = _REPRODUCERS[example](dict(params or {}), tolerances)
    all_pass = all(r["pass"] for r in rows)
    payload = {"example": example, "rows": rows, "all_pass": all_pass}
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        lines = [
            f"# Reproduction report: {example}",
            "",
            "| check | expected | measured | pass |",
            "| --- | --- | --- | --- |",
        ]
        for r in rows:
            measured = r["measured"]
            measured_s = f"{measured:.12g}" if isinstance(measured, float) else str(measured)
            lines.append(
                f"| {r['check']} | {r['expected']} | {measured_s} | "
                f"{'yes' if r['pass'] else 'NO'} |"
            )
        lines += ["", f"Overall: {'PASS' if all_pass else 'FAIL'}", ""]
        (out / "report.md").write_text("\n".join(lines))
        write_json(out / "report.json", payload)
        payload["report_md"] = str(out / "report.md")
    return payload, EXIT_OK if all_pass else EXIT_CERTIFICATION
