"""Command-line front end.

Four subcommands: ``certify`` writes a JSON contraction certificate,
``shadow`` solves for the shadow orbit and writes it as CSV plus a summary,
``jet`` computes parameter derivatives with optional finite-difference
verification, and ``reproduce`` runs a full pipeline on a named example and
writes a measured-vs-expected markdown report.

Exit codes: 0 success, 2 certification failure, 3 non-convergence,
64 bad configuration, 65 jets unavailable.
"""

import argparse
import sys
from pathlib import Path

from .errors import (
    ConfigError,
    JetUnavailableError,
    NonConvergenceError,
    NotAContractionError,
    ShadowkitError,
)
from .gallery import GALLERY_NAMES
from .io import parse_config_file, parse_params, write_json
from .pipeline import (
    EXIT_CERTIFICATION,
    EXIT_CONFIG,
    EXIT_JET_UNAVAILABLE,
    EXIT_NONCONVERGENCE,
    Tolerances,
    build_bundle,
    run_certify,
    run_jet,
    run_reproduce,
    run_shadow,
)

_TOLERANCE_KEYS = ("tol", "jet_tol", "tail_tol", "quad_tol", "ode_check_tol", "tol_ode")


def _add_common(p):
    p.add_argument("--gallery", choices=GALLERY_NAMES, help="built-in system to run")
    p.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="K=V[,K=V...]",
        help="system parameters, e.g. lambda=0.5,eps=0.1",
    )
    p.add_argument("--config", help="INI config file ([system], [window], [tolerances], ...)")
    p.add_argument("--orbit", help="pseudo-orbit CSV replacing the gallery orbit")
    p.add_argument("--out-dir", default=".", help="directory for output artifacts")
    p.add_argument(
        "--assume-no-bounded-solutions",
        action="store_true",
        help="assert the linear part has no nonzero bounded solutions",
    )
    p.add_argument("--parallel", action="store_true", help="parallel quadrature panel solves")
    for key in _TOLERANCE_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="shadowkit",
        description="Certified shadowing for nonautonomous difference and differential equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="contraction constants and hypothesis certificate")
    _add_common(p)

    p = sub.add_parser("shadow", help="solve for the shadow orbit")
    _add_common(p)

    p = sub.add_parser("jet", help="parameter derivatives of the shadow orbit")
    _add_common(p)
    p.add_argument("--order", type=int, default=1, choices=(1, 2))
    p.add_argument("--direction", default=None, help="parameter direction, e.g. 1.0 or 1,0")
    p.add_argument("--verify", action="store_true", help="finite-difference cross-check")

    p = sub.add_parser("reproduce", help="reproduce a named example end to end")
    p.add_argument("example", help="sec3.2 | sec3.3 | disc-toy")
    p.add_argument("--param", action="append", default=[], metavar="K=V[,K=V...]")
    p.add_argument("--a", type=float, default=None, help="decay rate for sec3.3")
    p.add_argument("--out-dir", default=".", help="directory for the report")
    return parser


def _gather(args):
    """Merge config file and CLI into (gallery, params, tolerances, scheme, flags)."""
    cfg = parse_config_file(args.config) if args.config else {}
    system_cfg = dict(cfg.get("system", {}))
    gallery_name = args.gallery or system_cfg.pop("gallery", None)
    orbit_csv = args.orbit or system_cfg.pop("orbit", None)

    params = {}
    params.update(system_cfg)
    params.update(cfg.get("window", {}))
    params.update(parse_params(*args.param))

    tol_kwargs = {}
    for key, val in cfg.get("tolerances", {}).items():
        if key == "max_iter":
            tol_kwargs[key] = int(val)
        elif key in _TOLERANCE_KEYS:
            tol_kwargs[key] = float(val)
        else:
            raise ConfigError(f"unknown tolerance key '{key}'")
    for key in _TOLERANCE_KEYS:
        v = getattr(args, key)
        if v is not None:
            tol_kwargs[key] = v
    if args.max_iter is not None:
        tol_kwargs["max_iter"] = args.max_iter
    tolerances = Tolerances(**tol_kwargs)

    scheme_overrides = {}
    for key, val in cfg.get("quadrature", {}).items():
        scheme_overrides[key] = val

    run_cfg = cfg.get("run", {})
    assume = args.assume_no_bounded_solutions or _truthy(run_cfg.get("assume_no_bounded_solutions"))
    parallel = args.parallel or _truthy(run_cfg.get("parallel"))
    return gallery_name, params, orbit_csv, tolerances, scheme_overrides, assume, parallel


def _truthy(v):
    return str(v).strip().lower() in ("1", "true", "yes", "on") if v is not None else False


def _bundle_from_args(args, tolerances, gallery_name, params, orbit_csv, scheme_overrides,
                      assume, parallel):
    return build_bundle(
        gallery_name=gallery_name,
        params=params,
        orbit_csv=orbit_csv,
        tolerances=tolerances,
        assume_no_bounded_solutions=assume,
        parallel=parallel,
        scheme_overrides=scheme_overrides,
    )


def _print_summary(payload, keys):
    for key in keys:
        if key in payload and payload[key] is not None:
            print(f"{key} = {payload[key]}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            params = parse_params(*args.param)
            if args.a is not None:
                params["a"] = args.a
            payload, code = run_reproduce(args.example, params, out_dir=args.out_dir)
            for row in payload["rows"]:
                mark = "ok " if row["pass"] else "FAIL"
                print(f"[{mark}] {row['check']}: {row['measured']} (expected {row['expected']})")
            print(f"overall: {'PASS' if payload['all_pass'] else 'FAIL'}")
            if "report_md" in payload:
                print(f"report: {payload['report_md']}")
            return code

        gathered = _gather(args)
        gallery_name, params, orbit_csv, tolerances, scheme_overrides, assume, parallel = gathered
        bundle = _bundle_from_args(
            args, tolerances, gallery_name, params, orbit_csv, scheme_overrides, assume, parallel
        )

        if args.command == "certify":
            payload, code = run_certify(bundle, tolerances)
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_json(out / "certificate.json", payload)
            _print_summary(payload, ("q", "L", "radius", "method"))
            print(f"certificate: {out / 'certificate.json'}")
            return code

        if args.command == "shadow":
            payload, code = run_shadow(bundle, tolerances, out_dir=args.out_dir)
            _print_summary(
                payload,
                ("iterations", "residual", "sup_z", "radius", "aposteriori_bound", "orbit_csv"),
            )
            return code

        if args.command == "jet":
            direction = None
            if args.direction is not None:
                direction = [float(v) for v in args.direction.split(",")]
            payload, code = run_jet(
                bundle,
                mu=direction,
                order=args.order,
                verify=args.verify,
                tolerances=tolerances,
                out_dir=args.out_dir,
            )
            _print_summary(payload, ("residual_1", "residual_2", "hypothesis_flag", "jet_csv"))
            if "fd_check" in payload:
                print(f"fd_check = {payload['fd_check']}")
            return code

        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except JetUnavailableError as exc:
        print(f"jet unavailable: {exc}", file=sys.stderr)
        return EXIT_JET_UNAVAILABLE
    except NonConvergenceError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except NotAContractionError as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except ShadowkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
