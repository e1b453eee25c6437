"""Batch command-line driver.

Subcommands
    simulate   one path of the matrix or eigenvalue scheme -> CSV + metadata
    law        evaluate a closed-form law on a grid -> CSV
    verify     run the Monte Carlo gating suite -> JSON report, exit code
    hypergeom  series vs determinant evaluation of a matrix pFq (debugging)

Every run writes (or prints) a metadata record with the full configuration,
seed and version string; identical configuration and seed reproduce outputs
byte for byte.  Exit codes: 0 ok, 1 usage error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .csvio import fmt, model_metadata, write_csv, write_sidecar
from .errors import ConfigError, LaguerreError
from .process import LaguerreModel, simulate_eigen, simulate_matrix

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

LAW_NAMES = ("laplace", "density", "qt", "hw", "t0", "s0", "detmoment")


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with the documented usage code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _read_config_file(path: str) -> dict:
    """Plain key=value defaults; '#' starts a comment, flags override."""
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {raw!r} is not key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _add_model_flags(p: _Parser) -> None:
    p.add_argument("--m", type=int, default=None, help="matrix size")
    p.add_argument("--delta", type=float, default=None, help="dimension delta")
    p.add_argument("--nu", type=float, default=None, help="index nu = delta - m")
    p.add_argument("--x0", type=str, default=None,
                   help="initial spectrum, comma separated (diagonal start)")


def _add_common_flags(p: _Parser) -> None:
    p.add_argument("--t", type=float, default=1.0, help="time horizon / law time")
    p.add_argument("--dt", type=float, default=None, help="step size (default 1e-4*T)")
    p.add_argument("--paths", type=int, default=None, help="Monte Carlo path count")
    p.add_argument("--seed", type=int, default=1, help="master seed")
    p.add_argument("--grid", type=str, default=None,
                   help="evaluation grid lo:hi:n or comma-separated values")
    p.add_argument("--tol", type=float, default=1e-10, help="evaluation tolerance")
    p.add_argument("--out", type=str, default=None, help="output file or directory")
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap; results are identical for any value")
    p.add_argument("--config", type=str, default=None,
                   help="key=value file with defaults; flags override")


_CONFIG_TYPES = {
    "m": int, "delta": float, "nu": float, "x0": str, "t": float, "dt": float,
    "paths": int, "seed": int, "grid": str, "tol": float, "out": str,
    "threads": int, "check": str,
}


def _apply_config_defaults(args, argv) -> None:
    """Fill unset flags from the key=value file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    file_values = _read_config_file(args.config)
    argv = argv or []
    for key, raw in file_values.items():
        if key not in _CONFIG_TYPES or not hasattr(args, key):
            raise ConfigError(f"unknown config key {key!r}")
        flag = "--" + key.replace("_", "-")
        if any(tok == flag or tok.startswith(flag + "=") for tok in argv):
            continue
        setattr(args, key, _CONFIG_TYPES[key](raw))


def _build_model(args) -> LaguerreModel:
    if args.m is None:
        raise ConfigError("--m is required")
    if args.delta is None and args.nu is None:
        raise ConfigError("provide --delta or --nu")
    if args.delta is not None and args.nu is not None \
            and abs(args.delta - args.m - args.nu) > 1e-12:
        raise ConfigError("--delta and --nu are inconsistent (nu = delta - m)")
    delta = args.delta if args.delta is not None else args.m + args.nu
    x0 = None
    if args.x0:
        x0 = np.array([float(v) for v in args.x0.split(",")])
    return LaguerreModel(m=args.m, delta=delta, x0=x0)


def _parse_grid(spec: str) -> np.ndarray:
    if ":" in spec:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    return np.array([float(v) for v in spec.split(",")])


def _run_metadata(args, extra: dict) -> dict:
    meta = {"version": __version__,
            "command": args.command,
            "config": {k: (v if not isinstance(v, np.ndarray) else v.tolist())
                       for k, v in sorted(vars(args).items())
                       if k not in ("func",)}}
    meta.update(extra)
    return meta


def cmd_simulate(args) -> int:
    model = _build_model(args)
    T = args.t
    dt = args.dt if args.dt is not None else 1e-4 * T
    out = Path(args.out) if args.out else Path(f"{args.scheme}_path.csv")
    if args.scheme == "eigen":
        path = simulate_eigen(model, dt, T, args.seed)
    else:
        path = simulate_matrix(model, dt, T, args.seed)
    path.to_csv(out)
    print(f"wrote {out} and {out}.meta.json")
    return EXIT_OK


def _law_rows(args, model):
    """(header, rows, metadata-extras) of one law over the grid."""
    from . import laws
    name = args.law
    t = args.t
    if name == "laplace":
        grid = _parse_grid(args.grid or "0:2:21")
        rows = [(u, laws.laplace_transform(model, t, u * np.eye(model.m)))
                for u in grid]
        return ["u", "laplace"], rows, {"u_shape": "u * identity"}
    if name == "t0":
        grid = _parse_grid(args.grid or "0.1:3:30")
        rows = [(tv, laws.t0_tail(model, model.x0, tv)) for tv in grid]
        return ["t", "tail"], rows, {}
    if name == "s0":
        nu = model.m - model.delta
        lam = model.x0_spectrum
        grid = _parse_grid(args.grid or "0.01:5:100")
        rows = [(u, laws.s0_density(nu, lam[0], lam[1], u)) for u in grid]
        return ["u", "f_u"], rows, {}
    if name == "hw":
        lam = np.sqrt(model.x0_spectrum)  # eigenvalues of sqrt(x y) for y = x
        spec = laws.QuadratureSpec(abs_tol=args.tol, rel_tol=args.tol)
        grid = _parse_grid(args.grid or "0.5:20:40")
        if lam[0] - lam[1] < 1e-7 * lam[0]:
            rows = [(v, laws.hw_density_equal(lam[0], v, spec)) for v in grid]
        else:
            rows = [(v, laws.hw_density_m2(laws.HWQuery(lam[0], lam[1], v), spec))
                    for v in grid]
        return ["v", "f_v"], rows, {"lambda": lam.tolist(),
                                    "quadrature": {"abs_tol": spec.abs_tol,
                                                   "rel_tol": spec.rel_tol,
                                                   "direct_min": spec.direct_min,
                                                   "shifted_min": spec.shifted_min}}
    if name == "qt":
        x = model.x0_spectrum
        grid = _parse_grid(args.grid or "0.1:10:25")
        rows = []
        for y1 in grid:
            for y2 in grid:
                if y1 > y2:
                    rows.append((y1, y2, laws.eigen_semigroup(model, t, x,
                                                              np.array([y1, y2]))))
        return ["y1", "y2", "q_t"], rows, {}
    if name == "density":
        x = model.x0
        grid = _parse_grid(args.grid or "0.1:10:25")
        rows = []
        for y1 in grid:
            for y2 in grid:
                if y1 > y2:
                    y = np.diag([y1, y2]).astype(complex)
                    rows.append((y1, y2, laws.transition_density(model, t, x, y)))
        return ["y1", "y2", "p_t"], rows, {"y_shape": "diagonal"}
    if name == "detmoment":
        grid = _parse_grid(args.grid or "0.25:3:12")
        rows = [(s, laws.det_moment(model, t, s)) for s in grid]
        return ["s", "moment"], rows, {}
    raise ConfigError(f"unknown law {name!r}; choose from {LAW_NAMES}")


def cmd_law(args) -> int:
    model = _build_model(args)
    header, rows, extra = _law_rows(args, model)
    meta = _run_metadata(args, {"model": model_metadata(model), **extra})
    out = Path(args.out) if args.out else Path(f"law_{args.law}.csv")
    write_csv(out, header, rows, meta=meta)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .mc import run_suite
    if args.paths is not None and args.paths < 1000:
        print("warning: path counts below 1000 are underpowered; "
              "gating thresholds assume the recorded defaults", file=sys.stderr)
    reports = run_suite(fast=args.fast, only=args.check, threads=args.threads,
                        paths_override=args.paths)
    payload = [r.to_dict() for r in reports]
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    gating_failures = [r for r in reports if r.gating and not r.passed]
    for r in reports:
        status = "PASS" if r.passed else ("FAIL" if r.gating else "fail (non-gating)")
        print(f"  {r.name:<28s} z={r.z:+.3f}  {status}", file=sys.stderr)
    return EXIT_VERIFY if gating_failures else EXIT_OK


def cmd_hypergeom(args) -> int:
    from .specfun import gross_richards
    from .symfun import hyp_matrix_series
    a = [float(v) for v in args.a.split(",")] if args.a else []
    b = [float(v) for v in args.b.split(",")] if args.b else []
    x = np.array([float(v) for v in args.spectrum.split(",")])
    series = hyp_matrix_series(a, b, x, tol=args.tol)
    det = gross_richards(a, b, x, tol=args.tol)
    rel = abs(series.value - det) / max(abs(det), 1e-300)
    print(f"series      = {fmt(series.value)}  (tail {series.tail:.3e}, "
          f"weight {series.top_weight})")
    print(f"determinant = {fmt(det)}")
    print(f"rel. diff   = {rel:.3e}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="laguerre",
                     description="Laguerre (complex Wishart) process toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="simulate one path", parents=[])
    p_sim.add_argument("scheme", choices=("matrix", "eigen"))
    _add_model_flags(p_sim)
    _add_common_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_law = sub.add_parser("law", help="evaluate a law on a grid")
    p_law.add_argument("law", choices=LAW_NAMES)
    _add_model_flags(p_law)
    _add_common_flags(p_law)
    p_law.set_defaults(func=cmd_law)

    p_ver = sub.add_parser("verify", help="run the Monte Carlo gating suite")
    p_ver.add_argument("--check", type=str, default=None,
                       help="run a single named check")
    p_ver.add_argument("--fast", action="store_true",
                       help="smoke-test configuration (reduced paths)")
    _add_common_flags(p_ver)
    p_ver.set_defaults(func=cmd_verify)

    p_hyp = sub.add_parser("hypergeom", help="series vs determinant evaluators")
    p_hyp.add_argument("--a", type=str, default="", help="numerator parameters")
    p_hyp.add_argument("--b", type=str, default="", help="denominator parameters")
    p_hyp.add_argument("--spectrum", type=str, required=True,
                       help="eigenvalues of the matrix argument")
    p_hyp.add_argument("--tol", type=float, default=1e-10)
    p_hyp.set_defaults(func=cmd_hypergeom)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(argv)
    try:
        _apply_config_defaults(args, argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LaguerreError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
