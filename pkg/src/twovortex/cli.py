"""Batch front end for the two-carrier propagator.

Subcommands: ``eval`` (one endpoint pair, JSON-lines record), ``grid``
(rectangular arrival grid to CSV, optional worker pool), ``verify`` (run
named check suites, JSON report bundle), ``bench`` (representative
timings).  Configuration is a TOML file; a handful of flags override it.
Outputs carry a schema tag, use radians throughout, and are byte-stable
for a fixed config independent of the worker count.

Exit codes: 0 success, 1 verification failure, 2 configuration or domain
error, 3 quadrature nonconvergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time as _time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # python < 3.11
    import tomli as _toml

from . import verify as checks
from .geometry import Flux, GeometryError, VortexConfig
from .kernels import EvalMode
from .propagator import (
    K_closed,
    K_schulman_truncated,
    PropagatorRequest,
    ValidityDomainError,
)
from .quadrature import QuadratureSpec, SimplexNonconvergenceError

__all__ = ["ConfigError", "main", "run_eval", "run_grid", "run_verify", "run_bench"]

SCHEMA_EVAL = "twovortex/eval/1"
SCHEMA_GRID = "twovortex/grid/1"
SCHEMA_VERIFY = "twovortex/verify/1"
SCHEMA_BENCH = "twovortex/bench/1"
SCHEMA_ERROR = "twovortex/error/1"

GRID_COLUMNS = ["x", "y", "t", "re", "im", "abs",
                "trunc_bound", "quad_err", "skipped", "error"]


class ConfigError(Exception):
    """A configuration problem, carrying the offending key path."""

    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


# ---------------------------------------------------------------- config

_SECTIONS = {
    "vortices": {"separation"},
    "flux": {"a", "b"},
    "mode": {"kind", "time", "phi"},
    "truncation": {"n_max", "k_max"},
    "quadrature": {"rel_tol", "abs_tol", "max_subdivisions", "points_per_panel"},
    "output": {"path"},
    "eval": {"x0", "x", "t", "chain_variant"},
    "grid": {"x0", "x_range", "y_range", "nx", "ny", "times"},
    "verify": {"suite", "tolerance"},
}


def load_config(path: str) -> dict:
    """Read and shape-check a TOML config; unknown keys are errors."""
    try:
        with open(path, "rb") as fh:
            raw = _toml.load(fh)
    except OSError as exc:
        raise ConfigError(path, f"cannot read config: {exc}") from exc
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(path, f"not valid TOML: {exc}") from exc
    for sec, table in raw.items():
        if sec not in _SECTIONS:
            raise ConfigError(sec, "unknown section")
        if not isinstance(table, dict):
            raise ConfigError(sec, "expected a table of keys")
        for key in table:
            if key not in _SECTIONS[sec]:
                raise ConfigError(f"{sec}.{key}", "unknown key")
    return raw


def _value(raw: dict, sec: str, key: str, default):
    return raw.get(sec, {}).get(key, default)


def _number(raw, sec, key, default, *, positive=False):
    v = _value(raw, sec, key, default)
    if v is None:
        raise ConfigError(f"{sec}.{key}", "required key is missing")
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ConfigError(f"{sec}.{key}", f"expected a number, got {v!r}")
    v = float(v)
    if positive and not v > 0.0:
        raise ConfigError(f"{sec}.{key}", f"must be positive, got {v}")
    return v


def _integer(raw, sec, key, default, *, minimum):
    v = _value(raw, sec, key, default)
    if v is None:
        raise ConfigError(f"{sec}.{key}", "required key is missing")
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"{sec}.{key}", f"expected an integer, got {v!r}")
    if v < minimum:
        raise ConfigError(f"{sec}.{key}", f"must be >= {minimum}, got {v}")
    return v


def _point_pair(raw, sec, key):
    v = _value(raw, sec, key, None)
    if v is None:
        raise ConfigError(f"{sec}.{key}", "required key is missing")
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ConfigError(f"{sec}.{key}", f"expected [x, y], got {v!r}")
    return float(v[0]), float(v[1])


def build_run_config(raw: dict, args) -> dict:
    """Merge config file and flag overrides into evaluation objects."""
    kind = args.mode or _value(raw, "mode", "kind", "euclidean")
    if kind not in ("euclidean", "rotated"):
        raise ConfigError("mode.kind", f"expected euclidean or rotated, got {kind!r}")
    if args.phi is not None and kind == "euclidean":
        raise ConfigError("mode.phi", "contour angle only applies to rotated mode")
    phi = args.phi if args.phi is not None else _number(raw, "mode", "phi", math.pi / 2.0)
    t = _number(raw, "mode", "time", 1.0, positive=True)
    n_max = args.nmax if args.nmax is not None else _integer(raw, "truncation", "n_max", 3, minimum=0)
    k_max = args.kmax if args.kmax is not None else _integer(raw, "truncation", "k_max", 100, minimum=1)
    rel = args.tol if args.tol is not None else _number(raw, "quadrature", "rel_tol", 1e-8, positive=True)
    variant = _value(raw, "eval", "chain_variant", "matched")
    if variant not in ("matched", "printed_mixed"):
        raise ConfigError("eval.chain_variant", f"unknown variant {variant!r}")
    try:
        cfg = VortexConfig(separation=_number(raw, "vortices", "separation", 2.0, positive=True))
        flux = Flux(_number(raw, "flux", "a", 0.5), _number(raw, "flux", "b", 0.5))
        mode = EvalMode(kind, t, phi) if kind == "rotated" else EvalMode(kind, t)
        quad = QuadratureSpec(
            rel_tol=rel,
            abs_tol=_number(raw, "quadrature", "abs_tol", 1e-12, positive=True),
            max_subdivisions=_integer(raw, "quadrature", "max_subdivisions", 8, minimum=1),
            points_per_panel=_integer(raw, "quadrature", "points_per_panel", 10, minimum=2),
        )
    except ValueError as exc:
        raise ConfigError("<config>", str(exc)) from exc
    return {"cfg": cfg, "flux": flux, "mode": mode, "n_max": n_max,
            "k_max": k_max, "quad": quad, "variant": variant}


# ------------------------------------------------------------- serialize

def _jsonable(obj):
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if obj is None or isinstance(obj, (int, float, str)):
        return obj
    return str(obj)


def _emit_error(kind: str, key, reason: str) -> None:
    record = {"schema": SCHEMA_ERROR, "kind": kind, "key": key, "reason": reason}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _contour_angle(mode: EvalMode) -> float:
    return mode.phi if mode.kind == "rotated" else math.pi / 2.0


# ------------------------------------------------------------------ eval

def run_eval(rc: dict, raw: dict, sink) -> int:
    if "eval" not in raw:
        raise ConfigError("eval", "section required for the eval subcommand")
    x0 = _point_pair(raw, "eval", "x0")
    x = _point_pair(raw, "eval", "x")
    mode = rc["mode"]
    if "t" in raw["eval"]:
        t = _number(raw, "eval", "t", None, positive=True)
        mode = EvalMode(mode.kind, t, mode.phi) if mode.kind == "rotated" else EvalMode(mode.kind, t)
    req = PropagatorRequest(x0, x, mode, rc["flux"], rc["cfg"], n_max=rc["n_max"],
                            quad=rc["quad"], chain_variant=rc["variant"])
    res = K_closed(req)
    v = res.value
    record = {
        "schema": SCHEMA_EVAL,
        "inputs": {
            "x0": list(x0), "x": list(x), "time": mode.time, "mode": mode.kind,
            "contour_angle": _contour_angle(mode),
            "flux": [rc["flux"].alpha, rc["flux"].beta],
            "separation": rc["cfg"].separation,
            "n_max": rc["n_max"], "chain_variant": rc["variant"],
            "quadrature": {"rel_tol": rc["quad"].rel_tol, "abs_tol": rc["quad"].abs_tol},
        },
        "value": {"re": v.real, "im": v.imag, "abs": abs(v)},
        "terms": [
            {"word": "".join(w) or "direct", "re": tv.real, "im": tv.imag, "abs": abs(tv)}
            for w, tv in res.terms.items()
        ],
        "truncation_bound": res.truncation_bound,
        "quad_err": res.quad_err,
        "warnings": list(res.warnings),
    }
    sink.write(json.dumps(record, sort_keys=True) + "\n")
    return 0


# ------------------------------------------------------------------ grid

def _linspace(lo: float, hi: float, n: int) -> list:
    if n == 1:
        return [lo]
    return [lo + i * (hi - lo) / (n - 1) for i in range(n)]


def _range_pair(raw, key):
    v = _value(raw, "grid", key, None)
    if v is None:
        raise ConfigError(f"grid.{key}", "required key is missing")
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ConfigError(f"grid.{key}", f"expected [lo, hi], got {v!r}")
    lo, hi = float(v[0]), float(v[1])
    if not lo <= hi:
        raise ConfigError(f"grid.{key}", f"expected lo <= hi, got {v!r}")
    return lo, hi


def _grid_chunk(task):
    """Evaluate one grid row (fixed t and y); returns finished row tuples."""
    payload, t, y, xs = task
    sep, fa, fb, kind, phi, n_max, qt, variant, x0 = payload
    cfg = VortexConfig(separation=sep)
    flux = Flux(fa, fb)
    mode = EvalMode(kind, t, phi) if kind == "rotated" else EvalMode(kind, t)
    quad = QuadratureSpec(*qt)
    blank = (None, None, None, None, None)
    rows = []
    for xp in xs:
        if y == 0.0 and (xp <= 0.0 or xp >= sep):
            # on a cut half-line or a carrier: marked, not evaluated
            rows.append((xp, y, t) + blank + (1, ""))
            continue
        try:
            req = PropagatorRequest(x0, (xp, y), mode, flux, cfg, n_max=n_max,
                                    quad=quad, chain_variant=variant)
            res = K_closed(req)
        except SimplexNonconvergenceError as exc:
            rows.append((xp, y, t) + blank + (0, f"nonconvergence: {exc}"))
        except (GeometryError, ValidityDomainError, ValueError) as exc:
            rows.append((xp, y, t) + blank + (0, str(exc)))
        else:
            v = res.value
            rows.append((xp, y, t, v.real, v.imag, abs(v),
                         res.truncation_bound, res.quad_err, 0, ""))
    return rows


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))  # builtin repr: shortest round-trip, no numpy tag
    return str(v)


def run_grid(rc: dict, raw: dict, sink, threads: int) -> int:
    if "grid" not in raw:
        raise ConfigError("grid", "section required for the grid subcommand")
    x0 = _point_pair(raw, "grid", "x0")
    xlo, xhi = _range_pair(raw, "x_range")
    ylo, yhi = _range_pair(raw, "y_range")
    nx = _integer(raw, "grid", "nx", None, minimum=1)
    ny = _integer(raw, "grid", "ny", None, minimum=1)
    times = _value(raw, "grid", "times", None)
    if (not isinstance(times, list) or not times
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) and c > 0
                       for c in times)):
        raise ConfigError("grid.times", f"expected a list of positive times, got {times!r}")
    xs = _linspace(xlo, xhi, nx)
    ys = _linspace(ylo, yhi, ny)
    q = rc["quad"]
    payload = (rc["cfg"].separation, rc["flux"].alpha, rc["flux"].beta,
               rc["mode"].kind, rc["mode"].phi, rc["n_max"],
               (q.rel_tol, q.abs_tol, q.max_subdivisions, q.points_per_panel),
               rc["variant"], x0)
    tasks = [(payload, float(t), y, xs) for t in times for y in ys]

    sink.write(f"# schema={SCHEMA_GRID}\n")
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(GRID_COLUMNS)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            produced = pool.map(_grid_chunk, tasks)
            for rows in produced:
                for row in rows:
                    writer.writerow([_fmt(v) for v in row])
    else:
        for task in tasks:
            for row in _grid_chunk(task):
                writer.writerow([_fmt(v) for v in row])
    return 0


# ---------------------------------------------------------------- verify
#
# Suites are lists of (label, thunk); each thunk runs independently and a
# raising check becomes a failing report instead of aborting the suite.

def _suite_identities(rc: dict, tol) -> list:
    kw = {} if tol is None else {"tolerance": tol}
    thunks = []
    for alpha, theta, s in [(0.3, 0.5, 0.0), (0.5, -2.0, 1.0), (0.7, 2.6, -0.5)]:
        thunks.append((f"sum_identity(a={alpha})",
                       lambda a=alpha, th=theta, sv=s: checks.check_sum_identity(a, th, sv, **kw)))
        thunks.append((f"integral_identity(a={alpha})",
                       lambda a=alpha, th=theta, sv=s: checks.check_integral_identity(a, th, sv, **kw)))
    for t, r, th in [(0.7, 1.3, 1.0), (2.0, 0.3, -2.5)]:
        thunks.append((f"auxrel_euler(t={t})",
                       lambda tv=t, rv=r, tb=th: checks.check_auxrel_euler(tv, rv, tb, **kw)))
    return thunks


def _suite_kernel(rc: dict, tol) -> list:
    kw = {} if tol is None else {"tolerance": tol}
    cfg, flux, mode = rc["cfg"], rc["flux"], rc["mode"]
    x0, x1 = (1.3, 0.6), (0.4, -0.9)
    req = PropagatorRequest(x0, x1, mode, flux, cfg, n_max=min(rc["n_max"], 2),
                            quad=QuadratureSpec(rel_tol=1e-7, abs_tol=1e-13))
    alpha = flux.alpha if 0.0 < flux.alpha < 1.0 else 0.5
    pde_req = PropagatorRequest(x0, (0.8, 1.1), mode, flux,
                                VortexConfig(separation=max(cfg.separation, 3.0)),
                                n_max=min(rc["n_max"], 3),
                                quad=QuadratureSpec(rel_tol=1e-9, abs_tol=1e-15))
    return [
        ("one_vortex_oracle", lambda: checks.check_one_vortex_oracle(alpha, mode, x0, x1, **kw)),
        ("schulman_agreement", lambda: checks.check_schulman_agreement(req, k_max=rc["k_max"], **kw)),
        ("hermiticity", lambda: checks.check_hermiticity(req, **kw)),
        ("boundary_condition_a", lambda: checks.check_boundary_condition(flux, cfg, mode, x0, "a", **kw)),
        ("boundary_condition_b", lambda: checks.check_boundary_condition(flux, cfg, mode, x0, "b", **kw)),
        ("vortex_boundary_value", lambda: checks.check_vortex_boundary_value(flux, cfg, mode, x0, "a")),
        ("pde_residual", lambda: checks.check_pde_residual(pde_req, **kw)),
    ]


def _suite_semigroup(rc: dict, tol) -> list:
    kw = {} if tol is None else {"tolerance": tol}
    req = PropagatorRequest((0.9, 0.5), (-0.4, 0.8), rc["mode"], rc["flux"],
                            rc["cfg"], n_max=min(rc["n_max"], 2),
                            quad=QuadratureSpec(rel_tol=1e-5, abs_tol=1e-10))
    return [("chapman_kolmogorov",
             lambda: checks.check_chapman_kolmogorov(req, grid_count=20, **kw))]


_SUITES = {
    "identities": _suite_identities,
    "kernel": _suite_kernel,
    "semigroup": _suite_semigroup,
}


def _resolve_suites(selection) -> list:
    if isinstance(selection, str):
        selection = [selection]
    if not isinstance(selection, list) or not all(isinstance(s, str) for s in selection):
        raise ConfigError("verify.suite", f"expected a suite name or list, got {selection!r}")
    names: list = []
    for s in selection:
        if s == "none":
            continue
        if s == "all":
            names.extend(k for k in _SUITES if k not in names)
        elif s in _SUITES:
            if s not in names:
                names.append(s)
        else:
            raise ConfigError("verify.suite", f"unknown suite {s!r} "
                              f"(choose from {sorted(_SUITES)}, all, none)")
    return names


def run_verify(rc: dict, raw: dict, sink, tol=None) -> int:
    selection = _value(raw, "verify", "suite", "identities")
    names = _resolve_suites(selection)
    if tol is None and "tolerance" in raw.get("verify", {}):
        tol = _number(raw, "verify", "tolerance", None, positive=True)
    reports = []
    for name in names:
        for label, thunk in _SUITES[name](rc, tol):
            try:
                reports.append(thunk())
            except Exception as exc:  # independent checks: report, move on
                reports.append(checks.CheckReport(
                    label, math.inf, 0.0, False, {"error": str(exc)}))
    for rep in reports:
        status = "pass" if rep.passed else "FAIL"
        print(f"{status}  {rep.name}  discrepancy={rep.discrepancy:.3e} "
              f"tolerance={rep.tolerance:.3e}", file=sys.stderr)
    passed = all(r.passed for r in reports)
    print(f"verify: {sum(r.passed for r in reports)}/{len(reports)} checks passed",
          file=sys.stderr)
    bundle = {
        "schema": SCHEMA_VERIFY,
        "suites": names,
        "checks": [_jsonable(r.as_dict()) for r in reports],
        "passed": passed,
    }
    sink.write(json.dumps(bundle, sort_keys=True, indent=2) + "\n")
    return 0 if passed else 1


# ----------------------------------------------------------------- bench

def run_bench(rc: dict, sink) -> int:
    cfg, flux, mode = rc["cfg"], rc["flux"], rc["mode"]
    x0, x1 = (1.3, 0.6), (0.4, -0.9)
    timings = {}

    def timed(label, fn):
        t0 = _time.perf_counter()
        fn()
        timings[label] = _time.perf_counter() - t0

    for n in (1, 2, 3):
        req = PropagatorRequest(x0, x1, mode, flux, cfg, n_max=n, quad=rc["quad"])
        timed(f"closed_formula_nmax{n}", lambda r=req: K_closed(r))
    req2 = PropagatorRequest(x0, x1, mode, flux, cfg, n_max=2, quad=rc["quad"])
    timed("winding_sum_nmax2_k50", lambda: K_schulman_truncated(req2, 50))
    timed("sum_identity_k10000", lambda: checks.check_sum_identity(0.3, 0.5, 0.0))
    timed("integral_identity", lambda: checks.check_integral_identity(0.3, 0.5, 0.0))
    record = {"schema": SCHEMA_BENCH, "timings_s": timings,
              "n_max": rc["n_max"], "quad_rel_tol": rc["quad"].rel_tol}
    sink.write(json.dumps(record, sort_keys=True, indent=2) + "\n")
    return 0


# ------------------------------------------------------------------ main

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="TOML configuration file")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--mode", choices=("euclidean", "rotated"))
    p.add_argument("--phi", type=float, metavar="RAD",
                   help="contour angle for rotated mode, in (0, pi/2]")
    p.add_argument("--nmax", type=int, metavar="N", help="word-length cap")
    p.add_argument("--kmax", type=int, metavar="N", help="winding cap")
    p.add_argument("--tol", type=float, metavar="X", help="quadrature rel_tol")
    p.add_argument("--threads", type=int, default=1, metavar="N",
                   help="worker processes for grid evaluation")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twovortex",
        description="Propagator of a particle in the plane with two magnetic "
                    "flux carriers: point/grid evaluation and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("eval", "evaluate one endpoint pair"),
                      ("grid", "evaluate an arrival grid to CSV"),
                      ("verify", "run verification suites"),
                      ("bench", "representative timings")):
        _add_common(sub.add_parser(name, help=doc))
    args = parser.parse_args(argv)

    try:
        raw = load_config(args.config) if args.config else {}
        # for verify, --tol sets the check tolerance, not the quadrature's
        check_tol = None
        if args.command == "verify":
            check_tol, args.tol = args.tol, None
        rc = build_run_config(raw, args)
        out_path = args.out or _value(raw, "output", "path", None)
        if args.command == "eval":
            # JSON-lines: records append to an existing file
            sink_cm = open(out_path, "a") if out_path else None
        else:
            sink_cm = open(out_path, "w") if out_path else None
        sink = sink_cm if sink_cm is not None else sys.stdout
        try:
            if args.command == "eval":
                code = run_eval(rc, raw, sink)
            elif args.command == "grid":
                code = run_grid(rc, raw, sink, max(1, args.threads))
            elif args.command == "verify":
                code = run_verify(rc, raw, sink, check_tol)
            else:
                code = run_bench(rc, sink)
        finally:
            if sink_cm is not None:
                sink_cm.close()
        return code
    except ConfigError as exc:
        _emit_error("config", exc.key, exc.reason)
        return 2
    except (GeometryError, ValidityDomainError) as exc:
        _emit_error("domain", None, str(exc))
        return 2
    except SimplexNonconvergenceError as exc:
        _emit_error("nonconvergence", None, str(exc))
        return 3


if __name__ == "__main__":
    sys.exit(main())
