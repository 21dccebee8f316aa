"""Command-line front end: ``ftvn <command> --system ... [options]``.

Every command writes one JSON report. Exit status: 0 when the checked
property holds, 1 when it is violated (the report carries a
counterexample), 2 on usage or validation errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import automorphisms, center, core, doubly_stochastic, majorization, reduction
from .errors import FtvnError, NotMajorizedError, OrbitMismatchError, ValidationError
from .instances import InstanceSpec, decreasing_rearrangement, make_system

SCHEMA = 1
COMMANDS = (
    "axioms",
    "commute",
    "center",
    "decompose",
    "automorph-check",
    "orbit-transport",
    "majorize",
    "ds-check",
    "ds-witness",
    "birkhoff",
    "reduce-check",
    "lidskii",
    "rearrange",
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    system: InstanceSpec
    samples: int
    seed: int
    tol: float
    x: Any = None
    y: Any = None
    matrix: Any = None
    witness: bool = False
    output: str | None = None
    jobs: int = 1


@dataclass
class Outcome:
    passed: bool
    max_violation: float = 0.0
    counterexample: dict | None = None
    result: dict | None = None


# -- JSON in and out --------------------------------------------------------------


def parse_element(text: str) -> np.ndarray:
    """Parse a JSON vector or matrix (inline text, or a path to a JSON file)."""
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from None

    def rows_ok(d) -> bool:
        if isinstance(d, bool) or not isinstance(d, (int, float, list)):
            return False
        return all(rows_ok(e) for e in d) if isinstance(d, list) else True

    if not isinstance(data, list) or not data or not rows_ok(data):
        raise ValidationError("expected a nonempty JSON array of numbers or array of arrays")
    if any(isinstance(e, list) for e in data):
        if not all(isinstance(e, list) and all(not isinstance(v, list) for v in e) for e in data):
            raise ValidationError("matrices must be arrays of number arrays")
        if len({len(e) for e in data}) != 1:
            raise ValidationError("matrix rows have different lengths")
    arr = np.array(data, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("non-finite number in input")
    return arr


def parse_system(text: str, dim: int | None) -> InstanceSpec:
    text = text.strip()
    if text.startswith("{") or os.path.isfile(text):
        if not text.startswith("{"):
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed system JSON: {exc}") from None
        if dim is not None and isinstance(data, dict) and "dim" not in data:
            data = dict(data, dim=dim)
        return InstanceSpec.from_dict(data)
    data: dict[str, Any] = {"kind": text}
    if dim is not None:
        data["dim"] = dim
    return InstanceSpec.from_dict(data)


def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        return "null"
    return format(v, ".17g")


def dumps(obj: Any, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits and stable layout."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(e, (list, tuple, dict, np.ndarray)) for e in obj):
            return "[" + ", ".join(dumps(e) for e in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(e, indent + 1) for e in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- commands ---------------------------------------------------------------------------


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"this command requires {flag}")
    return value


def _from_report(r: core.CheckReport, **result) -> Outcome:
    result.setdefault("details", r.details)
    return Outcome(r.passed, r.max_violation, r.counterexample, result)


def cmd_axioms(sys_, cfg: RunConfig) -> Outcome:
    return _from_report(core.check_axioms(sys_, cfg.samples, cfg.seed, cfg.tol, cfg.jobs))


def cmd_commute(sys_, cfg: RunConfig) -> Outcome:
    verdict, rep = core.commute(sys_, _need(cfg.x, "--x"), _need(cfg.y, "--y"), cfg.tol)
    crit = {
        name: {"status": c.status, "defect": c.defect}
        for name, c in (("inner", rep.inner), ("additive", rep.additive), ("isometric", rep.isometric))
    }
    result = {"commute": verdict, "criteria": crit, "consistent": rep.consistent}
    cx = None if verdict else {"x": sys_.element(cfg.x), "y": sys_.element(cfg.y)}
    return Outcome(verdict, rep.inner.defect, cx, result)


def cmd_center(sys_, cfg: RunConfig) -> Outcome:
    desc = {
        "kind": sys_.center.kind,
        "basis": [b.tolist() for b in sys_.center.basis],
        "unit": center.unit_element(sys_),
    }
    if cfg.x is not None:
        x = sys_.element(cfg.x)
        defect = center.center_defect(sys_, x)
        inside = defect <= cfg.tol
        result = {"center": desc, "in_center": inside, "defect": defect}
        if sys_.witness is not None:
            result["orbit_singleton"] = center.orbit_singleton(sys_, x, seed=cfg.seed, tol=cfg.tol)
        return Outcome(inside, defect, None if inside else {"x": x}, result)
    r = center.lineality_check(sys_, cfg.samples, cfg.seed, cfg.tol, cfg.jobs)
    return _from_report(r, center=desc)


def cmd_decompose(sys_, cfg: RunConfig) -> Outcome:
    x_c, x_perp = center.decompose(sys_, _need(cfg.x, "--x"))
    return Outcome(True, 0.0, None, {"x_center": x_c, "x_perp": x_perp, "inner": float(x_c @ x_perp)})


def cmd_automorph_check(sys_, cfg: RunConfig) -> Outcome:
    if cfg.matrix is not None:
        a = cfg.matrix
    else:
        a = automorphisms.automorphism_sampler(sys_, cfg.seed)
    a = automorphisms.as_map(sys_, a)
    r = automorphisms.is_automorphism(sys_, a, cfg.samples, cfg.seed, cfg.tol, cfg.jobs)
    return _from_report(r, matrix=a.matrix)


def cmd_orbit_transport(sys_, cfg: RunConfig) -> Outcome:
    x, y = sys_.element(_need(cfg.x, "--x")), sys_.element(_need(cfg.y, "--y"))
    try:
        a = automorphisms.orbit_transport(sys_, x, y, cfg.tol)
    except OrbitMismatchError as exc:
        cx = {"x": x, "y": y, "lam_x": sys_.lam(x), "lam_y": sys_.lam(y), "error": str(exc)}
        return Outcome(False, sys_.norm_w(sys_.lam(x) - sys_.lam(y)), cx, None)
    return Outcome(True, sys_.norm_v(a(x) - y), None, {"matrix": a.matrix, "meta": a.meta})


def cmd_majorize(sys_, cfg: RunConfig) -> Outcome:
    x, y = sys_.element(_need(cfg.x, "--x")), sys_.element(_need(cfg.y, "--y"))
    v = majorization.majorize_in_v(sys_, x, y, cfg.tol)
    result: dict[str, Any] = {"holds": v.holds, "weak_holds": v.weak_holds, "margin": v.margin}
    if v.witness is not None:
        result["hull_witness"] = v.witness
    if cfg.witness and v.holds:
        pair = reduction.make_reduced_pair(sys_)
        if pair.kind == "sort" and sys_.spec.kind == "rn-down":
            result["witness"] = doubly_stochastic.construct_ds_witness(x, y, cfg.tol)
            result["witness_acts_on"] = "elements"
        elif pair.kind == "sort":
            result["witness"] = doubly_stochastic.construct_ds_witness(sys_.lam(x), sys_.lam(y), cfg.tol)
            result["witness_acts_on"] = "spectra"
    cx = None if v.holds else {"x": x, "y": y, "lam_x": sys_.lam(x), "lam_y": sys_.lam(y)}
    return Outcome(v.holds, max(0.0, -v.margin) if not v.holds else 0.0, cx, result)


def cmd_ds_check(sys_, cfg: RunConfig) -> Outcome:
    d = np.asarray(_need(cfg.matrix, "--matrix"), dtype=float)
    r = doubly_stochastic.is_ds_transform(sys_, d, cfg.samples, cfg.seed, cfg.tol, cfg.jobs)
    result: dict[str, Any] = {"details": r.details}
    if d.shape[0] == d.shape[1]:
        result["ds_matrix"] = doubly_stochastic.is_ds_matrix(d, cfg.tol)
    fixed = doubly_stochastic.ds_fixed_points(sys_, d, cfg.tol)
    result["fixes_center"] = fixed.passed
    passed = r.passed and fixed.passed
    cx = r.counterexample or fixed.counterexample
    return Outcome(passed, max(r.max_violation, fixed.max_violation), cx, result)


def cmd_ds_witness(sys_, cfg: RunConfig) -> Outcome:
    x = np.asarray(_need(cfg.x, "--x"), dtype=float).reshape(-1)
    y = np.asarray(_need(cfg.y, "--y"), dtype=float).reshape(-1)
    try:
        m = doubly_stochastic.construct_ds_witness(x, y, cfg.tol)
    except NotMajorizedError as exc:
        v = majorization.hlp_majorize(x, y, cfg.tol)
        return Outcome(False, -v.margin, {"x": x, "y": y, "margin": v.margin, "error": str(exc)}, None)
    return Outcome(True, float(np.linalg.norm(m @ y - x)), None, {"witness": m})


def cmd_birkhoff(sys_, cfg: RunConfig) -> Outcome:
    m = np.asarray(_need(cfg.matrix, "--matrix"), dtype=float)
    dec = doubly_stochastic.birkhoff_decompose(m, cfg.tol)
    err = float(np.max(np.abs(dec.reconstruct() - m)))
    terms = [{"weight": w, "permutation": p.tolist()} for w, p in dec.terms]
    return Outcome(True, err, None, {"terms": terms, "reconstruction_error": err})


def cmd_reduce_check(sys_, cfg: RunConfig) -> Outcome:
    pair = reduction.make_reduced_pair(sys_)
    r = reduction.check_reduced(pair, cfg.samples, cfg.seed, cfg.tol, cfg.jobs)
    cc = reduction.center_correspondence(pair, max(cfg.tol, 1e-9))
    result = {"kind": pair.kind, "details": r.details, "center_correspondence": cc.passed, "centers": cc.details}
    return Outcome(
        r.passed and cc.passed, max(r.max_violation, cc.max_violation), r.counterexample or cc.counterexample, result
    )


def cmd_lidskii(sys_, cfg: RunConfig) -> Outcome:
    if cfg.x is not None:
        xs = [cfg.x, _need(cfg.y, "--y")]
        v = majorization.lidskii_sum_check(sys_, xs, cfg.tol)
        result = {"holds": v.holds, "weak_holds": v.weak_holds, "margin": v.margin}
        cx = None if v.holds else {"xs": [sys_.element(x) for x in xs]}
        return Outcome(v.holds, 0.0 if v.holds else -v.margin, cx, result)
    return _from_report(majorization.lidskii_campaign(sys_, cfg.samples, cfg.seed, cfg.tol, cfg.jobs))


def cmd_rearrange(sys_, cfg: RunConfig) -> Outcome:
    x = np.asarray(_need(cfg.x, "--x"), dtype=float).reshape(-1)
    r = decreasing_rearrangement(x)
    return Outcome(True, 0.0, None, {"star": r.star, "permutation": r.permutation.tolist()})


HANDLERS: dict[str, Callable[[Any, RunConfig], Outcome]] = {
    "axioms": cmd_axioms,
    "commute": cmd_commute,
    "center": cmd_center,
    "decompose": cmd_decompose,
    "automorph-check": cmd_automorph_check,
    "orbit-transport": cmd_orbit_transport,
    "majorize": cmd_majorize,
    "ds-check": cmd_ds_check,
    "ds-witness": cmd_ds_witness,
    "birkhoff": cmd_birkhoff,
    "reduce-check": cmd_reduce_check,
    "lidskii": cmd_lidskii,
    "rearrange": cmd_rearrange,
}

# commands that work on raw vectors/matrices and need no system
_SYSTEMLESS = {"ds-witness", "birkhoff", "rearrange"}


# -- entry points -----------------------------------------------------------------------


def _default_tol() -> float:
    raw = os.environ.get("FTVN_DEFAULT_TOL")
    if raw is None:
        return core.DEFAULT_TOL
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"FTVN_DEFAULT_TOL={raw!r} is not a number") from None
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftvn", description="Checks and constructions for FTvN systems.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--system", default="rn-down", help="system name or JSON spec (default rn-down)")
    p.add_argument("--dim", type=int, default=None, help="dimension for named systems (default 3)")
    p.add_argument("--samples", type=int, default=1000, help="random samples (default 1000)")
    p.add_argument("--seed", type=int, default=0, help="campaign seed (default 0)")
    p.add_argument("--tol", type=float, default=None, help="tolerance (default $FTVN_DEFAULT_TOL or 1e-8)")
    p.add_argument("--x", default=None, help="first element, JSON array or file")
    p.add_argument("--y", default=None, help="second element, JSON array or file")
    p.add_argument("--matrix", default=None, help="linear map, JSON array of arrays or file")
    p.add_argument("--witness", action="store_true", help="also emit a doubly stochastic witness")
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for campaigns")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    tol = args.tol if args.tol is not None else _default_tol()
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    if not (tol > 0 and math.isfinite(tol)):
        raise UsageError("--tol must be positive")
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    return RunConfig(
        command=args.command,
        system=parse_system(args.system, args.dim),
        samples=args.samples,
        seed=args.seed,
        tol=tol,
        x=None if args.x is None else parse_element(args.x),
        y=None if args.y is None else parse_element(args.y),
        matrix=None if args.matrix is None else parse_element(args.matrix),
        witness=args.witness,
        output=args.output,
        jobs=args.jobs,
    )


def execute(cfg: RunConfig) -> dict:
    """Run one configured command and return the report as a dict."""
    start = time.perf_counter()
    sys_ = None if cfg.command in _SYSTEMLESS else make_system(cfg.system)
    outcome = HANDLERS[cfg.command](sys_, cfg)
    report: dict[str, Any] = {
        "schema": SCHEMA,
        "command": cfg.command,
        "system": None if sys_ is None else cfg.system.to_dict(),
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tolerance": cfg.tol,
        "passed": bool(outcome.passed),
        "max_violation": outcome.max_violation,
    }
    if outcome.counterexample is not None:
        report["counterexample"] = outcome.counterexample
    if outcome.result is not None:
        report["result"] = outcome.result
    report["elapsed_ms"] = int(round((time.perf_counter() - start) * 1000.0))
    return report


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        cfg = config_from_args(args)
        report = execute(cfg)
    except (UsageError, ValidationError) as exc:
        sys.stderr.write(f"ftvn: error: {exc}\n")
        parser.print_usage(sys.stderr)
        return 2
    except FtvnError as exc:
        sys.stderr.write(f"ftvn: error: {exc}\n")
        return 2
    _emit(dumps(report) + "\n", cfg.output)
    return 0 if report["passed"] else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
