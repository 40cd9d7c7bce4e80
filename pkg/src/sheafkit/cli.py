"""Command-line entry point tying the analyses together.

Subcommands: ``check``, ``fraction``, ``cohomology``, ``logic``, ``evolve``,
and ``fixtures list``.  Reports are deterministic given inputs (pass
``--no-timings`` to strip wall-clock fields), embed the sha256 digest of the
input file, and name the bundled fixture when one is used.

Exit codes: 0 clean/noncontextual, 10 contextuality detected, 2 invalid
input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import struct
import sys
import time
from fractions import Fraction
from importlib.resources import files
from pathlib import Path

import numpy as np

from . import __version__, dynamics
from .cohomology import obstruction_report
from .ctxlogic import parse_proposition, proposition_to_str, seven_value_of
from .errors import IncompatibleModel, SheafkitError
from .gluing import contextual_fraction, is_noncontextual, sheaf_check
from .presheaf import EmpiricalModel, check_compatibility, model_from_dict, support_of

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CONTEXTUAL = 10

FIXTURE_ALIASES = {"triangle": "triangle_anticorrelated"}
FIXTURE_NAMES = (
    "prbox",
    "bell_uniform",
    "triangle_anticorrelated",
    "deterministic",
    "signalling",
)

FRAME_MAGIC = b"SLAM"
FRAME_VERSION = 1


# ---------------------------------------------------------------------------
# Input resolution and report plumbing.


def resolve_model_arg(arg: str) -> tuple[bytes, str, str | None]:
    """Return (file bytes, display path, bundled fixture name or None)."""
    path = Path(arg)
    if path.exists():
        name = None
        if path.resolve().parent == _fixture_dir_path():
            name = path.stem
        return path.read_bytes(), str(path), name
    name = FIXTURE_ALIASES.get(path.stem, path.stem)
    if name in FIXTURE_NAMES:
        resource = files("sheafkit") / "fixtures" / f"{name}.json"
        return resource.read_bytes(), f"fixtures/{name}.json", name
    raise SheafkitError(f"no such model file or bundled fixture: {arg}")


def _fixture_dir_path() -> Path:
    return Path(str(files("sheafkit") / "fixtures")).resolve()


def load_model_arg(arg: str, mode: str | None) -> tuple[EmpiricalModel, dict]:
    raw, display, fixture = resolve_model_arg(arg)
    data = json.loads(raw.decode())
    if mode is not None:
        data["mode"] = mode
    base = Path(display).parent if Path(display).exists() else None
    model = model_from_dict(data, base_dir=base)
    meta = {
        "path": display,
        "sha256": hashlib.sha256(raw).hexdigest(),
        "fixture": fixture,
    }
    return model, meta


def _jsonable(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        return value
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def make_report(args: argparse.Namespace, subcommand: str, inputs: dict, results: dict,
                started: float) -> dict:
    report = {
        "tool": "sheafkit",
        "version": __version__,
        "subcommand": subcommand,
        "seed": args.seed,
        "inputs": inputs,
        "results": _jsonable(results),
    }
    if not args.no_timings:
        report["timings"] = {"total_s": round(time.perf_counter() - started, 6)}
    return report


def emit(args: argparse.Namespace, report: dict, text: str | None = None) -> None:
    """Write the report in the selected format to stdout or --output."""
    if args.format == "json" or text is None:
        payload = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        payload = text
    if args.output:
        Path(args.output).write_text(payload)
    else:
        sys.stdout.write(payload)


# ---------------------------------------------------------------------------
# Subcommands.


def cmd_check(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model, meta = load_model_arg(args.model, args.mode)
    compat = check_compatibility(model)
    if not compat.ok:
        violations = [
            {
                "pair": list(v.pair),
                "overlap": v.overlap.label(),
                "discrepancy": v.discrepancy,
            }
            for v in compat.violations
        ]
        report = make_report(args, "check", {"model": meta},
                             {"error": "incompatible model", "violations": violations},
                             started)
        emit(args, report, text=f"incompatible model: {len(violations)} violation(s)\n")
        return EXIT_INVALID

    support = support_of(model)
    verdict = sheaf_check(support, node_budget=args.budget_nodes)
    lp = is_noncontextual(model, limit=args.budget_globals, budget=args.budget_pivots)
    results = {
        "compatible": True,
        "noncontextual": lp.noncontextual,
        "logically_contextual": verdict.logically_contextual,
        "strongly_contextual": verdict.strongly_contextual,
        "global_section_unique": verdict.global_section_unique,
        "witnesses": {
            "nonextendable_section": (
                None
                if verdict.nonextendable_section is None
                else {
                    "context": model.scenario.cover[verdict.nonextendable_section[0]].label(),
                    "section": verdict.nonextendable_section[1].label(),
                }
            ),
            "global_support_section": (
                None
                if verdict.global_support_section is None
                else verdict.global_support_section.as_dict()
            ),
        },
    }
    report = make_report(args, "check", {"model": meta}, results, started)
    lines = [
        "compatible:           yes",
        f"noncontextual:        {'yes' if lp.noncontextual else 'no'}",
        f"logically contextual: {'yes' if verdict.logically_contextual else 'no'}",
        f"strongly contextual:  {'yes' if verdict.strongly_contextual else 'no'}",
    ]
    emit(args, report, text="\n".join(lines) + "\n")
    return EXIT_OK if lp.noncontextual else EXIT_CONTEXTUAL


def cmd_fraction(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model, meta = load_model_arg(args.model, args.mode)
    compat = check_compatibility(model)
    if not compat.ok:
        report = make_report(args, "fraction", {"model": meta},
                             {"error": "incompatible model"}, started)
        emit(args, report, text="incompatible model\n")
        return EXIT_INVALID
    fr = contextual_fraction(model, limit=args.budget_globals, budget=args.budget_pivots)
    weights = {
        "".join(str(o) for o in g.outcomes): w
        for g, w in zip(fr.incidence.columns, fr.weights)
        if w != 0
    }
    results = {
        "noncontextual_fraction": fr.noncontextual_fraction,
        "contextual_fraction": fr.contextual_fraction,
        "weights": weights,
    }
    report = make_report(args, "fraction", {"model": meta}, results, started)
    emit(args, report, text=f"contextual fraction: {fr.contextual_fraction}\n")
    return EXIT_OK if fr.contextual_fraction == 0 else EXIT_CONTEXTUAL


def cmd_cohomology(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model, meta = load_model_arg(args.model, args.mode)
    support = support_of(model)
    rep = obstruction_report(support, threads=args.threads, matrix_limit=args.budget_matrix)
    cover = model.scenario.cover
    rows = [
        {
            "context": cover[e.context_index].label(),
            "section": e.section.label(),
            "vanishes": e.vanishes,
        }
        for e in rep.entries
    ]
    results = {
        "sections": rows,
        "invariants": {
            "h0_rank": rep.invariants.h0_rank,
            "h1_rank": rep.invariants.h1_rank,
            "h1_torsion": list(rep.invariants.h1_torsion),
        },
    }
    report = make_report(args, "cohomology", {"model": meta}, results, started)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["context", "section", "vanishes"])
    for row in rows:
        writer.writerow([row["context"], row["section"], str(row["vanishes"]).lower()])
    text = buf.getvalue() + json.dumps(results["invariants"], sort_keys=True) + "\n"
    emit(args, report, text=text)
    return EXIT_CONTEXTUAL if rep.any_nonvanishing else EXIT_OK


def cmd_logic(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model, meta = load_model_arg(args.model, args.mode)
    prop = parse_proposition(args.prop)
    support = support_of(model)
    classification, prof = seven_value_of(support, prop)
    results = {
        "proposition": proposition_to_str(prop),
        "profile": {ctx.label(): value.name for ctx, value in prof.items()},
        "mode": classification.value.mode,
        "value": classification.value.name,
        "witnesses": {
            value.name: [c.label() for c in ctxs]
            for value, ctxs in classification.witnesses.items()
        },
    }
    report = make_report(args, "logic", {"model": meta}, results, started)
    profile_text = "  ".join(f"{c.label()}:{v.name}" for c, v in prof.items())
    text = f"mode {classification.value.mode} ({classification.value.name})\n{profile_text}\n"
    emit(args, report, text=text)
    return EXIT_OK


def _parse_initial(spec: str, grid: dynamics.Grid, params) -> dynamics.LambdaState:
    kind, _, rest = spec.partition(":")
    fields = [float(v) for v in rest.split(",")] if rest else []
    if kind == "gaussian":
        if len(fields) == 2:
            return dynamics.gaussian_state(grid, params, fields[0], fields[1])
        if len(fields) == 3:
            return dynamics.gaussian_state(grid, params, fields[0], fields[1], fields[2])
    elif kind == "two-gaussian":
        if len(fields) == 2:
            return dynamics.two_gaussian_state(grid, params, fields[0], fields[1])
        if len(fields) == 3:
            return dynamics.two_gaussian_state(grid, params, fields[0], fields[1], fields[2])
    raise SheafkitError(
        f"bad --initial {spec!r}; expected gaussian:mu,sigma0[,p] or two-gaussian:sep,sigma0[,p]"
    )


def _parse_potential(spec: str, grid: dynamics.Grid) -> np.ndarray | None:
    if spec == "free":
        return None
    if spec.startswith("harmonic:"):
        return dynamics.harmonic_potential(grid, float(spec.split(":", 1)[1]))
    path = Path(spec)
    if path.exists():
        values = json.loads(path.read_text())
        return np.asarray(values, dtype=float)
    raise SheafkitError(f"bad --potential {spec!r}; expected free, harmonic:k, or a file")


def write_frame_dump(path: str | Path, frames: list[np.ndarray]) -> None:
    """Binary frame file: 16-byte header (magic, version, n_points, count)."""
    n_points = len(frames[0]) if frames else 0
    header = struct.pack("<4sIII", FRAME_MAGIC, FRAME_VERSION, n_points, len(frames))
    with open(path, "wb") as fh:
        fh.write(header)
        for frame in frames:
            fh.write(np.asarray(frame, dtype="<f8").tobytes())


def read_frame_dump(path: str | Path) -> list[np.ndarray]:
    raw = Path(path).read_bytes()
    magic, version, n_points, count = struct.unpack("<4sIII", raw[:16])
    if magic != FRAME_MAGIC:
        raise SheafkitError(f"{path} is not a frame dump")
    body = np.frombuffer(raw[16:], dtype="<f8")
    return [body[i * n_points : (i + 1) * n_points].copy() for i in range(count)]


def cmd_evolve(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    grid = dynamics.Grid(args.grid_n, args.length)
    potential = _parse_potential(args.potential, grid)

    lam = args.lam
    map_spec = None
    if args.map:
        map_spec = [tuple(p) for p in json.loads(Path(args.map).read_text())]
    if args.sigma is not None:
        probe = dynamics.physical_params(grid, mass=args.mass, hbar=args.hbar)
        lam = dynamics.lambda_from_sigma(args.sigma, probe, map_spec)
    if lam is None:
        raise SheafkitError("pass --lambda or --sigma")
    params = dynamics.physical_params(
        grid, mass=args.mass, hbar=args.hbar, lam=lam, potential=potential
    )
    initial = _parse_initial(args.initial, grid, params)
    window = None
    if args.window:
        lo, hi = (float(v) for v in args.window.split(","))
        window = (lo, hi)
    records, frames = dynamics.evolve(
        initial,
        params,
        grid,
        t_final=args.t_final,
        dt=args.dt,
        record_every=args.record_every,
        window=window,
        visibility_rel_floor=args.vis_rel_floor,
        collect_frames=args.dump is not None,
    )
    if args.dump:
        write_frame_dump(args.dump, frames)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["t", "norm", "mean_x", "width", "visibility"])
    for r in records:
        writer.writerow(
            [f"{r.time:.9g}", f"{r.norm:.12g}", f"{r.mean_x:.12g}",
             f"{r.width:.12g}", f"{r.visibility:.12g}"]
        )
    csv_text = buf.getvalue()
    results = {
        "lambda": lam,
        "records": [
            {
                "t": r.time,
                "norm": r.norm,
                "mean_x": r.mean_x,
                "width": r.width,
                "visibility": r.visibility,
            }
            for r in records
        ],
    }
    report = make_report(args, "evolve", {}, results, started)
    if args.format == "json":
        emit(args, report)
    else:
        emit(args, report, text=csv_text)
    return EXIT_OK


def cmd_fixtures(args: argparse.Namespace) -> int:
    if args.action != "list":
        raise SheafkitError(f"unknown fixtures action {args.action!r}")
    lines = []
    for name in FIXTURE_NAMES:
        resource = files("sheafkit") / "fixtures" / f"{name}.json"
        digest = hashlib.sha256(resource.read_bytes()).hexdigest()[:12]
        lines.append(f"{name}  sha256:{digest}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing.


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["rational", "float"], default=None,
                        help="override the model's numeric mode")
    common.add_argument("--output", default=None, help="write the report to a file")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=None,
                        help="seed recorded in the report for reproducibility")
    common.add_argument("--no-timings", action="store_true",
                        help="omit wall-clock timings (byte-identical reruns)")
    common.add_argument("--budget-globals", type=int, default=2**24)
    common.add_argument("--budget-nodes", type=int, default=10**8)
    common.add_argument("--budget-pivots", type=int, default=10**6)
    common.add_argument("--budget-matrix", type=int, default=10**8)

    parser = argparse.ArgumentParser(
        prog="sheafkit", description="contextuality analysis toolkit"
    )
    parser.add_argument("--version", action="version", version=f"sheafkit {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_check = sub.add_parser("check", parents=[common],
                             help="compatibility, gluing, and noncontextuality checks")
    p_check.add_argument("model")
    p_check.add_argument("--format", choices=["json", "csv", "text"], default="json")
    p_check.set_defaults(func=cmd_check)

    p_fraction = sub.add_parser("fraction", parents=[common],
                                help="noncontextual/contextual fraction (exact LP)")
    p_fraction.add_argument("model")
    p_fraction.add_argument("--format", choices=["json", "csv", "text"], default="json")
    p_fraction.set_defaults(func=cmd_fraction)

    p_coh = sub.add_parser("cohomology", parents=[common],
                           help="per-section obstruction verdicts and invariants")
    p_coh.add_argument("model")
    p_coh.add_argument("--format", choices=["json", "csv", "text"], default="json")
    p_coh.set_defaults(func=cmd_cohomology)

    p_logic = sub.add_parser("logic", parents=[common],
                             help="seven-valued classification of a proposition")
    p_logic.add_argument("model")
    p_logic.add_argument("--format", choices=["json", "csv", "text"], default="json")
    p_logic.add_argument("--prop", required=True,
                         help="proposition, e.g. '(x=0 & y=0) | (x=1 & y=1)'")
    p_logic.set_defaults(func=cmd_logic)

    p_evolve = sub.add_parser("evolve", parents=[common],
                              help="integrate the lambda-interpolated dynamics")
    p_evolve.add_argument("--format", choices=["json", "csv", "text"], default="csv")
    p_evolve.add_argument("--lambda", dest="lam", type=float, default=None)
    p_evolve.add_argument("--sigma", type=float, default=None)
    p_evolve.add_argument("--map", default=None, help="JSON [[sigma,lambda],...] table")
    p_evolve.add_argument("--mass", type=float, default=1.0)
    p_evolve.add_argument("--hbar", type=float, default=None)
    p_evolve.add_argument("--grid-n", type=int, default=512)
    p_evolve.add_argument("--length", type=float, default=16.0)
    p_evolve.add_argument("--dt", type=float, default=1.5e-4)
    p_evolve.add_argument("--t-final", type=float, default=1.0)
    p_evolve.add_argument("--potential", default="free")
    p_evolve.add_argument("--initial", default="gaussian:0,0.5")
    p_evolve.add_argument("--record-every", type=int, default=100)
    p_evolve.add_argument("--window", default=None, help="visibility window 'lo,hi'")
    p_evolve.add_argument("--vis-rel-floor", type=float, default=0.0)
    p_evolve.add_argument("--dump", default=None, help="binary density-frame dump path")
    p_evolve.set_defaults(func=cmd_evolve)

    p_fix = sub.add_parser("fixtures", parents=[common], help="bundled fixture library")
    p_fix.add_argument("action", choices=["list"])
    p_fix.add_argument("--format", choices=["json", "csv", "text"], default="text")
    p_fix.set_defaults(func=cmd_fixtures)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IncompatibleModel as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except SheafkitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except (json.JSONDecodeError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
