"""Command line interface: run / list / validate.

Exit codes: 0 when every slack is above -tolerance, 2 when any report
is violated, 3 when the scenario itself is invalid.  Reports are
byte-stable across runs: numbers serialize as shortest round-trip
decimals and wall-clock timing goes to stderr only.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .errors import CasoratiqError, SceneValidationError
from .scenes import (
    builtin_names,
    builtin_scenario,
    evaluate_scenario,
    load_scenario,
    validate_scenario,
)

__all__ = ["main", "report_json", "report_csv"]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def report_json(report) -> str:
    return json.dumps(
        _jsonable(report.as_dict()), sort_keys=True, indent=2, allow_nan=False
    ) + "\n"


def report_csv(report) -> str:
    """CSV of (point, theorem, lhs, rhs, slack); numbers print exactly as in JSON."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["point_index", "point", "theorem_id", "variant", "lhs", "rhs", "slack", "verdict"]
    )
    for p in report.points:
        coords = ";".join(repr(float(v)) for v in p.point)
        for r in p.reports:
            writer.writerow(
                [
                    p.index,
                    coords,
                    r.theorem_id,
                    r.variant,
                    repr(float(r.lhs)),
                    repr(float(r.rhs)),
                    repr(float(r.slack)),
                    r.equality_verdict,
                ]
            )
    return buf.getvalue()


def _cmd_run(args) -> int:
    try:
        scn = load_scenario(args.scenario)
    except SceneValidationError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 3
    tolerances = dict(scn.tolerances)
    for item in args.tolerance or []:
        key, _, value = item.partition("=")
        if key not in ("equality", "residual") or not value:
            print(f"bad --tolerance {item!r} (use equality=V or residual=V)", file=sys.stderr)
            return 3
        tolerances[key] = float(value)
    if tolerances != scn.tolerances:
        import dataclasses

        scn = dataclasses.replace(scn, tolerances=tolerances)
    try:
        report = evaluate_scenario(scn, strict=args.strict)
    except SceneValidationError as e:
        print(f"scene invalid: {e}", file=sys.stderr)
        return 3
    except CasoratiqError as e:
        print(f"evaluation failed: {e}", file=sys.stderr)
        return 3

    text = report_json(report)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report_csv(report))
    print(f"elapsed: {report.elapsed_seconds:.3f}s", file=sys.stderr)

    if report.has_violation():
        return 2
    if args.strict and report.aggregate["point_errors"]:
        return 3
    tol = float(tolerances.get("equality", 1e-8))
    min_slack = report.min_slack()
    if min_slack is not None and min_slack < -tol:
        return 2
    if report.aggregate["point_errors"]:
        return 3
    return 0


def _cmd_list(_args) -> int:
    for name in builtin_names():
        scn = builtin_scenario(name)
        kind = scn.mode if scn.mode == "pointwise" else f"chart/{scn.smap.mode}"
        theorems = ",".join(scn.theorems) if scn.theorems else "residuals-only"
        print(f"{name:28s} {kind:28s} c={scn.c:g}  {theorems}")
    return 0


def _cmd_validate(args) -> int:
    try:
        scn = load_scenario(args.scenario)
        results = validate_scenario(scn)
    except SceneValidationError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return 3
    doc = {
        "scenario": scn.name,
        "points": [p.as_dict() for p in results],
        "valid": all(not p.errors for p in results),
    }
    sys.stdout.write(json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n")
    return 0 if doc["valid"] else 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="casoratiq",
        description="Verify Casorati curvature inequalities on scenario files",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate a scenario and emit a JSON report")
    p_run.add_argument("scenario", help="scenario file path or builtin name")
    p_run.add_argument("-o", "--output", help="write the JSON report here")
    p_run.add_argument("--csv", help="also write a CSV of per-report numbers")
    p_run.add_argument(
        "--strict", action="store_true", help="abort on the first per-point failure"
    )
    p_run.add_argument(
        "--tolerance",
        action="append",
        metavar="K=V",
        help="override a tolerance (equality=V or residual=V)",
    )
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list", help="list builtin scenarios")
    p_list.set_defaults(func=_cmd_list)

    p_val = sub.add_parser("validate", help="check scene invariants only")
    p_val.add_argument("scenario", help="scenario file path or builtin name")
    p_val.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
