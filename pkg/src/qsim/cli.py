"""Command-line entry point.

Usage::

    qsim run <spec.toml|spec.json> [--seed N] [--out DIR] [--set key=value]...
    qsim list

A spec file names one experiment and its parameters::

    name = "modified-innsbruck"
    seed = 42
    [params]
    theta_s = 0.0

``--set`` overrides file values (``--set params.theta_s=0.1`` or the
shorthand ``--set theta_s=0.1`` for parameters; ``--set seed=7`` works too).
Each run writes report.json, a one-page summary.txt, and any pattern CSVs
into the output directory.  Exit codes: 0 success, 2 validation error,
3 numeric failure.  QSIM_THREADS caps internal worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .experiments import REGISTRY, ValidationError, _NUMERIC_ERRORS, run_experiment
from .report import ExperimentReport, atomic_write_text

try:
    import tomllib
except ModuleNotFoundError:          # Python 3.10
    import tomli as tomllib


@dataclass
class ExperimentSpec:
    name: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "."


def load_spec(path: str) -> ExperimentSpec:
    if path.endswith(".json"):
        with open(path, "rb") as fh:
            data = json.load(fh)
    else:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    if not isinstance(data, dict) or "name" not in data:
        raise ValidationError(f"{path}: spec must define an experiment name")
    known = {"name", "seed", "params", "output_dir"}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"{path}: unknown top-level keys {sorted(unknown)}")
    return ExperimentSpec(
        name=str(data["name"]),
        params=dict(data.get("params", {})),
        seed=int(data.get("seed", 0)),
        output_dir=str(data.get("output_dir", ".")),
    )


def _parse_set(expr: str) -> tuple[str, object]:
    if "=" not in expr:
        raise ValidationError(f"--set expects key=value, got {expr!r}")
    key, raw = expr.split("=", 1)
    key = key.strip()
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw  # bare string
    return key, value


def apply_overrides(spec: ExperimentSpec, pairs: list[str]) -> ExperimentSpec:
    for expr in pairs:
        key, value = _parse_set(expr)
        if key == "seed":
            spec.seed = int(value)
        elif key == "name":
            spec.name = str(value)
        elif key == "output_dir":
            spec.output_dir = str(value)
        elif key.startswith("params."):
            spec.params[key[len("params."):]] = value
        else:
            spec.params[key] = value
    return spec


def _summary_lines(report: ExperimentReport) -> list[str]:
    lines = [f"experiment: {report.name}",
             f"seed: {report.seed}",
             f"version: {report.version}",
             ""]
    for key, val in sorted(report.results.items()):
        if isinstance(val, (int, float, bool, str)):
            lines.append(f"{key} = {val}")
    if report.pattern_files:
        lines.append("")
        lines.append("pattern files: " + ", ".join(report.pattern_files))
    return lines


def cmd_run(args) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    if args.out is not None:
        spec.output_dir = args.out
    apply_overrides(spec, args.set or [])
    os.makedirs(spec.output_dir, exist_ok=True)
    report = run_experiment(spec.name, spec.params, spec.seed, spec.output_dir)
    report.timestamp = datetime.now(timezone.utc).isoformat()
    report.write(os.path.join(spec.output_dir, "report.json"))
    atomic_write_text(os.path.join(spec.output_dir, "summary.txt"),
                      "\n".join(_summary_lines(report)) + "\n")
    print(f"{spec.name}: wrote report.json"
          + (f" and {len(report.pattern_files)} pattern file(s)"
             if report.pattern_files else "")
          + f" to {spec.output_dir}")
    return 0


def cmd_list(args) -> int:
    width = max(len(name) for name in REGISTRY)
    for name, defn in REGISTRY.items():
        print(f"{name:<{width}}  {defn.description}")
    print(f"\n{len(REGISTRY)} experiments registered")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment from a spec file")
    run_p.add_argument("spec", help="TOML or JSON experiment spec")
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override spec values (repeatable)")
    run_p.set_defaults(func=cmd_run)
    list_p = sub.add_parser("list", help="list registered experiments")
    list_p.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"write failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
