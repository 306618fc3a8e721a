"""qsim-plot: render figures from job files.

A job file (TOML) describes one or more figures::

    [[job]]
    input = "out/singles_focal_filtered.csv"   # or a list of CSVs
    kind = "fringes"                           # fringes | visibility_sweep |
    out = "figures/focal.png"                  # complementarity | decay
    title = "Filtered singles"

A single-job file may also put the same keys at the top level.
"""

from __future__ import annotations

import argparse
import sys

from .csvio import CsvFormatError
from .render import KINDS, PlotJob, UnknownKindError, render

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib


def load_jobs(path: str) -> list[PlotJob]:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    raw_jobs = data.get("job")
    if raw_jobs is None:
        raw_jobs = [data]
    jobs = []
    for raw in raw_jobs:
        known = {"input", "kind", "out", "title", "xlabel", "ylabel"}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"{path}: unknown job keys {sorted(unknown)}")
        for key in ("input", "kind", "out"):
            if key not in raw:
                raise ValueError(f"{path}: job needs {key!r}")
        jobs.append(PlotJob(inputs=raw["input"], kind=raw["kind"],
                            out=raw["out"], title=raw.get("title", ""),
                            xlabel=raw.get("xlabel", ""),
                            ylabel=raw.get("ylabel", "")))
    return jobs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="qsim-plot", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("jobfile", help="TOML job description")
    args = parser.parse_args(argv)
    try:
        jobs = load_jobs(args.jobfile)
        for job in jobs:
            result = render(job)
            print(f"{job.kind}: wrote {result.out}")
    except (CsvFormatError, UnknownKindError, ValueError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
