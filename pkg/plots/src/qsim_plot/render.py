"""Figure rendering for the four table kinds the simulator emits.

This layer contains no physics: analytic overlays are re-evaluated purely
from each file's metadata, using the shared contract

    fringe          mean * (1 + amplitude * cos(phase + 2*pi*z/period_m))
    abs_cos_2theta  abs(cos(2*theta))
    circle          residual against coherence^2 + entanglement^2 == 1
    decay           4 * 2**(-n)

so the residual annotated on a figure reproduces, bit for bit, the
``analytic_residual`` the producer recorded in the file.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import CsvTable, read_table

KINDS = ("fringes", "visibility_sweep", "complementarity", "decay")

_FIGSIZE = (7.0, 4.2)
_DPI = 120


class UnknownKindError(ValueError):
    pass


@dataclass(frozen=True)
class PlotJob:
    """One figure: input CSV(s), figure kind, output image path."""

    inputs: tuple[str, ...]
    kind: str
    out: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""

    def __init__(self, inputs, kind: str, out: str, title: str = "",
                 xlabel: str = "", ylabel: str = ""):
        if isinstance(inputs, (str, os.PathLike)):
            inputs = (str(inputs),)
        inputs = tuple(str(p) for p in inputs)
        if not inputs:
            raise ValueError("PlotJob needs at least one input CSV")
        for p in inputs:
            if not os.path.exists(p):
                raise FileNotFoundError(p)
        if kind not in KINDS:
            raise UnknownKindError(f"unknown plot kind {kind!r}; use one of {KINDS}")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "out", str(out))
        object.__setattr__(self, "title", title)
        object.__setattr__(self, "xlabel", xlabel)
        object.__setattr__(self, "ylabel", ylabel)


@dataclass
class RenderResult:
    """Where the figure went plus the annotation values drawn on it."""

    out: str
    annotations: dict = field(default_factory=dict)


def fmt_residual(value: float) -> str:
    return format(float(value), ".3g")


def _fringe_overlay(table: CsvTable) -> np.ndarray:
    z = table.floats("z_m")
    mean = table.meta_float("analytic_mean")
    amplitude = table.meta_float("analytic_amplitude")
    phase = table.meta_float("analytic_phase", 0.0)
    period = table.meta_float("analytic_period_m")
    return mean * (1.0 + amplitude * np.cos(phase + 2.0 * np.pi * z / period))


def _render_fringes(job: PlotJob, ax) -> dict:
    notes = {}
    for path in job.inputs:
        table = read_table(path)
        z = table.floats("z_m") * 1e3          # millimetres read better
        label = str(table.metadata.get("label", os.path.basename(path)))
        ax.plot(z, table.floats("intensity"), lw=1.2, label=label)
        vis = table.meta_float("visibility", 0.0)
        note = f"{label}: visibility {vis:.2f}"
        if "analytic" in table.metadata:
            overlay = _fringe_overlay(table)
            ax.plot(z, overlay, ls="--", lw=0.9, color="k", alpha=0.6)
            residual = float(np.abs(table.floats("intensity") - overlay).max())
            note += f", residual {fmt_residual(residual)}"
            notes[label] = {"visibility": vis, "residual": residual,
                            "residual_text": fmt_residual(residual)}
        else:
            notes[label] = {"visibility": vis}
        ax.text(0.02, 0.96 - 0.07 * len(notes), note, transform=ax.transAxes,
                fontsize=8, va="top")
    ax.set_xlabel(job.xlabel or "screen position z [mm]")
    ax.set_ylabel(job.ylabel or "intensity [model units]")
    ax.legend(fontsize=8, loc="upper right")
    return notes


def _render_visibility_sweep(job: PlotJob, ax) -> dict:
    notes = {}
    for path in job.inputs:
        table = read_table(path)
        theta = table.floats("theta_s_rad")
        vis = table.floats("visibility")
        ax.plot(theta, vis, "o", ms=3, label="measured visibility")
        overlay = np.abs(np.cos(2.0 * theta))
        ax.plot(theta, overlay, "k--", lw=1.0, label="|cos 2θ|")
        residual = float(np.abs(vis - overlay).max())
        notes[os.path.basename(path)] = {"residual": residual,
                                         "residual_text": fmt_residual(residual)}
        ax.text(0.35, 0.9, f"max residual {fmt_residual(residual)}",
                transform=ax.transAxes, fontsize=8)
    ax.axvline(np.pi / 4, color="gray", lw=0.6, ls=":")
    ax.set_xlabel(job.xlabel or "spreading angle θ [rad]")
    ax.set_ylabel(job.ylabel or "fringe visibility")
    ax.legend(fontsize=8)
    return notes


def _render_complementarity(job: PlotJob, ax) -> dict:
    notes = {}
    for path in job.inputs:
        table = read_table(path)
        theta = table.floats("theta_rad")
        c = table.floats("coherence")
        e = table.floats("entanglement")
        ax.plot(theta, c, "o", ms=3, label="coherence")
        ax.plot(theta, e, "s", ms=3, label="entanglement")
        ax.plot(theta, np.cos(theta), "k--", lw=0.9)
        ax.plot(theta, np.sin(theta), "k--", lw=0.9)
        residual = float(np.abs(c**2 + e**2 - 1.0).max())
        notes[os.path.basename(path)] = {"residual": residual,
                                         "residual_text": fmt_residual(residual)}
        ax.text(0.3, 0.5, f"max |C²+E²-1| = {fmt_residual(residual)}",
                transform=ax.transAxes, fontsize=8)
    ax.set_xlabel(job.xlabel or "coupling angle θ [rad]")
    ax.set_ylabel(job.ylabel or "C, E")
    ax.legend(fontsize=8)
    return notes


def _render_decay(job: PlotJob, ax) -> dict:
    notes = {}
    for path in job.inputs:
        table = read_table(path)
        n = table.floats("n")
        p = table.floats("detect_prob")
        ax.semilogy(n, p, "o", ms=4, base=2, label="detection weight")
        overlay = 4.0 * 2.0 ** (-n)
        ax.semilogy(n, overlay, "k--", lw=1.0, base=2, label="4·2⁻ⁿ")
        residual = float(np.abs(p - overlay).max())
        slope = float(np.polyfit(n, np.log2(p), 1)[0])
        notes[os.path.basename(path)] = {
            "residual": residual, "residual_text": fmt_residual(residual),
            "log2_slope": slope}
        ax.text(0.45, 0.85, f"log2 slope {slope:.3f}\nmax residual "
                            f"{fmt_residual(residual)}",
                transform=ax.transAxes, fontsize=8)
    ax.set_xlabel(job.xlabel or "register size n")
    ax.set_ylabel(job.ylabel or "detection weight")
    ax.legend(fontsize=8)
    return notes


_RENDERERS = {
    "fringes": _render_fringes,
    "visibility_sweep": _render_visibility_sweep,
    "complementarity": _render_complementarity,
    "decay": _render_decay,
}


def render(job: PlotJob) -> RenderResult:
    """Draw one deterministic figure; inputs are never written to."""
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    try:
        notes = _RENDERERS[job.kind](job, ax)
        if job.title:
            ax.set_title(job.title)
        fig.tight_layout()
        out_dir = os.path.dirname(os.path.abspath(job.out))
        os.makedirs(out_dir, exist_ok=True)
        fig.savefig(job.out, dpi=_DPI)
    finally:
        plt.close(fig)
    return RenderResult(out=job.out, annotations=notes)
