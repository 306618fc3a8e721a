"""Batch figure renderer for the simulator's CSV outputs."""

__version__ = "0.1.0"

from .csvio import CsvFormatError, CsvTable, read_table
from .render import KINDS, PlotJob, RenderResult, UnknownKindError, render

__all__ = ["CsvFormatError", "CsvTable", "read_table", "KINDS", "PlotJob",
           "RenderResult", "UnknownKindError", "render"]
