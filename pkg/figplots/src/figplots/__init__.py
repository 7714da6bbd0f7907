"""Batch figure rendering for the orbit-heights experiment CSVs."""

from .render import KINDS, PlotJob, SchemaError, read_csv_columns, render

__version__ = "0.1.0"
