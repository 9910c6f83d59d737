"""Batch figure rendering over run artifacts (CSV series, histograms, fits)."""

from .render import FigureRequest, PlotError, render

__version__ = "0.1.0"

__all__ = ["FigureRequest", "PlotError", "render", "__version__"]
