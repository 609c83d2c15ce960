"""Rendering of tmdl CSV outputs into publication-style figures."""

__version__ = "0.1.0"

from .render import PlotSpec, render

__all__ = ["PlotSpec", "render", "__version__"]
