"""Figure rendering for the simulation CSV outputs."""

from .render import FigureSpec, RenderInfo, SchemaError, render

__version__ = "0.1.0"
