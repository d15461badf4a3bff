"""Static report figures rendered from leakproof CSV outputs."""

__version__ = "0.1.0"

from leakproof_figures.core import KINDS, FigureSpec, SchemaError, render

__all__ = ["KINDS", "FigureSpec", "SchemaError", "render", "__version__"]
