"""Figure rendering for the simulator's CSV artifacts."""

__version__ = "0.1.0"

from .render import FIGURE_IDS, FigureSpec, default_inputs, render
from .schemas import SchemaError, load_table

__all__ = [
    "FIGURE_IDS",
    "FigureSpec",
    "SchemaError",
    "default_inputs",
    "load_table",
    "render",
]
