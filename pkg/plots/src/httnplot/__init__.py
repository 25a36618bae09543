"""Static figures from decay-sweep CSV logs."""

from .render import PlotJob, SchemaError, load_rows, render_ratio_figure

__version__ = "0.1.0"
