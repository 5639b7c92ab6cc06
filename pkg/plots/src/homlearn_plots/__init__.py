"""Figure scripts for the model CLI's CSV outputs.

Pure table-to-image transforms: the drawn series are the file contents,
no model quantity is ever recomputed here.
"""
from .csvdata import (
    EmptyTableError,
    MissingColumnsError,
    PlotDataError,
    Table,
    load_table,
)
from .figures import (
    CBAR_LABEL,
    KINDS,
    FigureSpec,
    plot_abm_gap,
    plot_crossing,
    plot_homophily_curves,
    plot_trajectory,
    render,
)

__all__ = [
    "CBAR_LABEL",
    "EmptyTableError",
    "FigureSpec",
    "KINDS",
    "MissingColumnsError",
    "PlotDataError",
    "Table",
    "load_table",
    "plot_abm_gap",
    "plot_crossing",
    "plot_homophily_curves",
    "plot_trajectory",
    "render",
]
