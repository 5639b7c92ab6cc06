"""The four figure kinds, as pure transforms from loaded tables to
matplotlib figures.

Nothing here recomputes model quantities; every plotted number is read
from the CSV, so the drawn series equal the file contents exactly.
Rendering is deterministic: fixed figure size, fixed style, no clock or
RNG input, and SVG output carries no timestamp.
"""
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "homlearn-plots"

import matplotlib.pyplot as plt

from .csvdata import PlotDataError, Table, load_table

FIGSIZE = (7.0, 4.5)
# label of the marked crossing cost; tests locate the line by it
CBAR_LABEL = r"$\bar c$"


@dataclass(frozen=True)
class FigureSpec:
    """One render request: where to read, what to draw, where to write."""
    source: str
    kind: str
    out: str
    xlabel: str | None = None
    ylabel: str | None = None


def _marker(n_points: int) -> str | None:
    # a one-point series with no marker would be invisible
    return "o" if n_points == 1 else None


def _direction(ys: list[float]) -> str:
    if len(ys) < 2 or ys[-1] == ys[0]:
        return ""
    return " (rising)" if ys[-1] > ys[0] else " (falling)"


def plot_crossing(table: Table, xlabel: str | None = None,
                  ylabel: str | None = None):
    """One steady-state curve per green degree, against green homophily.

    No vertical marker is drawn: the flip between falling and rising
    curves happens across degrees, not at any homophily value, so the
    legend carries that note instead.
    """
    table.require(("h_g", "d_g", "g1_star"))
    hg, dg, g1 = table.col("h_g"), table.col("d_g"), table.col("g1_star")
    degrees: list[float] = []
    for d in dg:
        if d not in degrees:
            degrees.append(d)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for d in degrees:
        xs = [x for x, dd in zip(hg, dg) if dd == d]
        ys = [y for y, dd in zip(g1, dg) if dd == d]
        ax.plot(xs, ys, marker=_marker(len(xs)),
                label=f"$d_g = {d:g}$" + _direction(ys))
    ax.set_xlabel(xlabel or "green homophily $h_g$")
    ax.set_ylabel(ylabel or "green steady-state risky share $g^*(1)$")
    ax.legend(title="direction flips at the degree\n"
                    "threshold $\\bar d$, not at any $h_g$")
    fig.tight_layout()
    return fig


def plot_homophily_curves(table: Table, xlabel: str | None = None,
                          ylabel: str | None = None):
    """Own-group link shares against the cost the observed friend carries.

    Draws the population-share reference line(s) and marks the crossing
    cost with a vertical line at the row the table flags.  A table with
    no flagged row (the producer found no monotone crossing) gets bare
    curves with the annotation suppressed.
    """
    table.require(("c", "h_gc", "h_bc", "lambda_g", "lambda_b",
                   "cbar_flag"))
    cost = table.col("c")
    mk = _marker(len(table))
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(cost, table.col("h_gc"), color="tab:green", marker=mk,
            label="$h_{g,c}$ (green links)")
    ax.plot(cost, table.col("h_bc"), color="tab:blue", marker=mk,
            label="$h_{b,c}$ (blue links)")
    lam_g, lam_b = table.col("lambda_g")[0], table.col("lambda_b")[0]
    if lam_g == lam_b:
        ax.axhline(lam_g, color="0.5", linestyle="--", linewidth=1.0,
                   label=r"$\lambda$")
    else:
        ax.axhline(lam_g, color="tab:green", linestyle="--",
                   linewidth=1.0, alpha=0.6, label=r"$\lambda_g$")
        ax.axhline(lam_b, color="tab:blue", linestyle="--",
                   linewidth=1.0, alpha=0.6, label=r"$\lambda_b$")
    flagged = [c for c, f in zip(cost, table.col("cbar_flag")) if f != 0.0]
    if flagged:
        ax.axvline(flagged[0], color="0.3", linestyle=":",
                   linewidth=1.2, label=CBAR_LABEL)
    ax.set_xlabel(xlabel or "cost carried by the observed friend")
    ax.set_ylabel(ylabel or "own-group share of links")
    ax.legend()
    fig.tight_layout()
    return fig


def plot_trajectory(table: Table, xlabel: str | None = None,
                    ylabel: str | None = None):
    """All four risky-action shares over generations.

    Solid lines for the good-payoff path, dashed for the bad one, green
    and blue per group.
    """
    table.require(("t", "g0", "g1", "b0", "b1"))
    t = table.col("t")
    mk = _marker(len(table))
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for name, color, style, label in (
            ("g1", "tab:green", "-", "$g_t(1)$"),
            ("g0", "tab:green", "--", "$g_t(0)$"),
            ("b1", "tab:blue", "-", "$b_t(1)$"),
            ("b0", "tab:blue", "--", "$b_t(0)$")):
        ax.plot(t, table.col(name), color=color, linestyle=style,
                marker=mk, label=label)
    ax.set_xlabel(xlabel or "generation $t$")
    ax.set_ylabel(ylabel or "risky-action share")
    ax.legend()
    fig.tight_layout()
    return fig


def plot_abm_gap(table: Table, xlabel: str | None = None,
                 ylabel: str | None = None):
    """Largest per-generation deviation of the finite simulation from its
    deterministic limit."""
    table.require(("t", "gap"))
    t, gap = table.col("t"), table.col("gap")
    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(t, gap, color="tab:red", marker=_marker(len(t)),
            label="largest share deviation")
    ax.set_ylim(bottom=0.0)
    ax.set_xlabel(xlabel or "generation $t$")
    ax.set_ylabel(ylabel or "simulation vs limit gap")
    ax.legend()
    fig.tight_layout()
    return fig


KINDS = {
    "crossing": plot_crossing,
    "homophily-curves": plot_homophily_curves,
    "trajectory": plot_trajectory,
    "abm-gap": plot_abm_gap,
}


def render(spec: FigureSpec) -> list[str]:
    """Load the table, draw the figure, write PNG and SVG.

    spec.out may carry either extension or none; both files are written
    beside each other.  Returns the written paths.
    """
    if spec.kind not in KINDS:
        raise PlotDataError(f"unknown figure kind {spec.kind!r}")
    table = load_table(spec.source)
    fig = KINDS[spec.kind](table, xlabel=spec.xlabel, ylabel=spec.ylabel)
    base = spec.out
    for ext in (".png", ".svg"):
        if base.endswith(ext):
            base = base[:-len(ext)]
    written = []
    try:
        fig.savefig(base + ".png", dpi=150)
        written.append(base + ".png")
        fig.savefig(base + ".svg", metadata={"Date": None})
        written.append(base + ".svg")
    finally:
        plt.close(fig)
    return written
