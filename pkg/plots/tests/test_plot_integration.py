"""End-to-end: generate CSVs with the model CLI, then re-draw them.

The first two tests mirror the release checklist's figure-script entry:
the crossing figure's plotted series must equal the sweep CSV exactly,
and the sorting figure must mark the crossing cost at the flagged row.
"""
import csv
import json

import matplotlib.pyplot as plt
import pytest

from figdata import line_by_label, xy
from homlearn_plots import (CBAR_LABEL, load_table, plot_crossing,
                            plot_homophily_curves)
from homlearn_plots.cli import main as plot_main

homlearn_cli = pytest.importorskip("homlearn.cli")

SWEEP_CONFIG = {
    "p": 0.5,
    "green": {"cost": 0.7, "pi": 0.6, "degree": 2, "homophily": 0.5},
    "blue": {"cost": 0.1, "pi": 0.3, "degree": 2, "homophily": 0.5},
    "sweep": {"hg": [i / 10 for i in range(11)], "dg": [1, 2, 4, 8]},
}

SORTING_CONFIG = {
    "multicost": {
        "values": [0.0, 1.0],
        "value_prior": [0.5, 0.5],
        "costs": [0.3, 0.7],
        "cost_probs": {"green": [0.2, 0.8], "blue": [0.8, 0.2]},
    }
}


@pytest.fixture(autouse=True)
def close_figures():
    yield
    plt.close("all")


def run_model_cli(tmp_path, command, config, out_name):
    cfg = tmp_path / f"{command}_config.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / out_name
    assert homlearn_cli.main([command, "--config", str(cfg),
                              "--out", str(out)]) == 0
    return str(out)


def test_crossing_series_match_sweep_csv_exactly(tmp_path):
    path = run_model_cli(tmp_path, "sweep", SWEEP_CONFIG, "sweep.csv")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    ax = plot_crossing(load_table(path)).axes[0]
    assert len(ax.lines) == 4
    for line, want_dg in zip(ax.lines, (1, 2, 4, 8)):
        expect = [(float(r["h_g"]), float(r["g1_star"]))
                  for r in rows if float(r["d_g"]) == want_dg]
        assert xy(line) == ([h for h, _ in expect],
                            [g for _, g in expect])
    # the lone below-threshold degree falls in h_g, the rest rise
    lowest = xy(ax.lines[0])[1]
    highest = xy(ax.lines[3])[1]
    assert lowest[-1] < lowest[0]
    assert highest[-1] > highest[0]


def test_cbar_marked_at_flagged_cost(tmp_path):
    path = run_model_cli(tmp_path, "incidental", SORTING_CONFIG,
                         "incidental.csv")
    ax = plot_homophily_curves(load_table(path)).axes[0]
    cbar = line_by_label(ax, CBAR_LABEL)
    assert list(cbar.get_xdata()) == [0.7, 0.7]
    assert xy(line_by_label(ax, "$h_{g,c}$ (green links)")) == \
        ([0.3, 0.7], [0.2, 0.8])


def test_trajectory_and_gap_render_from_cli_outputs(tmp_path):
    base = {k: SWEEP_CONFIG[k] for k in ("p", "green", "blue")}
    dyn_cfg = dict(base, generations=12)
    traj = run_model_cli(tmp_path, "dynamics", dyn_cfg, "traj.csv")
    assert plot_main(["trajectory", "--in", traj,
                      "--out", str(tmp_path / "traj")]) == 0
    assert (tmp_path / "traj.png").stat().st_size > 0

    abm_cfg = dict(base, seed=3,
                   abm={"n": 500, "generations": 6, "v": 1})
    gaps = run_model_cli(tmp_path, "abm", abm_cfg, "abm.csv")
    assert plot_main(["abm-gap", "--in", gaps,
                      "--out", str(tmp_path / "gap")]) == 0
    assert (tmp_path / "gap.svg").stat().st_size > 0
