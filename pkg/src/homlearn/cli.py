"""Command-line front end: config parsing, dispatch, CSV/JSON emission.

Outputs are deterministic down to the byte: floats carry 17 significant
digits, lines end with '\\n', and files are written to a temp name then
renamed.  Exit codes: 0 all computations converged, 2 configuration or
model errors, 3 solver non-convergence, 4 I/O failures.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

from . import equilibrium
from .abm import HIGH, ZERO, GROUPS, SimConfig, run_abm
from .dynamics import StepRegime, check_simplified_applicable, \
    default_initial_state, general_step, iterate, simplified_fixed_point
from .equilibrium import Sign, Stability, classify_stability, \
    full_homophily_steady_states, find_steady_states, jacobian_v1
from .multicost import CostValueModel, colorblind_pch_friend_dist, \
    homophily_by_cost, validate_cost_value_model, verify_complete_learning, \
    with_colorblind_pch
from .params import Group, GroupParams, ModelParams, ParamError, RegimeError, \
    StateVector, sup_distance, validate_params, validate_state

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3
EXIT_IO = 4

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 10 ** 6
DEFAULT_GENERATIONS = 10 ** 4
DEFAULT_ABM_N = 10 ** 5
DEFAULT_ABM_GENERATIONS = 30

_DEFAULT_OUT = {
    "dynamics": "dynamics.csv",
    "steady": "steady.json",
    "sweep": "sweep.csv",
    "incidental": "incidental.csv",
    "multicost-verify": "multicost_verify.json",
    "abm": "abm.csv",
}


class ConfigError(ValueError):
    """Configuration problem; the message names the offending field path."""


# === config schema ========================================================

_GROUP_KEYS = {"cost", "pi", "degree", "homophily"}
_SWEEP_KEYS = {"hg", "dg"}
_ABM_KEYS = {"n", "generations", "v"}
_MC_KEYS = {"values", "value_prior", "costs", "lambda_g", "lambda_b",
            "cost_probs", "degrees", "friend_dist"}
_ALIASES = {
    "cg": ("green", "cost"), "cb": ("blue", "cost"),
    "pig": ("green", "pi"), "pib": ("blue", "pi"),
    "dg": ("green", "degree"), "db": ("blue", "degree"),
    "hg": ("green", "homophily"), "hb": ("blue", "homophily"),
}
_TOP_KEYS = {"p", "green", "blue", "regime", "initial", "generations",
             "tol", "max_iter", "seed", "out", "sweep", "abm",
             "multicost"} | set(_ALIASES)


def _check_keys(mapping: dict, allowed: set, path: str) -> None:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path or 'config'} must be an object")
    for key in mapping:
        if key not in allowed:
            full = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key: {full}")


def _validate_shape(cfg: dict) -> None:
    _check_keys(cfg, _TOP_KEYS, "")
    for grp in ("green", "blue"):
        if grp in cfg:
            _check_keys(cfg[grp], _GROUP_KEYS, grp)
    if "sweep" in cfg:
        _check_keys(cfg["sweep"], _SWEEP_KEYS, "sweep")
    if "abm" in cfg:
        _check_keys(cfg["abm"], _ABM_KEYS, "abm")
    if "multicost" in cfg:
        _check_keys(cfg["multicost"], _MC_KEYS, "multicost")
        for sub in ("cost_probs", "degrees"):
            if sub in cfg["multicost"]:
                _check_keys(cfg["multicost"][sub], {"green", "blue"},
                            f"multicost.{sub}")
    for alias, (grp, field) in _ALIASES.items():
        if alias in cfg and field in cfg.get(grp, {}):
            raise ConfigError(
                f'conflicting config keys: "{alias}" and "{grp}.{field}"')


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


class RunConfig:
    """Merged file + flag configuration with defaults applied."""

    def __init__(self, raw: dict):
        self.raw = raw
        self.tol = _as_number(raw.get("tol", DEFAULT_TOL), "tol")
        self.max_iter = _as_int(raw.get("max_iter", DEFAULT_MAX_ITER), "max_iter")
        self.generations = _as_int(raw.get("generations", DEFAULT_GENERATIONS),
                                   "generations")
        if self.generations < 0:
            raise ConfigError("generations: must be >= 0")
        self.seed = _as_int(raw.get("seed", 0), "seed")
        self.out = raw.get("out")
        self.regime = None
        if "regime" in raw:
            try:
                self.regime = StepRegime(raw["regime"])
            except ValueError:
                names = ", ".join(r.value for r in StepRegime)
                raise ConfigError(f"regime: must be one of {names}") from None

    def model_params(self) -> ModelParams:
        groups = {}
        for grp in ("green", "blue"):
            block = self.raw.get(grp, {})
            for field in _GROUP_KEYS:
                if field not in block:
                    raise ConfigError(f"missing required config key: {grp}.{field}")
            degree = _as_int(block["degree"], f"{grp}.degree")
            groups[grp] = GroupParams(
                cost=_as_number(block["cost"], f"{grp}.cost"),
                pi=_as_number(block["pi"], f"{grp}.pi"),
                degree=degree,
                homophily=_as_number(block["homophily"], f"{grp}.homophily"))
        if "p" not in self.raw:
            raise ConfigError("missing required config key: p")
        params = ModelParams(p=_as_number(self.raw["p"], "p"),
                             green=groups["green"], blue=groups["blue"])
        try:
            validate_params(params)
        except ParamError as exc:
            raise ConfigError(str(exc)) from None
        return params

    def initial_state(self, params: ModelParams) -> StateVector:
        if "initial" not in self.raw:
            return default_initial_state(params)
        vec = self.raw["initial"]
        if not (isinstance(vec, list) and len(vec) == 4):
            raise ConfigError("initial: expected a list of four numbers"
                              " [g0, g1, b0, b1]")
        state = StateVector(*(_as_number(x, f"initial[{i}]")
                              for i, x in enumerate(vec)))
        try:
            validate_state(state)
        except ParamError as exc:
            raise ConfigError(f"initial: {exc}") from None
        return state

    def sweep_grids(self) -> tuple[list[float] | None, list[int] | None]:
        block = self.raw.get("sweep", {})
        hg = block.get("hg")
        if hg is not None:
            hg = [_as_number(x, f"sweep.hg[{i}]") for i, x in enumerate(hg)]
        dg = block.get("dg")
        if dg is not None:
            dg = [_as_int(x, f"sweep.dg[{i}]") for i, x in enumerate(dg)]
        return hg, dg

    def abm_config(self, params: ModelParams) -> SimConfig:
        block = self.raw.get("abm", {})
        v = block.get("v", "sample")
        if v not in (0, 1, "sample"):
            raise ConfigError('abm.v: must be 0, 1, or "sample"')
        try:
            return SimConfig(
                params=params,
                n_per_group=_as_int(block.get("n", DEFAULT_ABM_N), "abm.n"),
                generations=_as_int(block.get("generations",
                                              DEFAULT_ABM_GENERATIONS),
                                    "abm.generations"),
                seed=self.seed, v_realization=v)
        except ValueError as exc:
            raise ConfigError(f"abm: {exc}") from None

    def multicost_model(self) -> CostValueModel:
        block = self.raw.get("multicost")
        if block is None:
            raise ConfigError("missing required config section: multicost")
        return _build_multicost(block)


def _parse_type_key(text: str, n_costs: int, path: str) -> tuple[Group, int]:
    parts = text.split("/")
    names = {"green": Group.GREEN, "blue": Group.BLUE}
    if len(parts) == 2 and parts[0] in names and parts[1].isdigit() \
            and int(parts[1]) < n_costs:
        return names[parts[0]], int(parts[1])
    raise ConfigError(f'{path}: expected "green/<cost index>" or '
                      f'"blue/<cost index>", got {text!r}')


def _build_multicost(block: dict) -> CostValueModel:
    for field in ("values", "value_prior", "costs", "cost_probs"):
        if field not in block:
            raise ConfigError(f"missing required config key: multicost.{field}")
    values = tuple(_as_number(x, f"multicost.values[{i}]")
                   for i, x in enumerate(block["values"]))
    prior = tuple(_as_number(x, f"multicost.value_prior[{i}]")
                  for i, x in enumerate(block["value_prior"]))
    costs = tuple(_as_number(x, f"multicost.costs[{i}]")
                  for i, x in enumerate(block["costs"]))
    lam_g = _as_number(block.get("lambda_g", 0.5), "multicost.lambda_g")
    lam_b = _as_number(block.get("lambda_b", 1.0 - lam_g), "multicost.lambda_b")
    cost_probs = {}
    for name, grp in (("green", Group.GREEN), ("blue", Group.BLUE)):
        if name not in block["cost_probs"]:
            raise ConfigError(f"missing required config key: "
                              f"multicost.cost_probs.{name}")
        cost_probs[grp] = tuple(
            _as_number(x, f"multicost.cost_probs.{name}[{i}]")
            for i, x in enumerate(block["cost_probs"][name]))
    deg_block = block.get("degrees", {})
    degrees = {}
    for name, grp in (("green", Group.GREEN), ("blue", Group.BLUE)):
        ds = deg_block.get(name, [2] * len(costs))
        degrees[grp] = tuple(_as_int(x, f"multicost.degrees.{name}[{i}]")
                             for i, x in enumerate(ds))
    model = CostValueModel(values=values, value_prior=prior, costs=costs,
                           lambda_g=lam_g, lambda_b=lam_b,
                           cost_probs=cost_probs, degrees=degrees,
                           friend_dist={})
    if "friend_dist" in block:
        dist = {}
        for src, row in block["friend_dist"].items():
            src_key = _parse_type_key(src, len(costs), "multicost.friend_dist")
            dist[src_key] = {
                _parse_type_key(tgt, len(costs),
                                f"multicost.friend_dist.{src}"):
                _as_number(w, f"multicost.friend_dist.{src}.{tgt}")
                for tgt, w in row.items()}
        model.friend_dist = dist
    else:
        model.friend_dist = colorblind_pch_friend_dist(model)
    try:
        validate_cost_value_model(model)
    except ValueError as exc:
        raise ConfigError(f"multicost: {exc}") from None
    return model


# === deterministic emission ==============================================

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    x = float(x) + 0.0  # normalize negative zero
    return f"{x:.17g}"


def _num(x):
    """Round-trip-safe JSON number: drop negative zero, keep NaN/inf textual."""
    x = float(x) + 0.0
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return x


def write_text_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-homlearn-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    write_text_atomic(path, "\n".join(lines) + "\n")


def write_json(path: str, obj) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# === subcommands ==========================================================

def _cmd_dynamics(cfg: RunConfig, out: str) -> int:
    params = cfg.model_params()
    initial = cfg.initial_state(params)
    regime = cfg.regime or StepRegime.GENERAL
    trajectory = iterate(initial, params, cfg.generations, regime=regime)
    rows = [[t, s.g0, s.g1, s.b0, s.b1]
            for t, s in enumerate(trajectory.states)]
    write_csv(out, ["t", "g0", "g1", "b0", "b1"], rows)
    return EXIT_OK


def _stability_json(stability) -> dict:
    return {
        "tag": stability.tag.capitalize(),
        "spectral_radius": None if stability.spectral_radius is None
        else _num(stability.spectral_radius),
        "probe_outcome": stability.probe_outcome,
        "probe_agrees": stability.probe_agrees,
    }


def _report_json(report) -> dict:
    sens = None
    if report.sensitivity is not None:
        sens = {
            "sign": report.sensitivity.sign,
            "comparator": _num(report.sensitivity.comparator),
            "ift_estimate": None if report.sensitivity.ift_estimate is None
            else _num(report.sensitivity.ift_estimate),
            "fd_estimate": None if report.sensitivity.fd_estimate is None
            else _num(report.sensitivity.fd_estimate),
        }
    return {
        "state": {"g0": _num(report.state.g0), "g1": _num(report.state.g1),
                  "b0": _num(report.state.b0), "b1": _num(report.state.b1)},
        "residual": _num(report.residual),
        "converged": report.converged,
        "iterations": report.iterations,
        "regime": report.regime.tag.value,
        "relabeled": report.relabeled,
        "jacobian": None if report.jacobian is None
        else [[_num(x) for x in row] for row in report.jacobian],
        "stability": _stability_json(report.stability),
        "hg_sensitivity": sens,
        "notes": list(report.notes),
    }


def _cmd_steady(cfg: RunConfig, out: str) -> int:
    params = cfg.model_params()
    full_h = params.green.homophily == 1.0 and params.blue.homophily == 1.0
    if cfg.regime is StepRegime.FULL_HOMOPHILY or full_h:
        groups = {}
        for name, grp in (("green", Group.GREEN), ("blue", Group.BLUE)):
            points = full_homophily_steady_states(params.group(grp), params.p)
            groups[name] = [{
                "g0": _num(pt.g0), "g1": _num(pt.g1),
                "stability": pt.stability.capitalize(),
                "slope": _num(pt.slope),
            } for pt in points]
        write_json(out, {"mode": "full-homophily", "groups": groups})
        return EXIT_OK
    if cfg.regime is StepRegime.SIMPLIFIED_SPLIT:
        state = simplified_fixed_point(params)
        jac = jacobian_v1(state, params, regime=StepRegime.SIMPLIFIED_SPLIT)
        stab = classify_stability(state, params, jac, probe=False,
                                  regime=StepRegime.SIMPLIFIED_SPLIT)
        residual = sup_distance(general_step(state, params), state)
        obj = {
            "mode": "simplified-split",
            "state": {"g0": _num(state.g0), "g1": _num(state.g1),
                      "b0": _num(state.b0), "b1": _num(state.b1)},
            "general_map_residual": _num(residual),
            "applicable": check_simplified_applicable(params, state),
            "stability": _stability_json(stab),
        }
        write_json(out, obj)
        return EXIT_OK
    reports = find_steady_states(params, tol=cfg.tol, max_iter=cfg.max_iter)
    write_json(out, {"mode": "general",
                     "reports": [_report_json(r) for r in reports]})
    if any(not r.converged for r in reports):
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig, out: str) -> int:
    params = cfg.model_params()
    hg, dg = cfg.sweep_grids()
    result = equilibrium.sweep(params, hg_values=hg, dg_values=dg,
                               tol=cfg.tol, max_iter=cfg.max_iter)
    rows = []
    all_converged = True
    for row in result.rows:
        rep = row.report
        all_converged &= rep.converged
        sign = rep.sensitivity.sign if rep.sensitivity is not None else Sign.ZERO
        rows.append([row.hg, row.dg, rep.state.g1, rep.state.b1, rep.state.b0,
                     1 if rep.stability.tag == Stability.STABLE else 0,
                     sign, 1 if rep.converged else 0])
    write_csv(out, ["h_g", "d_g", "g1_star", "b1_star", "b0_star", "stable",
                    "hg_sensitivity_sign", "converged"], rows)
    return EXIT_OK if all_converged else EXIT_NO_CONVERGENCE


def _cmd_incidental(cfg: RunConfig, out: str) -> int:
    model = with_colorblind_pch(cfg.multicost_model())
    table = homophily_by_cost(model)
    rows = []
    for row in table.rows:
        # threshold only meaningful when ratios are monotone in cost
        flagged = table.lr_dominant and row.cost == table.threshold_cost
        rows.append([row.cost, row.ratio, row.green_own, row.blue_own,
                     model.lambda_g, model.lambda_b, 1 if flagged else 0])
    write_csv(out, ["c", "r", "h_gc", "h_bc", "lambda_g", "lambda_b",
                    "cbar_flag"], rows)
    return EXIT_OK


def _cmd_multicost_verify(cfg: RunConfig, out: str) -> int:
    model = cfg.multicost_model()
    verdict = verify_complete_learning(model, seed=cfg.seed)

    def type_name(key):
        return f"{key[0].value}/{key[1]}"

    witness = None
    if verdict.witness is not None:
        obs, tgt, val = verdict.witness
        witness = {"observer": type_name(obs), "observed": type_name(tgt),
                   "straddled_value": _num(val)}
    break_entry = None
    if verdict.break_entry is not None:
        (grp, ci, vi), want, got = verdict.break_entry
        break_entry = {"type": type_name((grp, ci)), "value_index": vi,
                       "complete_learning": _num(want), "one_step": _num(got)}
    write_json(out, {
        "residual": _num(verdict.residual),
        "is_fixed_point": verdict.is_fixed_point,
        "perfect_cost_homophily": verdict.perfect_cost_homophily,
        "witness": witness,
        "probes_total": verdict.probes_total,
        "probes_converged": verdict.probes_converged,
        "stable": verdict.stable,
        "break_entry": break_entry,
    })
    return EXIT_OK


def _cmd_abm(cfg: RunConfig, out: str) -> int:
    params = cfg.model_params()
    sim = cfg.abm_config(params)
    result = run_abm(sim)
    rows = []
    for t, outcome in enumerate(result.outcomes):
        mf = result.meanfield[t]
        row = [t, result.realized_v]
        for grp in GROUPS:
            for cls in (HIGH, ZERO):
                row.append(outcome.fractions[(grp, cls)])
                row.append(outcome.se[(grp, cls)])
        row.append(mf.component(Group.GREEN, result.realized_v))
        row.append(mf.component(Group.BLUE, result.realized_v))
        row.append(result.gaps[t])
        rows.append(row)
    write_csv(out, ["t", "v",
                    "green_high_frac", "green_high_se",
                    "green_zero_frac", "green_zero_se",
                    "blue_high_frac", "blue_high_se",
                    "blue_zero_frac", "blue_zero_se",
                    "mf_green_high", "mf_blue_high", "gap"], rows)
    terminal = result.meanfield[-1]
    write_json(out + ".summary.json", {
        "n_per_group": sim.n_per_group,
        "generations": sim.generations,
        "seed": sim.seed,
        "realized_v": result.realized_v,
        "terminal_gap": _num(result.terminal_gap),
        "max_gap": _num(result.max_gap),
        "meanfield_terminal_green_high": _num(
            terminal.component(Group.GREEN, result.realized_v)),
        "meanfield_terminal_blue_high": _num(
            terminal.component(Group.BLUE, result.realized_v)),
    })
    return EXIT_OK


_DISPATCH = {
    "dynamics": _cmd_dynamics,
    "steady": _cmd_steady,
    "sweep": _cmd_sweep,
    "incidental": _cmd_incidental,
    "multicost-verify": _cmd_multicost_verify,
    "abm": _cmd_abm,
}


# === argument parsing =====================================================

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path")
    common.add_argument("--seed", type=int)
    common.add_argument("--p", type=float)
    for alias in _ALIASES:
        kind = int if alias in ("dg", "db") else float
        common.add_argument(f"--{alias}", type=kind)
    parser = argparse.ArgumentParser(
        prog="homlearn",
        description="Two-group social learning: dynamics, steady states, "
                    "homophily experiments, and finite-population checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _DISPATCH:
        sub.add_parser(name, parents=[common])
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config is not None:
        with open(args.config, "r") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"malformed config file: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
    _validate_shape(raw)
    if args.p is not None:
        raw["p"] = args.p
    for alias, (grp, field) in _ALIASES.items():
        value = getattr(args, alias)
        if value is not None:
            raw.setdefault(grp, {})
            raw.pop(alias, None)
            raw[grp][field] = value
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["out"] = args.out
    for alias in _ALIASES:
        if alias in raw:
            grp, field = _ALIASES[alias]
            raw.setdefault(grp, {})[field] = raw.pop(alias)
    return RunConfig(raw)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"homlearn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"homlearn: {exc}", file=sys.stderr)
        return EXIT_IO
    out = cfg.out or _DEFAULT_OUT[args.command]
    try:
        return _DISPATCH[args.command](cfg, out)
    except (ConfigError, ParamError, RegimeError) as exc:
        print(f"homlearn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"homlearn: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"homlearn: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
