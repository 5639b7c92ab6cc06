"""Finite-population Monte Carlo cross-check of the mean-field dynamics.

Each generation is a fresh population of N agents per group.  An agent
draws its cost class (high cost with probability pi of its group), samples
d friends from the previous generation (own group with probability h,
uniform within the chosen group), compresses what it sees into a tally,
and acts on the exact posterior.  Beliefs are formed against the
mean-field previous-period fractions, matching the continuum equilibrium
inference; only the sampled observations are finite-N.

Randomness is one root seed split into independent streams per
(generation, group), with every agent's draws a fixed indexed slice of
its group's stream, so results are a pure function of the config and do
not depend on scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import StepRegime, default_initial_state, iterate
from .params import Group, ModelParams, StateVector, validate_params
from .signals import (Action, CostLabel, Outcome, SignalObservation,
                      decide, enumerate_tallies, posterior)

GROUP_INDEX = {Group.GREEN: 0, Group.BLUE: 1}
GROUPS = (Group.GREEN, Group.BLUE)
HIGH = "high"
ZERO = "zero"

# spawn-key group slot for the world-state draw, distinct from both groups
_WORLD_SLOT = 2


@dataclass(frozen=True)
class SimConfig:
    params: ModelParams
    n_per_group: int
    generations: int
    seed: int
    v_realization: int | str = "sample"

    def __post_init__(self):
        validate_params(self.params)
        if not (isinstance(self.n_per_group, int) and self.n_per_group >= 1):
            raise ValueError("n_per_group must be an integer >= 1")
        if not (isinstance(self.generations, int) and self.generations >= 1):
            raise ValueError("generations must be an integer >= 1")
        if self.v_realization not in (0, 1, "sample"):
            raise ValueError('v_realization must be 0, 1, or "sample"')


@dataclass
class GenerationAgents:
    """Realized previous-generation attributes, per group."""

    v: int
    high: dict[Group, np.ndarray]
    risky: dict[Group, np.ndarray]

    def size(self, group: Group) -> int:
        return int(self.high[group].shape[0])


@dataclass
class GenerationOutcome:
    t: int
    fractions: dict[tuple[Group, str], float]
    se: dict[tuple[Group, str], float]
    counts: dict[tuple[Group, str], int]


@dataclass
class AbmResult:
    config: SimConfig
    realized_v: int
    outcomes: list[GenerationOutcome]
    meanfield: list[StateVector]
    gaps: list[float]
    terminal_gap: float = field(init=False)
    max_gap: float = field(init=False)

    def __post_init__(self):
        self.terminal_gap = self.gaps[-1]
        self.max_gap = max(self.gaps)


def _group_rng(seed: int, t: int, group: Group) -> np.random.Generator:
    key = (t, GROUP_INDEX[group])
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _world_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(0, _WORLD_SLOT)))


def realize_v(config: SimConfig) -> int:
    if config.v_realization == "sample":
        return int(_world_rng(config.seed).random() < config.params.p)
    return int(config.v_realization)


def _outcome_for(friend_high: bool, friend_risky: bool, v: int,
                 cost: float) -> Outcome:
    if not friend_risky:
        return Outcome.NONE
    # zero-cost payoff is v >= 0 in both states; a positive cost makes the
    # sign of v - cost informative
    if not friend_high:
        return Outcome.PLUS
    return Outcome.PLUS if v == 1 and cost < 1.0 else Outcome.MINUS


def sample_friends(agent_group: Group, params: ModelParams,
                   previous: GenerationAgents,
                   rng: np.random.Generator) -> list[SignalObservation]:
    """Draw one agent's d observations from the realized previous generation."""
    if previous.size(Group.GREEN) == 0 or previous.size(Group.BLUE) == 0:
        raise ValueError("previous generation is empty")
    gp = params.group(agent_group)
    obs = []
    for _ in range(gp.degree):
        grp = agent_group if rng.random() < gp.homophily else agent_group.other
        idx = int(rng.integers(0, previous.size(grp)))
        f_high = bool(previous.high[grp][idx])
        f_risky = bool(previous.risky[grp][idx])
        if f_high:
            label = CostLabel.COST_G if grp is Group.GREEN else CostLabel.COST_B
        else:
            label = CostLabel.ZERO
        outcome = _outcome_for(f_high, f_risky, previous.v,
                               params.group(grp).cost)
        obs.append(SignalObservation(outcome, label, grp))
    return obs


def _action_table(params: ModelParams, mean_prev: StateVector,
                  observer: Group) -> np.ndarray:
    """Risky-indicator over non-revealing tallies, indexed [n_blue, n_green].

    Posteriors are evaluated at the mean-field previous fractions; tallies
    that are off-path there fall back to the prior-belief default action.
    """
    gp = params.group(observer)
    d = gp.degree
    table = np.zeros((d + 1, d + 1), dtype=bool)
    for tally in enumerate_tallies(d):
        belief = posterior(tally, params, mean_prev, observer)
        if belief is None:
            belief = params.p
        table[tally.n_blue_safe, tally.n_green_safe] = \
            decide(belief, gp.cost) is Action.RISKY
    return table


def _initial_generation(config: SimConfig, v: int) -> tuple[GenerationAgents,
                                                            GenerationOutcome]:
    """Generation 0 has no observations: high-cost agents act on the prior."""
    params = config.params
    high, risky, fr, se, counts = {}, {}, {}, {}, {}
    for grp in GROUPS:
        rng = _group_rng(config.seed, 0, grp)
        gp = params.group(grp)
        h = rng.random(config.n_per_group) < gp.pi
        act = decide(params.p, gp.cost) is Action.RISKY
        r = np.where(h, act, True)
        high[grp], risky[grp] = h, r
        _tabulate(grp, h, r, fr, se, counts)
    return GenerationAgents(v=v, high=high, risky=risky), \
        GenerationOutcome(t=0, fractions=fr, se=se, counts=counts)


def _tabulate(grp: Group, high: np.ndarray, risky: np.ndarray,
              fr: dict, se: dict, counts: dict) -> None:
    for cls, mask in ((HIGH, high), (ZERO, ~high)):
        n = int(mask.sum())
        counts[(grp, cls)] = n
        if n == 0:
            fr[(grp, cls)] = float("nan")
            se[(grp, cls)] = float("nan")
        else:
            f = float(risky[mask].mean())
            fr[(grp, cls)] = f
            se[(grp, cls)] = float(np.sqrt(f * (1.0 - f) / n))


def simulate_generation(previous: GenerationAgents, config: SimConfig,
                        t: int, mean_prev: StateVector
                        ) -> tuple[GenerationAgents, GenerationOutcome]:
    """Advance one generation; returns the new agents and their aggregate.

    mean_prev carries the mean-field fractions agents use for inference.
    """
    params = config.params
    v = previous.v
    N = config.n_per_group
    high, risky, fr, se, counts = {}, {}, {}, {}, {}
    for grp in GROUPS:
        rng = _group_rng(config.seed, t, grp)
        gp = params.group(grp)
        h = rng.random(N) < gp.pi
        own = rng.random((N, gp.degree)) < gp.homophily
        idx = rng.integers(0, N, size=(N, gp.degree))
        other = grp.other
        f_high = np.where(own, previous.high[grp][idx], previous.high[other][idx])
        f_risky = np.where(own, previous.risky[grp][idx], previous.risky[other][idx])
        # a positive-cost risky friend reveals through its payoff sign:
        # "+" (possible only at v=1, from costs below 1) pins belief at 1,
        # "-" pins it at 0, and the safe action follows for any cost
        taker = f_high & f_risky
        if v == 1:
            low_flag = np.where(own, params.group(grp).cost < 1.0,
                                params.group(other).cost < 1.0)
            plus_seen = (taker & low_flag).any(axis=1)
            minus_seen = (taker & ~low_flag).any(axis=1)
        else:
            plus_seen = np.zeros(N, dtype=bool)
            minus_seen = taker.any(axis=1)
        safe = f_high & ~f_risky
        n_own_safe = (safe & own).sum(axis=1)
        n_cross_safe = (safe & ~own).sum(axis=1)
        if grp is Group.GREEN:
            n_b, n_g = n_cross_safe, n_own_safe
        else:
            n_b, n_g = n_own_safe, n_cross_safe
        table = _action_table(params, mean_prev, grp)
        tally_act = table[n_b, n_g]
        plus_act = decide(1.0, gp.cost) is Action.RISKY
        act = np.where(plus_seen, plus_act,
                       np.where(minus_seen, False, tally_act))
        r = np.where(h, act, True)
        high[grp], risky[grp] = h, r
        _tabulate(grp, h, r, fr, se, counts)
    return GenerationAgents(v=v, high=high, risky=risky), \
        GenerationOutcome(t=t, fractions=fr, se=se, counts=counts)


def _gap(outcome: GenerationOutcome, state: StateVector, v: int) -> float:
    worst = 0.0
    for grp in GROUPS:
        f = outcome.fractions[(grp, HIGH)]
        if f != f:  # empty cost class this generation
            continue
        worst = max(worst, abs(f - state.component(grp, v)))
    return worst


def run_abm(config: SimConfig) -> AbmResult:
    """Simulate T generations and report the gap to the mean-field path."""
    params = config.params
    v = realize_v(config)
    mean = iterate(default_initial_state(params), params, config.generations,
                   regime=StepRegime.GENERAL)
    agents, out0 = _initial_generation(config, v)
    outcomes = [out0]
    gaps = [_gap(out0, mean.states[0], v)]
    for t in range(1, config.generations + 1):
        agents, out = simulate_generation(agents, config, t, mean.states[t - 1])
        outcomes.append(out)
        gaps.append(_gap(out, mean.states[t], v))
    return AbmResult(config=config, realized_v=v, outcomes=outcomes,
                     meanfield=list(mean.states), gaps=gaps)
