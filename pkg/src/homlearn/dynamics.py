"""Mean-field dynamics: one-generation step maps and trajectory iteration.

The state tracks, per group and per realized value of the risky action, the
fraction of high-cost agents taking the risky action.  Each generation
observes the previous one, updates beliefs, and acts; the maps here push
the state forward one generation.

Step maps:
  step_general        split-cost system (high-cost greens, low-cost blues)
  step_simplified     split-cost system on the b(1) = 1 manifold
  step_full_homophily one isolated group (homophily 1), scalar map
  step_exact          decision-rule evaluation of every tally, any regime
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .params import (Group, ModelParams, RegimeTag, RegimeError, StateVector,
                     classify_regime, sup_distance, validate_params, validate_state)
from .signals import decide, Action, tally_profile

FIXED_POINT_TOL = 1e-12


class StepRegime(Enum):
    GENERAL = "general"
    SIMPLIFIED_SPLIT = "simplified-split"
    FULL_HOMOPHILY = "full-homophily"


@dataclass
class Trajectory:
    """A simulated path of states; states[t] is generation t."""

    states: list[StateVector]
    params: ModelParams
    regime_used: StepRegime
    converged_at: int | None = None


def _clamp(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def default_initial_state(params: ModelParams) -> StateVector:
    """Prior-based initial profile: risky iff the prior covers the cost."""
    g = 1.0 if params.green.cost <= params.p else 0.0
    b = 1.0 if params.blue.cost <= params.p else 0.0
    return StateVector(g0=g, g1=g, b0=b, b1=b)


def step_general(state: StateVector, params: ModelParams) -> StateVector:
    """One generation of the split-cost system.

    High-cost greens take the risky action only on direct evidence, so
    g'(0) = 0 and g'(1) = 1 - [1 - (h_g pi_g g1 + (1-h_g) pi_b b1)]^d_g.
    Low-cost blues default to risky and weigh every no-reveal tally:
    b'(0) sums the v=0 probabilities of risky tallies, b'(1) is one minus
    the v=1 probabilities of safe ones.  The green closed form identifies
    positive reports with adoption, which presumes the green cost is below
    the good-state payoff; route costs above 1 through step_exact.

    Groups are normalized internally so the high-cost group plays the
    green role; outputs are returned under the caller's labels.
    """
    regime = classify_regime(params)
    if regime.tag is not RegimeTag.SPLIT:
        raise RegimeError("step_general requires the split regime "
                          f"(one cost above p, one at or below), got {regime.tag.value}")
    if regime.high_cost_group is Group.BLUE:
        return step_general(state.swapped(), params.swapped()).swapped()
    gp, bp = params.green, params.blue
    a = gp.homophily * gp.pi * state.g1 + (1.0 - gp.homophily) * bp.pi * state.b1
    g1_next = 1.0 - max(0.0, 1.0 - a) ** gp.degree
    prof = tally_profile(params, state, Group.BLUE)
    risky = prof.risky_mask(bp.cost)
    safe = prof.on_path & ~risky
    b0_next = float(np.sum(prof.phi0[risky]))
    b1_next = 1.0 - float(np.sum(prof.phi1[safe]))
    return StateVector(0.0, _clamp(g1_next), _clamp(b0_next), _clamp(b1_next))


def step_simplified(state: StateVector, params: ModelParams) -> StateVector:
    """Split-cost step on the manifold where every blue takes risky at v=1.

    g'(1) = 1 - [1 - (h_g pi_g g1 + (1-h_g) pi_b)]^d_g, g'(0) = 0,
    b'(0) = (1 - h_b pi_b)^d_b, b'(1) = 1.  Valid when
    check_simplified_applicable holds; callers are responsible for that.
    """
    regime = classify_regime(params)
    if regime.tag is not RegimeTag.SPLIT:
        raise RegimeError("step_simplified requires the split regime, "
                          f"got {regime.tag.value}")
    if regime.high_cost_group is Group.BLUE:
        return step_simplified(state.swapped(), params.swapped()).swapped()
    g1_next = _simplified_green_update(state.g1, params)
    b0_next = (1.0 - params.blue.homophily * params.blue.pi) ** params.blue.degree
    return StateVector(0.0, _clamp(g1_next), _clamp(b0_next), 1.0)


def _simplified_green_update(g1: float, params: ModelParams) -> float:
    gp, bp = params.green, params.blue
    a = gp.homophily * gp.pi * g1 + (1.0 - gp.homophily) * bp.pi
    return 1.0 - max(0.0, 1.0 - a) ** gp.degree


def step_full_homophily(g_fraction: float, group, p: float, v: int) -> float:
    """Isolated-group (homophily 1) update of the high-cost risky fraction.

    With cost at or below p the group defaults to risky: the v=1 fraction
    is 1 and the v=0 fraction settles at (1-pi)^d, the share seeing no
    high-cost friend at all.  With cost above p only direct positive
    evidence persuades: the v=1 map is 1 - (1 - pi*g)^d and the v=0
    fraction is 0.
    """
    if group.homophily != 1.0:
        raise RegimeError("step_full_homophily requires homophily exactly 1")
    if not 0.0 <= g_fraction <= 1.0:
        raise ValueError(f"fraction out of [0, 1]: {g_fraction!r}")
    if group.cost <= p:
        return 1.0 if v == 1 else (1.0 - group.pi) ** group.degree
    if v == 1:
        return _clamp(1.0 - (1.0 - group.pi * g_fraction) ** group.degree)
    return 0.0


def _step_full_homophily_state(state: StateVector, params: ModelParams) -> StateVector:
    if params.green.homophily != 1.0 or params.blue.homophily != 1.0:
        raise RegimeError("full-homophily stepping requires homophily 1 in both groups")
    return StateVector(
        g0=step_full_homophily(state.g0, params.green, params.p, 0),
        g1=step_full_homophily(state.g1, params.green, params.p, 1),
        b0=step_full_homophily(state.b0, params.blue, params.p, 0),
        b1=step_full_homophily(state.b1, params.blue, params.p, 1),
    )


def step_exact(state: StateVector, params: ModelParams) -> StateVector:
    """One generation by direct evaluation of the decision rule, any regime.

    Per group and value: a "+" outcome is possible only in the good state
    and pins the belief at 1, so the mass of draws containing at least one
    positive-cost taker whose payoff can be positive (cost below the
    good-state payoff) acts by decide(1, cost).  Any other revealed
    outcome is "-", which maps to belief 0 and the safe action for every
    positive cost.  No-reveal tallies act by their exact posterior.

    The "-" rule reads payoff signs as revealing v, which holds only for
    costs below 1.  A cost-above-1 group never takes the risky action, so
    states giving it positive risky mass encode infeasible behavior; from
    those states this map is not a Bayes update for that group's signals.
    """
    comps = {}
    for grp in (Group.GREEN, Group.BLUE):
        own = params.group(grp)
        other = params.group(grp.other)
        prof = tally_profile(params, state, grp)
        risky = prof.risky_mask(own.cost)
        for v in (0, 1):
            plus_mass = 0.0
            if v == 1:
                low = own.homophily * own.pi * state.component(grp, 1) \
                    * (1.0 if own.cost < 1.0 else 0.0) \
                    + (1.0 - own.homophily) * other.pi \
                    * state.component(grp.other, 1) \
                    * (1.0 if other.cost < 1.0 else 0.0)
                plus_mass = 1.0 - max(0.0, 1.0 - low) ** own.degree
            base = plus_mass if decide(1.0, own.cost) is Action.RISKY else 0.0
            phi = prof.phi1 if v == 1 else prof.phi0
            comps[(grp, v)] = _clamp(base + float(np.sum(phi[risky])))
    return StateVector(g0=comps[(Group.GREEN, 0)], g1=comps[(Group.GREEN, 1)],
                       b0=comps[(Group.BLUE, 0)], b1=comps[(Group.BLUE, 1)])


def general_step(state: StateVector, params: ModelParams) -> StateVector:
    """Regime-routing single step: split-cost system where it applies,
    exact decision-rule evaluation otherwise."""
    regime = classify_regime(params)
    if regime.tag is RegimeTag.SPLIT:
        high = params.group(regime.high_cost_group)
        if high.cost < 1.0:
            return step_general(state, params)
    return step_exact(state, params)


def _step_fn(params: ModelParams, regime: StepRegime):
    if regime is StepRegime.GENERAL:
        return general_step
    if regime is StepRegime.SIMPLIFIED_SPLIT:
        if classify_regime(params).tag is not RegimeTag.SPLIT:
            raise RegimeError("simplified-split stepping requires the split regime")
        return step_simplified
    return _step_full_homophily_state


def iterate(initial: StateVector, params: ModelParams, generations: int,
            regime: StepRegime = StepRegime.GENERAL) -> Trajectory:
    """Iterate the chosen step map for a fixed number of generations.

    Returns a trajectory of length generations + 1.  converged_at records
    the first generation whose state is within FIXED_POINT_TOL of its
    predecessor (sup norm); iteration is not cut short.
    """
    validate_params(params)
    validate_state(initial)
    if not (isinstance(generations, int) and generations >= 0):
        raise ValueError(f"generations must be a nonnegative integer, got {generations!r}")
    fn = _step_fn(params, regime)
    states = [initial]
    converged_at = None
    for t in range(1, generations + 1):
        nxt = fn(states[-1], params)
        states.append(nxt)
        if converged_at is None and sup_distance(nxt, states[-2]) <= FIXED_POINT_TOL:
            converged_at = t
    return Trajectory(states=states, params=params, regime_used=regime,
                      converged_at=converged_at)


def check_monotonicity(trajectory: Trajectory) -> bool:
    """True when every post-initial state adopts weakly more at v=1 than v=0."""
    return all(s.g1 >= s.g0 and s.b1 >= s.b0 for s in trajectory.states[1:])


def simplified_fixed_point(params: ModelParams) -> StateVector:
    """Largest fixed point of the simplified split-cost system.

    The green equation g = 1 - [1 - (h pi_g g + (1-h) pi_b)]^d is solved by
    bisection; the blue coordinates follow in closed form.
    """
    regime = classify_regime(params)
    if regime.tag is not RegimeTag.SPLIT:
        raise RegimeError("simplified fixed point requires the split regime")
    if regime.high_cost_group is Group.BLUE:
        return simplified_fixed_point(params.swapped()).swapped()
    g_star = _bisect_largest_root(lambda g: _simplified_green_update(g, params) - g)
    b0 = (1.0 - params.blue.homophily * params.blue.pi) ** params.blue.degree
    return StateVector(0.0, g_star, _clamp(b0), 1.0)


def _bisect_largest_root(f) -> float:
    """Largest root in [0, 1] of an f that is positive below its top root.

    The simplified green map is concave and increasing with f(1) <= 0, so
    scanning down from 1 for a positive value brackets the largest root.
    """
    hi = 1.0
    if f(hi) == 0.0:
        return hi
    lo = None
    x = 0.5
    while x > 1e-12:
        if f(x) > 0.0:
            lo = x
            break
        hi = x
        x /= 2.0
    if lo is None:
        return 0.0 if f(0.0) <= 0.0 else hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_simplified_applicable(params: ModelParams,
                                state: StateVector | None = None) -> bool:
    """Whether the b(1) = 1 manifold is self-consistent at a fixed point.

    At the candidate state (default: the simplified fixed point itself)
    every on-path no-reveal tally a blue can see without blue safes must
    still clear the blue cost, and the green cost must sit below the
    good-state payoff so that positive reports persuade greens.
    """
    regime = classify_regime(params)
    if regime.tag is not RegimeTag.SPLIT:
        raise RegimeError("applicability check requires the split regime")
    if regime.high_cost_group is Group.BLUE:
        return check_simplified_applicable(
            params.swapped(), None if state is None else state.swapped())
    if params.green.cost >= 1.0:
        return False
    if state is None:
        state = simplified_fixed_point(params)
    prof = tally_profile(params, state, Group.BLUE)
    mask = prof.on_path & (prof.n_blue_safe == 0)
    return bool(np.all(prof.beta[mask] >= params.blue.cost))
