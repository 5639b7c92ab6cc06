"""Core types for the two-group social-learning model.

Two groups, labeled green and blue, choose between a safe action (payoff 0)
and a risky action whose payoff is v - c, where v is 1 with prior
probability p and 0 otherwise.  Within each group a share pi draws a
strictly positive cost c; the rest have zero cost and always take the risky
action.  Agents observe d friends from the previous generation, each drawn
from their own group with probability h (homophily) and from the other
group otherwise.

Everything in this module is an immutable value type.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ParamError(ValueError):
    """A model parameter violates one of its invariants."""


class RegimeError(ValueError):
    """An operation was invoked outside the parameter regime it covers."""


class Group(Enum):
    GREEN = "green"
    BLUE = "blue"

    @property
    def other(self) -> "Group":
        return Group.BLUE if self is Group.GREEN else Group.GREEN


@dataclass(frozen=True)
class GroupParams:
    """Primitives for one group.

    cost: risky-action cost for the group's high-cost members (> 0, never 1).
    pi: share of the group drawing the high cost.
    degree: number of observed friends from the previous generation.
    homophily: probability that any one observed friend is own-group.
    """

    cost: float
    pi: float
    degree: int
    homophily: float


@dataclass(frozen=True)
class ModelParams:
    """Full parameterization: prior p on the good state plus both groups."""

    p: float
    green: GroupParams
    blue: GroupParams

    def group(self, which: Group) -> GroupParams:
        return self.green if which is Group.GREEN else self.blue

    def swapped(self) -> "ModelParams":
        """Relabel the groups (green <-> blue)."""
        return ModelParams(p=self.p, green=self.blue, blue=self.green)


@dataclass(frozen=True)
class StateVector:
    """Fractions of high-cost agents taking the risky action.

    g0/g1 are the green fractions conditional on v = 0 / v = 1, and b0/b1
    the blue ones.  Zero-cost agents always take the risky action and are
    not part of the state.
    """

    g0: float
    g1: float
    b0: float
    b1: float

    def swapped(self) -> "StateVector":
        return StateVector(g0=self.b0, g1=self.b1, b0=self.g0, b1=self.g1)

    def component(self, group: Group, v: int) -> float:
        if group is Group.GREEN:
            return self.g1 if v == 1 else self.g0
        return self.b1 if v == 1 else self.b0

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.g0, self.g1, self.b0, self.b1)


def sup_distance(a: StateVector, b: StateVector) -> float:
    """Sup-norm distance between two states."""
    return max(abs(x - y) for x, y in zip(a.as_tuple(), b.as_tuple()))


class RegimeTag(Enum):
    BOTH_RISKY = "both-risky"
    BOTH_SAFE = "both-safe"
    SPLIT = "split"


@dataclass(frozen=True)
class Regime:
    """Cost regime of the model; for Split, which group carries the high cost."""

    tag: RegimeTag
    high_cost_group: Group | None = None


def _validate_group(gp: GroupParams, label: str) -> None:
    if not (isinstance(gp.cost, (int, float)) and gp.cost > 0.0):
        raise ParamError(f"{label}.cost must be strictly positive, got {gp.cost!r}")
    if gp.cost == 1.0:
        raise ParamError(f"{label}.cost equals 1, which is excluded")
    if not 0.0 <= gp.pi <= 1.0:
        raise ParamError(f"{label}.pi out of [0, 1]: {gp.pi!r}")
    if not (isinstance(gp.degree, int) and gp.degree >= 1):
        raise ParamError(f"{label}.degree must be an integer >= 1, got {gp.degree!r}")
    if not 0.0 <= gp.homophily <= 1.0:
        raise ParamError(f"{label}.homophily out of [0, 1]: {gp.homophily!r}")


def validate_params(params: ModelParams) -> ModelParams:
    """Check every parameter invariant; returns the params unchanged.

    Raises ParamError naming the first violated invariant.
    """
    if not 0.0 < params.p < 1.0:
        raise ParamError(f"p out of open interval (0, 1): {params.p!r}")
    _validate_group(params.green, "green")
    _validate_group(params.blue, "blue")
    return params


def validate_state(state: StateVector) -> StateVector:
    """Check that every fraction lies in [0, 1]."""
    for name, x in zip(("g0", "g1", "b0", "b1"), state.as_tuple()):
        if not 0.0 <= x <= 1.0:
            raise ParamError(f"state.{name} out of [0, 1]: {x!r}")
    return state


def classify_regime(params: ModelParams) -> Regime:
    """Regime by comparing each group's high cost with the prior p.

    A cost exactly equal to p counts as the low-cost (risky-by-default)
    side, mirroring the tie rule of the decision stage.
    """
    green_risky = params.green.cost <= params.p
    blue_risky = params.blue.cost <= params.p
    if green_risky and blue_risky:
        return Regime(RegimeTag.BOTH_RISKY)
    if not green_risky and not blue_risky:
        return Regime(RegimeTag.BOTH_SAFE)
    high = Group.GREEN if not green_risky else Group.BLUE
    return Regime(RegimeTag.SPLIT, high_cost_group=high)
