"""Signal profiles, their state-conditional probabilities, and posteriors.

An agent observes d friends.  Each observation is a triple: the friend's
outcome (a "+" payoff report, a "-" payoff report, or no report when the
friend took the safe action), the friend's cost label, and the friend's
group.  Because payoffs are v - c with v in {0, 1}, any observed taker
reveals v perfectly; what remains informative in the no-reveal case is the
tally of high-cost safe players per group.

The posterior works in linear probability space with an underflow floor
(UNDERFLOW_FLOOR); profiles that are impossible under both states carry no
belief and are reported as off-path (None).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .params import Group, ModelParams, StateVector

UNDERFLOW_FLOOR = 1e-300


class Outcome(Enum):
    PLUS = "+"
    MINUS = "-"
    NONE = "none"


class CostLabel(Enum):
    ZERO = "zero"
    COST_B = "cost-b"
    COST_G = "cost-g"


class Action(Enum):
    RISKY = "risky"
    SAFE = "safe"


class Revealed(Enum):
    PLUS_REVEALED = "plus"
    MINUS_REVEALED = "minus"
    NONE_REVEALED = "none"


@dataclass(frozen=True)
class SignalObservation:
    """One observed friend: outcome, cost label, group.

    Zero-cost friends always take the risky action, so their outcome is
    never NONE; and a zero-cost MINUS would imply v - 0 < 0, impossible.
    """

    outcome: Outcome
    cost_label: CostLabel
    group: Group

    def __post_init__(self) -> None:
        if self.cost_label is CostLabel.ZERO and self.outcome is not Outcome.PLUS:
            raise ValueError("zero-cost observations always carry a '+' outcome")


@dataclass(frozen=True)
class SignalTally:
    """Sufficient statistic of a signal profile.

    n_blue_safe / n_green_safe count high-cost friends of each group who
    played safe; n_zero counts zero-cost friends, whose payoff v - 0 is
    nonnegative in both states, so their '+' report is uninformative.
    revealed records whether any high-cost taker disclosed v.
    """

    n_blue_safe: int
    n_green_safe: int
    n_zero: int
    revealed: Revealed = Revealed.NONE_REVEALED

    def __post_init__(self) -> None:
        for name in ("n_blue_safe", "n_green_safe", "n_zero"):
            n = getattr(self, name)
            if not (isinstance(n, int) and n >= 0):
                raise ValueError(f"{name} must be a nonnegative integer, got {n!r}")


@dataclass(frozen=True)
class CategoryProbs:
    """Per-draw probabilities of the five observable friend categories."""

    own_taker: float
    own_safe: float
    cross_taker: float
    cross_safe: float
    zero_cost: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.own_taker, self.own_safe, self.cross_taker,
                self.cross_safe, self.zero_cost)


def category_probabilities(params: ModelParams, state: StateVector,
                           observer: Group, v: int) -> CategoryProbs:
    """Single-draw category probabilities for an observer, conditional on v.

    own-taker: h * pi_own * alpha_own(v); own-safe: h * pi_own * (1 - alpha_own(v));
    cross terms use (1 - h) and the other group's pi and fraction; zero-cost
    mass is h * (1 - pi_own) + (1 - h) * (1 - pi_other).
    """
    own = params.group(observer)
    other = params.group(observer.other)
    a_own = state.component(observer, v)
    a_other = state.component(observer.other, v)
    h = own.homophily
    return CategoryProbs(
        own_taker=h * own.pi * a_own,
        own_safe=h * own.pi * (1.0 - a_own),
        cross_taker=(1.0 - h) * other.pi * a_other,
        cross_safe=(1.0 - h) * other.pi * (1.0 - a_other),
        zero_cost=h * (1.0 - own.pi) + (1.0 - h) * (1.0 - other.pi),
    )


def enumerate_tallies(degree: int) -> list[SignalTally]:
    """All no-reveal tallies for a given degree: (d+1)(d+2)/2 of them."""
    if not (isinstance(degree, int) and degree >= 1):
        raise ValueError(f"degree must be an integer >= 1, got {degree!r}")
    out = []
    for n_b in range(degree + 1):
        for n_g in range(degree + 1 - n_b):
            out.append(SignalTally(n_b, n_g, degree - n_b - n_g))
    return out


def _multinomial_coeff(degree: int, n_b: int, n_g: int) -> int:
    # number of orderings of a (n_b, n_g, rest) draw sequence
    return math.comb(degree, n_b) * math.comb(degree - n_b, n_g)


def profile_probability(tally: SignalTally, params: ModelParams,
                        state: StateVector, observer: Group, v: int) -> float:
    """Probability of observing a full-degree no-reveal tally given v.

    Multinomial over the per-draw categories: coefficient times
    own-safe^n_own * cross-safe^n_cross * zero^n_zero, where own/cross map
    the blue/green counts onto the observer's perspective.
    """
    own = params.group(observer)
    d = own.degree
    if tally.revealed is not Revealed.NONE_REVEALED:
        raise ValueError("profile_probability covers no-reveal tallies only")
    if tally.n_blue_safe + tally.n_green_safe + tally.n_zero != d:
        raise ValueError(
            f"tally counts must sum to the observer degree {d}, got "
            f"({tally.n_blue_safe}, {tally.n_green_safe}, {tally.n_zero})")
    cats = category_probabilities(params, state, observer, v)
    n_own = tally.n_green_safe if observer is Group.GREEN else tally.n_blue_safe
    n_cross = tally.n_blue_safe if observer is Group.GREEN else tally.n_green_safe
    coeff = float(_multinomial_coeff(d, tally.n_blue_safe, tally.n_green_safe))
    return coeff * cats.own_safe ** n_own * cats.cross_safe ** n_cross \
        * cats.zero_cost ** tally.n_zero


def bayes_posterior(p: float, phi1: float, phi0: float) -> float | None:
    """Posterior P(v=1) from state-conditional profile probabilities.

    Equal likelihoods return the prior exactly (ratio 1 carries no
    information); a denominator at or below the underflow floor means the
    profile is off the equilibrium path and carries no belief.
    """
    if phi1 == phi0:
        return p if phi1 > UNDERFLOW_FLOOR else None
    num = p * phi1
    den = num + (1.0 - p) * phi0
    if den <= UNDERFLOW_FLOOR:
        return None
    return num / den


def posterior(tally: SignalTally, params: ModelParams, state: StateVector,
              observer: Group) -> float | None:
    """Posterior belief that v = 1 after observing a tally.

    Revealed tallies are degenerate: any '+' report proves v = 1, any '-'
    report proves v = 0.  No-reveal tallies update the prior by the ratio
    of their state-conditional probabilities; off-path tallies return None.
    """
    if tally.revealed is Revealed.PLUS_REVEALED:
        return 1.0
    if tally.revealed is Revealed.MINUS_REVEALED:
        return 0.0
    phi1 = profile_probability(tally, params, state, observer, 1)
    phi0 = profile_probability(tally, params, state, observer, 0)
    return bayes_posterior(params.p, phi1, phi0)


def decide(belief: float, cost: float) -> Action:
    """Risky iff the posterior mean payoff covers the cost; ties go risky."""
    return Action.RISKY if belief >= cost else Action.SAFE


# === vectorized tally machinery =========================================
#
# The step maps and Jacobians evaluate every tally at once.  The arrays
# below mirror the scalar formulas term for term; entries agree with the
# corresponding profile_probability / posterior calls up to a few ulp
# (numpy's array power rounds differently from Python's scalar pow).

@lru_cache(maxsize=None)
def _tally_arrays(degree: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    tallies = enumerate_tallies(degree)
    n_b = np.array([t.n_blue_safe for t in tallies], dtype=np.int64)
    n_g = np.array([t.n_green_safe for t in tallies], dtype=np.int64)
    n_z = np.array([t.n_zero for t in tallies], dtype=np.int64)
    coeff = np.array(
        [float(_multinomial_coeff(degree, t.n_blue_safe, t.n_green_safe))
         for t in tallies])
    return n_b, n_g, n_z, coeff


@dataclass
class TallyProfile:
    """Every no-reveal tally of one observer, with probabilities and beliefs.

    beta is NaN on off-path tallies (zero probability under both states).
    """

    observer: Group
    n_blue_safe: np.ndarray
    n_green_safe: np.ndarray
    n_zero: np.ndarray
    phi0: np.ndarray
    phi1: np.ndarray
    beta: np.ndarray
    on_path: np.ndarray

    def risky_mask(self, cost: float) -> np.ndarray:
        """On-path tallies whose belief clears the cost (ties risky)."""
        return self.on_path & (self.beta >= cost)


def tally_profile(params: ModelParams, state: StateVector, observer: Group) -> TallyProfile:
    """Vectorized per-tally probabilities and posteriors for one observer."""
    d = params.group(observer).degree
    n_b, n_g, n_z, coeff = _tally_arrays(d)
    n_own = n_g if observer is Group.GREEN else n_b
    n_cross = n_b if observer is Group.GREEN else n_g
    phis = []
    for v in (0, 1):
        cats = category_probabilities(params, state, observer, v)
        phis.append(coeff * cats.own_safe ** n_own * cats.cross_safe ** n_cross
                    * cats.zero_cost ** n_z)
    phi0, phi1 = phis
    num = params.p * phi1
    den = num + (1.0 - params.p) * phi0
    on_path = den > UNDERFLOW_FLOOR
    den_safe = np.where(on_path, den, 1.0)
    beta = np.where(on_path,
                    np.where(phi1 == phi0, params.p, num / den_safe),
                    np.nan)
    return TallyProfile(observer, n_b, n_g, n_z, phi0, phi1, beta, on_path)
