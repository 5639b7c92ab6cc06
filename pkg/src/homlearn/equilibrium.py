"""Steady states of the mean-field dynamics and their local analysis.

The v = 1 block of the dynamics is the interesting one: the v = 0
coordinates either collapse to closed forms or are slaved to it.  This
module solves for fixed points by damped iteration, linearizes the v = 1
block analytically, classifies stability (spectral radius against a
margin band, cross-checked by perturbation probes), and differentiates
the steady state in the high-cost group's homophily both through the
implicit function theorem and by finite-difference re-solves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import (Group, GroupParams, ModelParams, Regime, RegimeError,
                     RegimeTag, StateVector, classify_regime, sup_distance,
                     validate_params, validate_state)
from .signals import (Action, decide, category_probabilities, tally_profile,
                      _tally_arrays)
from .dynamics import (StepRegime, _step_fn, check_simplified_applicable,
                       default_initial_state, general_step, simplified_fixed_point,
                       _bisect_largest_root)

STABILITY_BAND = 1e-6
REGULARITY_TOL = 1e-9
PROBE_EPS = 1e-3
PROBE_MAX_ITER = 10_000
FD_HOMOPHILY_STEP = 1e-4


class NonRegularPointError(ValueError):
    """Some on-path posterior ties the decision cost; the map is not
    differentiable here."""


class Stability:
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"
    NON_REGULAR = "non-regular"


class Sign:
    POSITIVE = 1
    NEGATIVE = -1
    ZERO = 0


# === v = 1 block Jacobian ================================================

def _reveal_row_raw(state: StateVector, params: ModelParams, group: Group,
                    low_only: bool = False) -> np.ndarray:
    """Gradient of the reveal probability 1 - (1 - T)^d in (g1, b1).

    With low_only, T counts only takers whose cost is below the good-state
    payoff (the channel whose "+" outcome pins the belief at 1); channels
    with cost above 1 drop out of both the mass and the gradient.
    """
    own = params.group(group)
    other = params.group(group.other)
    w_own = 0.0 if low_only and own.cost >= 1.0 else 1.0
    w_cross = 0.0 if low_only and other.cost >= 1.0 else 1.0
    t1 = own.homophily * own.pi * state.component(group, 1) * w_own \
        + (1.0 - own.homophily) * other.pi * state.component(group.other, 1) * w_cross
    factor = own.degree * max(0.0, 1.0 - t1) ** (own.degree - 1)
    d_own = factor * own.homophily * own.pi * w_own
    d_cross = factor * (1.0 - own.homophily) * other.pi * w_cross
    if group is Group.GREEN:
        return np.array([d_own, d_cross])
    return np.array([d_cross, d_own])


def _exact_row(state: StateVector, params: ModelParams, group: Group) -> np.ndarray:
    """Gradient of the exact v = 1 update for one group in (g1, b1).

    The tally part is -(sum over safe tallies of the phi1 gradient);
    reveal-mass terms enter when the group's own cost exceeds 1 (takers
    fail to persuade) or a watched group's cost does (its takers show "-"
    rather than "+").  Raises NonRegularPointError when an on-path
    posterior ties the cost within REGULARITY_TOL, or when an off-path
    tally still carries probability mass to first order (the map is then
    only one-sided differentiable).
    """
    own = params.group(group)
    prof = tally_profile(params, state, group)
    cats = category_probabilities(params, state, group, 1)
    n_own = prof.n_green_safe if group is Group.GREEN else prof.n_blue_safe
    n_cross = prof.n_blue_safe if group is Group.GREEN else prof.n_green_safe
    n_z = prof.n_zero
    a, b, r = cats.own_safe, cats.cross_safe, cats.zero_cost
    _, _, _, coeff = _tally_arrays(own.degree)
    pow_a = a ** n_own
    pow_b = b ** n_cross
    pow_r = r ** n_z
    pow_a_m1 = a ** np.maximum(n_own - 1, 0)
    pow_b_m1 = b ** np.maximum(n_cross - 1, 0)
    own_slope = own.homophily * own.pi
    cross_slope = (1.0 - own.homophily) * params.group(group.other).pi
    # magnitudes of d(phi1)/d(own1) and d(phi1)/d(other1); signs are negative
    mag_own = coeff * n_own * pow_a_m1 * own_slope * pow_b * pow_r
    mag_cross = coeff * pow_a * n_cross * pow_b_m1 * cross_slope * pow_r
    off = ~prof.on_path
    if bool(np.any(off & ((mag_own > 0.0) | (mag_cross > 0.0)))):
        raise NonRegularPointError(
            "off-path tally with first-order probability mass; "
            "one-sided derivative only")
    ties = prof.on_path & (np.abs(prof.beta - own.cost) <= REGULARITY_TOL)
    if bool(np.any(ties)):
        raise NonRegularPointError(
            f"on-path posterior within {REGULARITY_TOL} of the cost {own.cost}")
    safe = prof.on_path & (prof.beta < own.cost)
    d_own1 = float(np.sum(mag_own[safe]))
    d_other1 = float(np.sum(mag_cross[safe]))
    if group is Group.GREEN:
        row = np.array([d_own1, d_other1])
    else:
        row = np.array([d_other1, d_own1])
    # update = gate * plus_mass + sum(phi1[risky]); with the no-reveal phi
    # summing to one minus the total reveal mass, the gradient is
    # sum(mags) + gate * d(plus_mass) - d(total reveal), and the last two
    # cancel exactly when every taker cost is below 1
    gate = 1.0 if decide(1.0, own.cost) is Action.RISKY else 0.0
    full = _reveal_row_raw(state, params, group)
    low = _reveal_row_raw(state, params, group, low_only=True)
    return row + gate * low - full


def jacobian_v1(state: StateVector, params: ModelParams,
                regime: StepRegime = StepRegime.GENERAL) -> np.ndarray:
    """2x2 Jacobian of the v = 1 block, rows (g1', b1'), columns (g1, b1).

    Mirrors the map the given regime actually iterates: the split system
    pairs the closed-form green row
      dg'/dg1 = d_g (1-A)^(d_g-1) h_g pi_g,
      dg'/db1 = d_g (1-A)^(d_g-1) (1-h_g) pi_b,
    with the tally-sum blue row; other regimes differentiate the exact
    update for both groups; the simplified split map depends on g1 alone.
    """
    validate_params(params)
    validate_state(state)
    cls = classify_regime(params)
    if regime is StepRegime.SIMPLIFIED_SPLIT:
        if cls.tag is not RegimeTag.SPLIT:
            raise RegimeError("simplified jacobian requires the split regime")
        if cls.high_cost_group is Group.BLUE:
            jac = jacobian_v1(state.swapped(), params.swapped(), regime)
            return jac[::-1, ::-1]
        gp, bp = params.green, params.blue
        a = gp.homophily * gp.pi * state.g1 + (1.0 - gp.homophily) * bp.pi
        gg = gp.degree * max(0.0, 1.0 - a) ** (gp.degree - 1) * gp.homophily * gp.pi
        return np.array([[gg, 0.0], [0.0, 0.0]])
    if regime is StepRegime.FULL_HOMOPHILY:
        if params.green.homophily != 1.0 or params.blue.homophily != 1.0:
            raise RegimeError("full-homophily jacobian requires homophily 1")
        rows = []
        for grp in (Group.GREEN, Group.BLUE):
            own = params.group(grp)
            if own.cost <= params.p:
                slope = 0.0
            else:
                g1 = state.component(grp, 1)
                slope = own.degree * own.pi * (1.0 - own.pi * g1) ** (own.degree - 1)
            rows.append([slope, 0.0] if grp is Group.GREEN else [0.0, slope])
        return np.array(rows)
    if cls.tag is RegimeTag.SPLIT:
        if cls.high_cost_group is Group.BLUE:
            jac = jacobian_v1(state.swapped(), params.swapped(), regime)
            return jac[::-1, ::-1]
        if params.green.cost < 1.0:
            return np.array([_reveal_row_raw(state, params, Group.GREEN),
                             _exact_row(state, params, Group.BLUE)])
    return np.array([_exact_row(state, params, Group.GREEN),
                     _exact_row(state, params, Group.BLUE)])


def regularity_margin(state: StateVector, params: ModelParams) -> float:
    """Smallest distance of any on-path posterior from its decision cost.

    Only groups whose update actually thresholds tallies contribute; the
    closed-form green row of the split system has no indicator, so a pure
    split model is judged by the blue side alone.
    """
    cls = classify_regime(params)
    groups: tuple[Group, ...]
    if cls.tag is RegimeTag.SPLIT and params.group(cls.high_cost_group).cost < 1.0:
        groups = (cls.high_cost_group.other,)
    else:
        groups = (Group.GREEN, Group.BLUE)
    margin = math.inf
    for grp in groups:
        prof = tally_profile(params, state, grp)
        gaps = np.abs(prof.beta[prof.on_path] - params.group(grp).cost)
        if gaps.size:
            margin = min(margin, float(gaps.min()))
    return margin


# === stability ===========================================================

@dataclass
class StabilityResult:
    tag: str
    spectral_radius: float | None
    probe_outcome: str | None
    probe_agrees: bool | None


def _probe_stability(state: StateVector, params: ModelParams,
                     regime: StepRegime, eps: float = PROBE_EPS,
                     max_iter: int = PROBE_MAX_ITER) -> str:
    """Iterate from 8 axis perturbations of the point: 'returned' if every
    admissible probe re-converges, 'escaped' if any leaves a 0.1-ball."""
    fn = _step_fn(params, regime)
    outcomes = []
    base = state.as_tuple()
    for axis in range(4):
        for direction in (1.0, -1.0):
            coords = list(base)
            coords[axis] = min(1.0, max(0.0, coords[axis] + direction * eps))
            probe = StateVector(*coords)
            if sup_distance(probe, state) == 0.0:
                continue
            outcome = "inconclusive"
            x = probe
            for _ in range(max_iter):
                x = fn(x, params)
                dist = sup_distance(x, state)
                if dist <= 1e-8:
                    outcome = "returned"
                    break
                if dist >= 0.1:
                    outcome = "escaped"
                    break
            outcomes.append(outcome)
    if any(o == "escaped" for o in outcomes):
        return "escaped"
    if outcomes and all(o == "returned" for o in outcomes):
        return "returned"
    return "inconclusive"


def classify_stability(state: StateVector, params: ModelParams,
                       jacobian: np.ndarray | None = None, *,
                       probe: bool = True,
                       regime: StepRegime = StepRegime.GENERAL) -> StabilityResult:
    """Spectral classification with an empirical cross-check.

    Stable iff the spectral radius clears 1 - STABILITY_BAND; Unstable iff
    it exceeds 1 + STABILITY_BAND; Marginal in between.  When requested,
    8 perturbed initial conditions are iterated and compared against the
    spectral verdict.
    """
    if jacobian is None:
        try:
            jacobian = jacobian_v1(state, params, regime)
        except NonRegularPointError:
            outcome = _probe_stability(state, params, regime) if probe else None
            return StabilityResult(Stability.NON_REGULAR, None, outcome, None)
    rho = float(np.max(np.abs(np.linalg.eigvals(jacobian))))
    if rho < 1.0 - STABILITY_BAND:
        tag = Stability.STABLE
    elif rho > 1.0 + STABILITY_BAND:
        tag = Stability.UNSTABLE
    else:
        tag = Stability.MARGINAL
    outcome = None
    agrees = None
    if probe:
        outcome = _probe_stability(state, params, regime)
        if tag == Stability.STABLE:
            agrees = outcome == "returned"
        elif tag == Stability.UNSTABLE:
            agrees = outcome == "escaped"
    return StabilityResult(tag, rho, outcome, agrees)


# === sensitivity in the high-cost group's homophily ======================

@dataclass
class SensitivityResult:
    """Derivative of the steady-state g*(1) in the green homophily.

    sign follows the comparator pi_g g*(1) - pi_b b*(1) at regular points
    and the finite-difference estimate otherwise (then flagged).
    """

    sign: int
    comparator: float | None
    ift_estimate: float | None
    fd_estimate: float | None
    flagged_non_regular: bool = False


def _with_green_homophily(params: ModelParams, hg: float) -> ModelParams:
    gp = params.green
    return ModelParams(p=params.p,
                       green=GroupParams(gp.cost, gp.pi, gp.degree, hg),
                       blue=params.blue)


def homophily_sensitivity(state: StateVector, params: ModelParams,
                          jacobian: np.ndarray | None = None, *,
                          tol: float = 1e-12, max_iter: int = 10 ** 5,
                          fd_step: float = FD_HOMOPHILY_STEP) -> SensitivityResult:
    """d g*(1) / d h_g at a steady state, by two routes.

    Implicit function theorem: (I - J) u = dStep/dh_g with
    dStep_g/dh_g = d_g (1-A)^(d_g-1) (pi_g g1 - pi_b b1) and zero blue
    forcing; and a central finite-difference re-solve at h_g +/- fd_step
    warm-started from the given state.  Groups are normalized so green is
    the high-cost group.
    """
    cls = classify_regime(params)
    if cls.tag is RegimeTag.SPLIT and cls.high_cost_group is Group.BLUE:
        return homophily_sensitivity(state.swapped(), params.swapped(),
                                     None if jacobian is None else jacobian[::-1, ::-1],
                                     tol=tol, max_iter=max_iter, fd_step=fd_step)
    gp, bp = params.green, params.blue
    comparator = gp.pi * state.g1 - bp.pi * state.b1
    ift = None
    flagged = False
    if jacobian is None:
        try:
            jacobian = jacobian_v1(state, params)
        except NonRegularPointError:
            flagged = True
    if jacobian is not None and cls.tag is RegimeTag.SPLIT and gp.cost < 1.0:
        a = gp.homophily * gp.pi * state.g1 + (1.0 - gp.homophily) * bp.pi * state.b1
        forcing = gp.degree * max(0.0, 1.0 - a) ** (gp.degree - 1) * comparator
        try:
            u = np.linalg.solve(np.eye(2) - jacobian, np.array([forcing, 0.0]))
            ift = float(u[0])
        except np.linalg.LinAlgError:
            ift = None
    hg = gp.homophily
    h_hi = min(1.0, hg + fd_step)
    h_lo = max(0.0, hg - fd_step)
    fd = None
    if h_hi > h_lo:
        sols = []
        for h in (h_hi, h_lo):
            rep = solve_steady_state(_with_green_homophily(params, h),
                                     initial=state, tol=tol, max_iter=max_iter,
                                     compute_sensitivity=False, probe=False)
            sols.append(rep.state.g1 if rep.converged else None)
        if sols[0] is not None and sols[1] is not None:
            fd = (sols[0] - sols[1]) / (h_hi - h_lo)
    if not flagged:
        sign = Sign.ZERO if abs(comparator) <= 1e-12 else (
            Sign.POSITIVE if comparator > 0 else Sign.NEGATIVE)
    else:
        basis = fd if fd is not None else 0.0
        sign = Sign.ZERO if abs(basis) <= 1e-9 else (
            Sign.POSITIVE if basis > 0 else Sign.NEGATIVE)
    return SensitivityResult(sign=sign, comparator=comparator, ift_estimate=ift,
                             fd_estimate=fd, flagged_non_regular=flagged)


# === fixed-point solving =================================================

@dataclass
class SteadyStateReport:
    state: StateVector
    residual: float
    converged: bool
    iterations: int
    regime: Regime
    relabeled: bool
    jacobian: np.ndarray | None
    stability: StabilityResult
    sensitivity: SensitivityResult | None
    notes: tuple[str, ...] = ()


def solve_steady_state(params: ModelParams, initial: StateVector | None = None,
                       tol: float = 1e-12, max_iter: int = 10 ** 6, *,
                       compute_sensitivity: bool = True,
                       probe: bool = True) -> SteadyStateReport:
    """Damped fixed-point iteration of the regime-routed step map.

    Plain iteration switches to half-step damping after 10^4 sweeps if
    still unconverged.  In the split regime a candidate close to the
    simplified fixed point is snapped onto its bisection-refined value
    whenever the b(1) = 1 manifold is self-consistent there and the
    general-map residual stays within tolerance.  Non-convergence is
    reported, never raised.
    """
    validate_params(params)
    cls = classify_regime(params)
    if cls.tag is RegimeTag.SPLIT and cls.high_cost_group is Group.BLUE:
        rep = solve_steady_state(params.swapped(),
                                 None if initial is None else initial.swapped(),
                                 tol=tol, max_iter=max_iter,
                                 compute_sensitivity=compute_sensitivity,
                                 probe=probe)
        return SteadyStateReport(
            state=rep.state.swapped(), residual=rep.residual,
            converged=rep.converged, iterations=rep.iterations,
            regime=cls, relabeled=True,
            jacobian=None if rep.jacobian is None else rep.jacobian[::-1, ::-1],
            stability=rep.stability, sensitivity=rep.sensitivity,
            notes=rep.notes)
    x = default_initial_state(params) if initial is None else validate_state(initial)
    notes: list[str] = []
    converged = False
    residual = math.inf
    iterations = 0
    for k in range(max_iter):
        fx = general_step(x, params)
        residual = sup_distance(fx, x)
        iterations = k + 1
        if residual <= tol:
            converged = True
            break
        x = fx if k < 10_000 else StateVector(
            *(0.5 * (a + b) for a, b in zip(x.as_tuple(), fx.as_tuple())))
    if not converged:
        notes.append(f"no convergence after {iterations} iterations; "
                     f"residual {residual:.3e}")
    if cls.tag is RegimeTag.SPLIT and converged:
        sfp = simplified_fixed_point(params)
        if sup_distance(x, sfp) <= 1e-6 and check_simplified_applicable(params, sfp):
            refined_residual = sup_distance(general_step(sfp, params), sfp)
            if refined_residual <= tol:
                x = sfp
                residual = refined_residual
                notes.append("refined on the simplified b(1)=1 manifold")
    for grp, gp in (("green", params.green), ("blue", params.blue)):
        if gp.pi == 0.0:
            notes.append(f"{grp} group has no high-cost members (pi = 0)")
    jac: np.ndarray | None
    try:
        jac = jacobian_v1(x, params)
    except NonRegularPointError as err:
        jac = None
        notes.append(f"non-regular point: {err}")
    stability = classify_stability(x, params, jacobian=jac, probe=probe)
    if stability.probe_agrees is False:
        notes.append(f"stability probe outcome {stability.probe_outcome!r} "
                     "disagrees with the spectral verdict")
    sensitivity = None
    if compute_sensitivity:
        sensitivity = homophily_sensitivity(x, params, jacobian=jac,
                                            tol=tol, max_iter=min(max_iter, 10 ** 5))
    return SteadyStateReport(state=x, residual=residual, converged=converged,
                             iterations=iterations, regime=cls, relabeled=False,
                             jacobian=jac, stability=stability,
                             sensitivity=sensitivity, notes=tuple(notes))


def find_steady_states(params: ModelParams, tol: float = 1e-12,
                       max_iter: int = 10 ** 6, *,
                       probe: bool = True) -> list[SteadyStateReport]:
    """Solve from the prior-based and the high-adoption seeds; deduplicate.

    Distinct fixed points (sup distance above 1e-8) each get a report, in
    seed order; a non-converged run keeps its flagged report.
    """
    seeds = [default_initial_state(params), StateVector(1.0, 1.0, 1.0, 1.0)]
    reports: list[SteadyStateReport] = []
    for seed in seeds:
        rep = solve_steady_state(params, initial=seed, tol=tol, max_iter=max_iter,
                                 probe=probe)
        duplicate = any(r.converged and rep.converged
                        and sup_distance(r.state, rep.state) <= 1e-8
                        for r in reports)
        if not duplicate:
            reports.append(rep)
    return reports


# === closed forms under full homophily ===================================

@dataclass
class FullHomophilyFixedPoint:
    g0: float
    g1: float
    stability: str
    slope: float


def full_homophily_steady_states(group: GroupParams, p: float) -> list[FullHomophilyFixedPoint]:
    """Steady states of one isolated group (homophily 1), in closed form.

    Cost at or below p: the unique steady state is ((1-pi)^d, 1).  Cost
    above p: the origin always; when pi*d > 1 it repels and the positive
    root of g = 1 - (1 - pi g)^d (found by bisection) attracts.
    """
    if group.homophily != 1.0:
        raise RegimeError("full_homophily_steady_states requires homophily 1")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p out of open interval (0, 1): {p!r}")
    if group.pi == 1.0 and group.degree == 1:
        raise RegimeError("continuum of steady states: with pi = 1 and degree = 1 "
                          "every g(1) in [0, 1] is a fixed point")
    if group.cost <= p:
        return [FullHomophilyFixedPoint((1.0 - group.pi) ** group.degree, 1.0,
                                        Stability.STABLE, 0.0)]

    def gamma(g: float) -> float:
        return 1.0 - (1.0 - group.pi * g) ** group.degree

    def slope(g: float) -> float:
        return group.degree * group.pi * (1.0 - group.pi * g) ** (group.degree - 1)

    def tag(s: float) -> str:
        if s < 1.0 - STABILITY_BAND:
            return Stability.STABLE
        if s > 1.0 + STABILITY_BAND:
            return Stability.UNSTABLE
        return Stability.MARGINAL

    out = [FullHomophilyFixedPoint(0.0, 0.0, tag(slope(0.0)), slope(0.0))]
    if group.pi * group.degree > 1.0:
        g_star = _bisect_largest_root(lambda g: gamma(g) - g)
        out.append(FullHomophilyFixedPoint(0.0, g_star, tag(slope(g_star)),
                                           slope(g_star)))
    return out


def degree_threshold(pi_g: float, pi_b: float) -> float:
    """Observation degree above which more green homophily raises green
    adoption: log((pi_g - pi_b)/pi_g) / log(1 - pi_b).

    Infinite when the green informativeness never overtakes the blue one.
    """
    if not 0.0 < pi_b < 1.0:
        raise ValueError(f"pi_b must lie strictly inside (0, 1), got {pi_b!r}")
    if not 0.0 <= pi_g <= 1.0:
        raise ValueError(f"pi_g out of [0, 1]: {pi_g!r}")
    if pi_g <= pi_b:
        return math.inf
    return math.log((pi_g - pi_b) / pi_g) / math.log(1.0 - pi_b)


# === homophily/degree sweeps =============================================

@dataclass
class SweepRow:
    hg: float
    dg: int
    report: SteadyStateReport


@dataclass
class SweepResult:
    base_params: ModelParams
    rows: list[SweepRow]


def sweep(base_params: ModelParams, hg_values=None, dg_values=None, *,
          tol: float = 1e-12, max_iter: int = 10 ** 6,
          probe: bool = False) -> SweepResult:
    """Steady-state grid over the green homophily and degree.

    Rows are emitted in (d_g outer, h_g inner) order; every row is solved
    from the prior-based seed independently of its neighbors.  A row whose
    prior-based seed lands on an unstable point (the all-safe point is
    itself a fixed point, and at full homophily the seed starts exactly on
    it) is re-solved from the all-risky seed so the row reports the stable
    steady state when one is reachable.
    """
    validate_params(base_params)
    if hg_values is None:
        hg_values = [i / 10 for i in range(11)]
    if dg_values is None:
        dg_values = [1, 2, 4, 8]
    rows = []
    for dg in dg_values:
        for hg in hg_values:
            gp = base_params.green
            variant = ModelParams(
                p=base_params.p,
                green=GroupParams(gp.cost, gp.pi, int(dg), float(hg)),
                blue=base_params.blue)
            rep = solve_steady_state(variant, tol=tol, max_iter=max_iter,
                                     probe=probe)
            if rep.converged and rep.stability.tag != Stability.STABLE:
                alt = solve_steady_state(variant,
                                         initial=StateVector(1.0, 1.0, 1.0, 1.0),
                                         tol=tol, max_iter=max_iter, probe=probe)
                if alt.converged and alt.stability.tag == Stability.STABLE:
                    rep = alt
            rows.append(SweepRow(hg=float(hg), dg=int(dg), report=rep))
    return SweepResult(base_params=base_params, rows=rows)
