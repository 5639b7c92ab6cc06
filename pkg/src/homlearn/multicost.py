"""Many costs, many values: the general type-space extension.

Types are (group, cost) pairs; the risky payoff v ranges over a finite
value set with a common prior.  Each type has its own observation degree
and its own friend distribution over types.  A state is now a policy
alpha(group, cost, v): the fraction of that type taking the risky action
when the realized value is v.

Complete learning is the policy alpha = 1{cost < v}.  The analysis here
checks when it is a (stable) steady state: exactly when no type observes,
with positive probability, another type whose cost sits on the other side
of some possible value (perfect cost homophily).  The color-blind
construction shows group homophily arising incidentally from cost sorting
alone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .params import Group, ModelParams, RegimeError
from .signals import Action, Outcome, UNDERFLOW_FLOOR, decide

GROUP_INDEX = {Group.GREEN: 0, Group.BLUE: 1}
GROUPS = (Group.GREEN, Group.BLUE)


@dataclass
class CostValueModel:
    """Type space, value prior, and who observes whom.

    cost_probs[group][i] is the probability a group member draws costs[i];
    degrees[group][i] the observation degree of that type; friend_dist
    maps each (group, cost index) to its per-draw distribution over
    observed types, keyed the same way.
    """

    values: tuple[float, ...]
    value_prior: tuple[float, ...]
    costs: tuple[float, ...]
    lambda_g: float
    lambda_b: float
    cost_probs: dict[Group, tuple[float, ...]]
    degrees: dict[Group, tuple[int, ...]]
    friend_dist: dict[tuple[Group, int], dict[tuple[Group, int], float]]

    def type_keys(self) -> list[tuple[Group, int]]:
        return [(grp, ci) for grp in GROUPS for ci in range(len(self.costs))]

    def group_share(self, group: Group) -> float:
        return self.lambda_g if group is Group.GREEN else self.lambda_b


@dataclass
class StatePolicy:
    """alpha[group index, cost index, value index] in [0, 1]."""

    alpha: np.ndarray

    def get(self, group: Group, ci: int, vi: int) -> float:
        return float(self.alpha[GROUP_INDEX[group], ci, vi])

    def copy(self) -> "StatePolicy":
        return StatePolicy(self.alpha.copy())


def policy_distance(a: StatePolicy, b: StatePolicy) -> float:
    return float(np.max(np.abs(a.alpha - b.alpha)))


def validate_cost_value_model(model: CostValueModel) -> CostValueModel:
    if len(set(model.values)) != len(model.values):
        raise ValueError("values must be distinct")
    if len(model.value_prior) != len(model.values):
        raise ValueError("value_prior length must match values")
    if any(p < 0.0 for p in model.value_prior) \
            or abs(sum(model.value_prior) - 1.0) > 1e-9:
        raise ValueError("value_prior must be nonnegative and sum to 1")
    if len(set(model.costs)) != len(model.costs):
        raise ValueError("costs must be distinct")
    if any(c <= 0.0 for c in model.costs):
        raise ValueError("costs must be strictly positive")
    if set(model.values) & set(model.costs):
        raise ValueError("values and costs must be disjoint sets")
    if model.lambda_g <= 0.0 or model.lambda_b <= 0.0 \
            or abs(model.lambda_g + model.lambda_b - 1.0) > 1e-9:
        raise ValueError("group shares must be positive and sum to 1")
    for grp in GROUPS:
        probs = model.cost_probs[grp]
        if len(probs) != len(model.costs):
            raise ValueError(f"cost_probs[{grp.value}] length must match costs")
        if any(q < 0.0 for q in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"cost_probs[{grp.value}] must be nonnegative and sum to 1")
        ds = model.degrees[grp]
        if len(ds) != len(model.costs):
            raise ValueError(f"degrees[{grp.value}] length must match costs")
        if any(not (isinstance(d, int) and d >= 1) for d in ds):
            raise ValueError(f"degrees[{grp.value}] must be integers >= 1")
    for key in model.type_keys():
        row = model.friend_dist.get(key)
        if row is None:
            raise ValueError(f"friend_dist missing row for {key[0].value}/cost {key[1]}")
        if any(w < 0.0 for w in row.values()) or abs(sum(row.values()) - 1.0) > 1e-9:
            raise ValueError(
                f"friend_dist[{key[0].value}/cost {key[1]}] must be nonnegative "
                "and sum to 1")
        for tgt in row:
            if tgt[0] not in GROUP_INDEX or not 0 <= tgt[1] < len(model.costs):
                raise ValueError(f"friend_dist target {tgt!r} is not a type")
    return model


def check_assumption_nontrivial(model: CostValueModel) -> bool:
    """Every cost is strictly straddled by values carrying prior mass."""
    support = [v for v, q in zip(model.values, model.value_prior) if q > 0.0]
    lo, hi = min(support), max(support)
    return all(lo < c < hi for c in model.costs)


def complete_learning_policy(model: CostValueModel) -> StatePolicy:
    """Everyone acts as if v were known: risky exactly when cost < v."""
    alpha = np.zeros((2, len(model.costs), len(model.values)))
    for ci, c in enumerate(model.costs):
        for vi, v in enumerate(model.values):
            if c < v:
                alpha[:, ci, vi] = 1.0
    return StatePolicy(alpha)


def mc_posterior(profile: list[tuple[Outcome, Group, int]],
                 model: CostValueModel, policy: StatePolicy) -> np.ndarray | None:
    """Posterior over values given observed (outcome, group, cost) triples.

    A '+' from type (g, c) has likelihood alpha(g, c, v) when v > c and 0
    otherwise; '-' mirrors it below c; no report carries 1 - alpha.
    Profiles impossible under every value return None (off-path).
    """
    weights = np.array(model.value_prior, dtype=float)
    for outcome, grp, ci in profile:
        cost = model.costs[ci]
        gi = GROUP_INDEX[grp]
        alpha = policy.alpha[gi, ci, :]
        if outcome is Outcome.PLUS:
            lik = np.where(np.array(model.values) > cost, alpha, 0.0)
        elif outcome is Outcome.MINUS:
            lik = np.where(np.array(model.values) < cost, alpha, 0.0)
        else:
            lik = 1.0 - alpha
        weights = weights * lik
    total = float(weights.sum())
    if total <= UNDERFLOW_FLOOR:
        return None
    return weights / total


def _compositions(total: int, bins: int) -> Iterator[tuple[int, ...]]:
    if bins == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, bins - 1):
            yield (head,) + rest


def _multinomial(total: int, counts: tuple[int, ...]) -> float:
    out = 1
    remaining = total
    for c in counts:
        out *= math.comb(remaining, c)
        remaining -= c
    return float(out)


def mc_step(policy: StatePolicy, model: CostValueModel) -> StatePolicy:
    """One generation: every type, under every realized value, draws its
    friends, forms the posterior, and acts; returns the next policy.

    Off-path profiles (possible only under zero-prior values) fall back to
    the prior-mean default action.
    """
    values = np.array(model.values, dtype=float)
    prior_mean = float(np.dot(values, model.value_prior))
    nxt = np.zeros_like(policy.alpha)
    for grp, ci in model.type_keys():
        gi = GROUP_INDEX[grp]
        cost = model.costs[ci]
        d = model.degrees[grp][ci]
        row = model.friend_dist[(grp, ci)]
        linked = [key for key in model.type_keys() if row.get(key, 0.0) > 0.0]
        for vi in range(len(model.values)):
            # categories: each linked type, taking or safe, under true value vi
            cat_prob: list[float] = []
            cat_obs: list[tuple[Outcome, Group, int]] = []
            for key in linked:
                h = row[key]
                a = policy.alpha[GROUP_INDEX[key[0]], key[1], vi]
                sign = Outcome.PLUS if values[vi] > model.costs[key[1]] else Outcome.MINUS
                cat_prob.append(h * a)
                cat_obs.append((sign, key[0], key[1]))
                cat_prob.append(h * (1.0 - a))
                cat_obs.append((Outcome.NONE, key[0], key[1]))
            taken = 0.0
            for counts in _compositions(d, len(cat_prob)):
                prob = _multinomial(d, counts)
                for n, q in zip(counts, cat_prob):
                    if n:
                        prob *= q ** n
                if prob == 0.0:
                    continue
                profile = [obs for n, obs in zip(counts, cat_obs) for _ in range(n)]
                post = mc_posterior(profile, model, policy)
                if post is None:
                    act = decide(prior_mean, cost)
                else:
                    act = decide(float(np.dot(post, values)), cost)
                if act is Action.RISKY:
                    taken += prob
            nxt[gi, ci, vi] = min(1.0, max(0.0, taken))
    return StatePolicy(nxt)


def is_perfect_cost_homophily(model: CostValueModel
                              ) -> tuple[bool, tuple | None]:
    """No observed link straddles a possible value.

    Returns (True, None) or (False, witness) where the witness is
    (observer type, observed type, straddled value).
    """
    support = [v for v, q in zip(model.values, model.value_prior) if q > 0.0]
    for key in model.type_keys():
        c = model.costs[key[1]]
        for tgt, w in sorted(model.friend_dist[key].items(),
                             key=lambda kv: (GROUP_INDEX[kv[0][0]], kv[0][1])):
            if w <= 0.0:
                continue
            c2 = model.costs[tgt[1]]
            lo, hi = min(c, c2), max(c, c2)
            for v in support:
                if lo < v < hi:
                    return False, (key, tgt, v)
    return True, None


@dataclass
class CompleteLearningVerdict:
    residual: float
    is_fixed_point: bool
    perfect_cost_homophily: bool
    witness: tuple | None
    probes_total: int
    probes_converged: int
    stable: bool
    break_entry: tuple | None


def verify_complete_learning(model: CostValueModel, *, probes: int = 20,
                             eps: float = 1e-2, max_iter: int = 1000,
                             conv_tol: float = 1e-6,
                             seed: int = 0) -> CompleteLearningVerdict:
    """Is complete learning a steady state, and does it attract?

    Requires every degree above 1 and straddling values for every cost.
    The fixed-point residual is measured exactly; stability is probed from
    random policy perturbations of sup-norm size eps.  When some link
    violates perfect cost homophily, the returned witness pinpoints it and
    break_entry reports the policy entry that moves away.
    """
    validate_cost_value_model(model)
    for grp in GROUPS:
        if any(d <= 1 for d in model.degrees[grp]):
            raise ValueError("verify_complete_learning requires every degree > 1")
    if not check_assumption_nontrivial(model):
        raise ValueError("every cost must be strictly straddled by supported values")
    cl = complete_learning_policy(model)
    stepped = mc_step(cl, model)
    residual = policy_distance(stepped, cl)
    is_fp = residual <= 1e-12
    pch, witness = is_perfect_cost_homophily(model)
    break_entry = None
    if not is_fp:
        diff = np.abs(stepped.alpha - cl.alpha)
        gi, ci, vi = np.unravel_index(int(np.argmax(diff)), diff.shape)
        break_entry = ((GROUPS[gi], int(ci), int(vi)),
                       float(cl.alpha[gi, ci, vi]),
                       float(stepped.alpha[gi, ci, vi]))
    rng = np.random.default_rng(seed)
    converged = 0
    probes_run = probes if is_fp else 0
    for _ in range(probes_run):
        pert = cl.alpha + eps * rng.uniform(-1.0, 1.0, size=cl.alpha.shape)
        x = StatePolicy(np.clip(pert, 0.0, 1.0))
        ok = False
        for _ in range(max_iter):
            nxt = mc_step(x, model)
            if policy_distance(nxt, cl) <= conv_tol:
                ok = True
                break
            if policy_distance(nxt, x) <= 1e-15:
                break
            x = nxt
        converged += ok
    return CompleteLearningVerdict(
        residual=residual, is_fixed_point=is_fp, perfect_cost_homophily=pch,
        witness=witness, probes_total=probes_run, probes_converged=converged,
        stable=is_fp and probes_run > 0 and converged == probes_run,
        break_entry=break_entry)


# === color-blind perfect cost homophily ==================================

def colorblind_pch_friend_dist(model: CostValueModel
                               ) -> dict[tuple[Group, int], dict[tuple[Group, int], float]]:
    """Friend distribution of someone who picks same-cost friends at random,
    ignoring group: the chance the friend is from group t is proportional
    to lambda_t * Pr_t(c)."""
    dist: dict[tuple[Group, int], dict[tuple[Group, int], float]] = {}
    for grp, ci in [(g, i) for g in GROUPS for i in range(len(model.costs))]:
        total = sum(model.group_share(t) * model.cost_probs[t][ci] for t in GROUPS)
        if total <= 0.0:
            dist[(grp, ci)] = {(grp, ci): 1.0}
            continue
        dist[(grp, ci)] = {
            (t, ci): model.group_share(t) * model.cost_probs[t][ci] / total
            for t in GROUPS}
    return dist


def with_colorblind_pch(model: CostValueModel) -> CostValueModel:
    out = replace(model, friend_dist=colorblind_pch_friend_dist(model))
    return validate_cost_value_model(out)


def _require_colorblind(model: CostValueModel) -> None:
    expected = colorblind_pch_friend_dist(model)
    for key in model.type_keys():
        row = model.friend_dist[key]
        want = expected[key]
        for tgt in set(row) | set(want):
            if abs(row.get(tgt, 0.0) - want.get(tgt, 0.0)) > 1e-9:
                raise RegimeError(
                    "friend_dist is not the color-blind same-cost distribution "
                    f"(row {key[0].value}/cost {key[1]})")


def incidental_homophily(model: CostValueModel) -> dict[Group, float]:
    """Average own-group link probability under color-blind cost sorting:
    sum over costs of Pr_t(c) * h_{t,c}(t, c)."""
    validate_cost_value_model(model)
    _require_colorblind(model)
    out = {}
    for grp in GROUPS:
        total = 0.0
        for ci in range(len(model.costs)):
            own = model.friend_dist[(grp, ci)].get((grp, ci), 0.0)
            total += model.cost_probs[grp][ci] * own
        out[grp] = total
    return out


@dataclass
class CostHomophilyRow:
    cost: float
    ratio: float
    green_own: float
    blue_own: float


@dataclass
class HomophilyByCost:
    rows: list[CostHomophilyRow]
    lr_dominant: bool
    threshold_cost: float


def homophily_by_cost(model: CostValueModel) -> HomophilyByCost:
    """Own-group link probabilities per cost under color-blind sorting.

    With r(c) = Pr_g(c)/Pr_b(c): green own-cost homophily is
    lambda_g r / (lambda_g r + lambda_b) and blue's is
    lambda_b / (lambda_b + lambda_g r).  r is infinite where only greens
    carry the cost (ordered after every finite ratio); costs carried by
    neither group are omitted.  threshold_cost is the smallest cost with
    r >= 1; lr_dominant records whether r is nondecreasing in cost.
    """
    validate_cost_value_model(model)
    _require_colorblind(model)
    lam_g, lam_b = model.lambda_g, model.lambda_b
    rows = []
    order = sorted(range(len(model.costs)), key=lambda i: model.costs[i])
    for ci in order:
        pg = model.cost_probs[Group.GREEN][ci]
        pb = model.cost_probs[Group.BLUE][ci]
        if pg == 0.0 and pb == 0.0:
            continue
        ratio = math.inf if pb == 0.0 else pg / pb
        if math.isinf(ratio):
            green_own, blue_own = 1.0, 0.0
        else:
            green_own = lam_g * ratio / (lam_g * ratio + lam_b)
            blue_own = lam_b / (lam_b + lam_g * ratio)
        rows.append(CostHomophilyRow(model.costs[ci], ratio, green_own, blue_own))
    ratios = [row.ratio for row in rows]
    lr_dominant = all(a <= b for a, b in zip(ratios, ratios[1:]))
    threshold = next(row.cost for row in rows if row.ratio >= 1.0)
    return HomophilyByCost(rows=rows, lr_dominant=lr_dominant,
                           threshold_cost=threshold)


def from_binary_two_group(params: ModelParams) -> CostValueModel:
    """Embed the two-group binary-value model as a two-cost type space.

    Requires pi = 1 in both groups (the type space has no zero-cost slot:
    0 is a value and the cost and value sets must stay disjoint) and
    distinct group costs.  Group shares are immaterial to the dynamics and
    set evenly.
    """
    if params.green.pi != 1.0 or params.blue.pi != 1.0:
        raise RegimeError("binary embedding requires pi = 1 in both groups")
    if params.green.cost == params.blue.cost:
        raise RegimeError("binary embedding requires distinct group costs")
    costs = (params.blue.cost, params.green.cost)
    blue_ci, green_ci = 0, 1
    friend_dist = {}
    for grp, h in ((Group.GREEN, params.green.homophily),
                   (Group.BLUE, params.blue.homophily)):
        own_ci = green_ci if grp is Group.GREEN else blue_ci
        other_ci = blue_ci if grp is Group.GREEN else green_ci
        row = {(grp, own_ci): h, (grp.other, other_ci): 1.0 - h}
        for ci in (0, 1):
            friend_dist[(grp, ci)] = dict(row)
    model = CostValueModel(
        values=(0.0, 1.0),
        value_prior=(1.0 - params.p, params.p),
        costs=costs,
        lambda_g=0.5, lambda_b=0.5,
        cost_probs={Group.GREEN: (0.0, 1.0), Group.BLUE: (1.0, 0.0)},
        degrees={Group.GREEN: (params.green.degree, params.green.degree),
                 Group.BLUE: (params.blue.degree, params.blue.degree)},
        friend_dist=friend_dist)
    return validate_cost_value_model(model)
