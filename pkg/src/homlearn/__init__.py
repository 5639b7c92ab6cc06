"""Social learning with homophily in a two-group population.

Mean-field dynamics of risky-action adoption, steady-state solving with
stability and comparative statics, a many-cost type-space extension, and
a finite-population agent-based cross-check.
"""
from .params import (Group, GroupParams, ModelParams, ParamError, Regime,
                     RegimeError, RegimeTag, StateVector, classify_regime,
                     sup_distance, validate_params, validate_state)
from .signals import (Action, CategoryProbs, CostLabel, Outcome, Revealed,
                      SignalObservation, SignalTally, bayes_posterior,
                      category_probabilities, decide, enumerate_tallies,
                      posterior, profile_probability)
from .dynamics import (StepRegime, Trajectory, check_monotonicity,
                       check_simplified_applicable, default_initial_state,
                       general_step, iterate, simplified_fixed_point,
                       step_full_homophily, step_general, step_simplified)
from .equilibrium import (Sign, Stability, StabilityResult, SteadyStateReport,
                          SweepResult, classify_stability, degree_threshold,
                          find_steady_states, full_homophily_steady_states,
                          homophily_sensitivity, jacobian_v1,
                          regularity_margin, solve_steady_state, sweep)
from .multicost import (CompleteLearningVerdict, CostValueModel,
                        HomophilyByCost, StatePolicy,
                        check_assumption_nontrivial, colorblind_pch_friend_dist,
                        complete_learning_policy, from_binary_two_group,
                        homophily_by_cost, incidental_homophily,
                        is_perfect_cost_homophily, mc_posterior, mc_step,
                        validate_cost_value_model, verify_complete_learning,
                        with_colorblind_pch)
from .abm import (AbmResult, GenerationAgents, GenerationOutcome, SimConfig,
                  run_abm, sample_friends, simulate_generation)

__version__ = "0.1.0"

__all__ = [
    "Group", "GroupParams", "ModelParams", "ParamError", "Regime",
    "RegimeError", "RegimeTag", "StateVector", "classify_regime",
    "sup_distance", "validate_params", "validate_state",
    "Action", "CategoryProbs", "CostLabel", "Outcome", "Revealed",
    "SignalObservation", "SignalTally", "bayes_posterior",
    "category_probabilities", "decide", "enumerate_tallies", "posterior",
    "profile_probability",
    "StepRegime", "Trajectory", "check_monotonicity",
    "check_simplified_applicable", "default_initial_state", "general_step",
    "iterate", "simplified_fixed_point", "step_full_homophily",
    "step_general", "step_simplified",
    "Sign", "Stability", "StabilityResult", "SteadyStateReport",
    "SweepResult", "classify_stability", "degree_threshold",
    "find_steady_states", "full_homophily_steady_states",
    "homophily_sensitivity", "jacobian_v1", "regularity_margin",
    "solve_steady_state", "sweep",
    "CompleteLearningVerdict", "CostValueModel", "HomophilyByCost",
    "StatePolicy", "check_assumption_nontrivial",
    "colorblind_pch_friend_dist", "complete_learning_policy",
    "from_binary_two_group", "homophily_by_cost", "incidental_homophily",
    "is_perfect_cost_homophily", "mc_posterior", "mc_step",
    "validate_cost_value_model", "verify_complete_learning",
    "with_colorblind_pch",
    "AbmResult", "GenerationAgents", "GenerationOutcome", "SimConfig",
    "run_abm", "sample_friends", "simulate_generation",
]
