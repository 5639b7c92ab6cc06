import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_params, random_state
from homlearn import (
    Group,
    GroupParams,
    ModelParams,
    RegimeError,
    Stability,
    StateVector,
    StepRegime,
    classify_stability,
    degree_threshold,
    find_steady_states,
    full_homophily_steady_states,
    general_step,
    homophily_sensitivity,
    jacobian_v1,
    regularity_margin,
    simplified_fixed_point,
    solve_steady_state,
    sup_distance,
    sweep,
)
from homlearn.equilibrium import NonRegularPointError, Sign
from oracles import fd_jacobian_v1
from test_dynamics import FIG1, monotone_state, split_params
from test_params import make_params


def fig1_params(hg, dg):
    return make_params(cg=0.7, cb=0.1, p=0.5, pig=0.6, pib=0.3,
                       dg=dg, db=2, hg=hg, hb=0.5)


class TestJacobian:
    def test_simplified_green_partial_worked_value(self):
        fp = simplified_fixed_point(FIG1)
        jac = jacobian_v1(fp, FIG1, StepRegime.SIMPLIFIED_SPLIT)
        # d_g (1-A)^(d_g-1) h_g pi_g with A at the fixed point
        assert jac[0, 0] == pytest.approx(0.4169, abs=5e-5)
        assert jac[0, 1] == 0.0
        assert np.all(jac[1] == 0.0)

    def test_general_matches_finite_differences_at_figure_one(self):
        rep = solve_steady_state(FIG1, probe=False)
        jac = jacobian_v1(rep.state, FIG1)
        fd = fd_jacobian_v1(general_step, rep.state, FIG1)
        assert np.max(np.abs(jac - fd)) < 1e-5

    @given(st.integers(0, 2 ** 32 - 1))
    def test_matches_finite_differences_at_regular_points(self, seed):
        rng = np.random.default_rng(seed)
        params = random_params(rng, low_costs_only=bool(rng.random() < 0.7))
        g0, g1, b0, b1 = rng.uniform(0.05, 0.95, size=4)
        state = StateVector(float(g0), float(g1), float(b0), float(b1))
        if regularity_margin(state, params) <= 1e-4:
            return
        try:
            jac = jacobian_v1(state, params)
        except NonRegularPointError:
            return
        fd = fd_jacobian_v1(general_step, state, params)
        assert np.max(np.abs(jac - fd)) < 1e-5

    @given(st.integers(0, 2 ** 32 - 1))
    def test_entries_nonnegative_below_unit_cost(self, seed):
        # the sign results cover costs below the good-state payoff
        rng = np.random.default_rng(seed)
        params = random_params(rng, low_costs_only=True)
        state = monotone_state(rng)
        if regularity_margin(state, params) <= 1e-6:
            return
        try:
            jac = jacobian_v1(state, params)
        except NonRegularPointError:
            return
        assert np.all(jac >= -1e-12)

    def test_tie_with_cost_is_flagged_non_regular(self):
        # c_b = p puts the all-zero tally's belief exactly at the cost
        params = make_params(cb=0.4, p=0.4)
        state = StateVector(0.0, 0.5, 0.7, 1.0)
        with pytest.raises(NonRegularPointError):
            jacobian_v1(state, params)
        res = classify_stability(state, params, probe=False)
        assert res.tag == Stability.NON_REGULAR
        assert res.spectral_radius is None


class TestStability:
    def test_figure_one_fixed_point_is_stable(self):
        rep = solve_steady_state(FIG1)
        assert rep.stability.tag == Stability.STABLE
        assert rep.stability.spectral_radius == pytest.approx(0.417, abs=5e-4)
        assert rep.stability.probe_agrees is True

    def test_full_homophily_origin_unstable_interior_stable(self):
        grp = GroupParams(cost=0.8, pi=0.6, degree=3, homophily=1.0)
        points = full_homophily_steady_states(grp, 0.4)
        assert len(points) == 2
        origin, interior = points
        assert origin.g1 == 0.0 and origin.stability == Stability.UNSTABLE
        assert origin.slope == pytest.approx(1.8)  # pi * d
        assert interior.stability == Stability.STABLE
        assert interior.g1 == pytest.approx(0.9043, abs=5e-5)


class TestFullHomophilyClosedForms:
    def test_low_cost_unique(self):
        grp = GroupParams(cost=0.3, pi=0.5, degree=2, homophily=1.0)
        points = full_homophily_steady_states(grp, 0.4)
        assert len(points) == 1
        assert points[0].g0 == pytest.approx(0.25)
        assert points[0].g1 == 1.0
        assert points[0].stability == Stability.STABLE

    def test_high_cost_subcritical_unique_origin(self):
        grp = GroupParams(cost=0.8, pi=0.3, degree=3, homophily=1.0)
        points = full_homophily_steady_states(grp, 0.4)
        assert len(points) == 1
        assert points[0].g1 == 0.0
        assert points[0].stability == Stability.STABLE

    def test_continuum_case_rejected(self):
        grp = GroupParams(cost=0.8, pi=1.0, degree=1, homophily=1.0)
        with pytest.raises(RegimeError, match="continuum"):
            full_homophily_steady_states(grp, 0.4)

    def test_partial_homophily_rejected(self):
        grp = GroupParams(cost=0.8, pi=0.6, degree=3, homophily=0.99)
        with pytest.raises(RegimeError):
            full_homophily_steady_states(grp, 0.4)

    @given(st.integers(0, 2 ** 32 - 1))
    def test_returned_points_are_fixed(self, seed):
        rng = np.random.default_rng(seed)
        pi = float(rng.uniform(0.05, 1.0))
        d = int(rng.integers(1, 8))
        if pi == 1.0 and d == 1:
            return
        cost = float(rng.choice([rng.uniform(0.02, 0.39), rng.uniform(0.41, 0.98)]))
        grp = GroupParams(cost=cost, pi=pi, degree=d, homophily=1.0)
        for pt in full_homophily_steady_states(grp, 0.4):
            if grp.cost <= 0.4:
                assert pt.g1 == 1.0
                assert pt.g0 == pytest.approx((1 - pi) ** d, abs=1e-12)
            else:
                gamma = 1.0 - (1.0 - pi * pt.g1) ** d
                assert gamma == pytest.approx(pt.g1, abs=1e-9)


class TestSolver:
    def test_figure_one_report(self):
        rep = solve_steady_state(FIG1)
        assert rep.converged
        assert rep.state.g1 == pytest.approx(0.5172, abs=5e-5)
        assert rep.state.b1 == 1.0
        assert rep.state.g0 == 0.0
        assert rep.state.b0 == pytest.approx((1 - 0.5 * 0.3) ** 2, abs=1e-9)
        assert rep.residual <= 1e-12

    def test_zero_information_fixed_point_is_default(self):
        params = make_params(pig=0.0, pib=0.0)
        rep = solve_steady_state(params)
        assert rep.converged
        assert rep.state.as_tuple() == (0.0, 0.0, 1.0, 1.0)

    def test_full_homophily_routing_agrees_with_closed_forms(self):
        params = ModelParams(
            p=0.4,
            green=GroupParams(cost=0.8, pi=0.6, degree=3, homophily=1.0),
            blue=GroupParams(cost=0.9, pi=0.7, degree=2, homophily=1.0))
        reports = find_steady_states(params, probe=False)
        g_points = {round(pt.g1, 9)
                    for pt in full_homophily_steady_states(params.green, 0.4)}
        b_points = {round(pt.g1, 9)
                    for pt in full_homophily_steady_states(params.blue, 0.4)}
        for rep in reports:
            assert rep.converged
            assert any(abs(rep.state.g1 - g) <= 1e-9 for g in g_points)
            assert any(abs(rep.state.b1 - b) <= 1e-9 for b in b_points)
        assert len(reports) == 2

    def test_non_convergence_is_flagged_not_raised(self):
        rep = solve_steady_state(FIG1, initial=StateVector(0, 0.01, 0.5, 1.0),
                                 max_iter=2, probe=False,
                                 compute_sensitivity=False)
        assert not rep.converged
        assert rep.residual > 1e-12
        assert rep.iterations == 2

    def test_relabeling_equivariance(self):
        rep = solve_steady_state(FIG1, probe=False)
        rep_sw = solve_steady_state(FIG1.swapped(), probe=False)
        assert rep_sw.relabeled
        assert sup_distance(rep_sw.state, rep.state.swapped()) <= 1e-12
        assert rep_sw.stability.tag == rep.stability.tag
        assert rep_sw.sensitivity.sign == rep.sensitivity.sign

    @given(st.integers(0, 2 ** 32 - 1))
    def test_reported_state_is_a_fixed_point(self, seed):
        rng = np.random.default_rng(seed)
        params = split_params(rng)
        rep = solve_steady_state(params, probe=False, compute_sensitivity=False,
                                 max_iter=10 ** 5)
        if rep.converged:
            nxt = general_step(rep.state, params)
            assert sup_distance(nxt, rep.state) <= 1e-10


class TestSensitivity:
    def test_figure_one_signs_flip_across_threshold(self):
        rep1 = solve_steady_state(fig1_params(0.5, 1), probe=False)
        rep4 = solve_steady_state(fig1_params(0.5, 4), probe=False)
        assert rep1.sensitivity.sign == Sign.NEGATIVE
        assert rep4.sensitivity.sign == Sign.POSITIVE

    def test_ift_and_fd_agree(self):
        for dg in (2, 4):
            for hg in (0.3, 0.6):
                rep = solve_steady_state(fig1_params(hg, dg), probe=False)
                s = rep.sensitivity
                assert s.ift_estimate is not None and s.fd_estimate is not None
                assert abs(s.ift_estimate - s.fd_estimate) <= max(
                    1e-4, 0.01 * abs(s.fd_estimate))

    def test_symmetric_instance_has_zero_sign(self):
        sym = GroupParams(cost=0.8, pi=0.6, degree=3, homophily=0.5)
        params = ModelParams(p=0.4, green=sym, blue=sym)
        rep = solve_steady_state(params, initial=StateVector(1, 1, 1, 1),
                                 probe=False)
        assert rep.converged and rep.state.g1 > 0.0
        assert rep.state.g1 == pytest.approx(rep.state.b1, abs=1e-11)
        assert rep.sensitivity.sign == Sign.ZERO

    def test_sign_follows_comparator(self):
        rep = solve_steady_state(FIG1, probe=False)
        s = rep.sensitivity
        assert s.comparator == pytest.approx(
            0.6 * rep.state.g1 - 0.3 * rep.state.b1)
        want = Sign.POSITIVE if s.comparator > 0 else Sign.NEGATIVE
        assert s.sign == want


class TestDegreeThreshold:
    def test_figure_one_value(self):
        got = degree_threshold(0.6, 0.3)
        assert got == pytest.approx(math.log(0.5) / math.log(0.7), rel=1e-12)
        assert got == pytest.approx(1.9434, abs=5e-5)

    def test_no_informational_advantage_is_infinite(self):
        assert degree_threshold(0.3, 0.3) == math.inf
        assert degree_threshold(0.2, 0.3) == math.inf

    @pytest.mark.parametrize("pib", [0.0, 1.0])
    def test_degenerate_base_rejected(self, pib):
        with pytest.raises(ValueError):
            degree_threshold(0.6, pib)


class TestSweep:
    def test_figure_one_grid_shape_and_order(self):
        hg = [round(0.1 * k, 1) for k in range(11)]
        result = sweep(FIG1, hg_values=hg, dg_values=[1, 2, 4, 8])
        assert len(result.rows) == 44
        assert [r.dg for r in result.rows[:11]] == [1] * 11
        assert [r.hg for r in result.rows[:3]] == [0.0, 0.1, 0.2]
        assert all(r.report.converged for r in result.rows)

    def test_rows_independent_of_grid_shape(self):
        one = sweep(FIG1, hg_values=[0.5], dg_values=[2]).rows[0]
        many = sweep(FIG1, hg_values=[0.3, 0.5], dg_values=[1, 2]).rows
        match = [r for r in many if r.hg == 0.5 and r.dg == 2]
        assert len(match) == 1
        assert sup_distance(match[0].report.state, one.report.state) == 0.0
