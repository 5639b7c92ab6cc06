import pytest
from hypothesis import given
from hypothesis import strategies as st

from homlearn import (
    Group,
    GroupParams,
    ModelParams,
    ParamError,
    RegimeTag,
    StateVector,
    classify_regime,
    sup_distance,
    validate_params,
    validate_state,
)


def make_params(cg=0.8, cb=0.3, p=0.4, **kw):
    return ModelParams(
        p=p,
        green=GroupParams(cost=cg, pi=kw.get("pig", 0.6),
                          degree=kw.get("dg", 2), homophily=kw.get("hg", 0.5)),
        blue=GroupParams(cost=cb, pi=kw.get("pib", 0.3),
                         degree=kw.get("db", 2), homophily=kw.get("hb", 0.5)),
    )


class TestValidation:
    def test_valid_params_pass_through(self):
        params = make_params()
        assert validate_params(params) is params

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.3])
    def test_prior_must_be_interior(self, p):
        with pytest.raises(ParamError, match="p out of open interval"):
            validate_params(make_params(p=p))

    def test_cost_must_be_positive(self):
        with pytest.raises(ParamError, match="green.cost"):
            validate_params(make_params(cg=0.0))
        with pytest.raises(ParamError, match="blue.cost"):
            validate_params(make_params(cb=-0.5))

    def test_cost_one_excluded(self):
        with pytest.raises(ParamError, match="equals 1"):
            validate_params(make_params(cg=1.0))

    def test_cost_above_one_allowed(self):
        validate_params(make_params(cg=1.5))

    @pytest.mark.parametrize("field,value", [("pig", -0.1), ("pib", 1.1)])
    def test_pi_bounds(self, field, value):
        with pytest.raises(ParamError, match=r"\.pi out of"):
            validate_params(make_params(**{field: value}))

    @pytest.mark.parametrize("degree", [0, -1, 2.0, 1.5])
    def test_degree_positive_integer(self, degree):
        with pytest.raises(ParamError, match="degree"):
            validate_params(make_params(dg=degree))

    @pytest.mark.parametrize("h", [-0.01, 1.01])
    def test_homophily_bounds(self, h):
        with pytest.raises(ParamError, match="homophily"):
            validate_params(make_params(hb=h))

    def test_state_bounds(self):
        validate_state(StateVector(0.0, 1.0, 0.5, 0.25))
        with pytest.raises(ParamError, match="state.b0"):
            validate_state(StateVector(0.0, 1.0, 1.5, 0.25))
        with pytest.raises(ParamError, match="state.g0"):
            validate_state(StateVector(-0.1, 1.0, 0.5, 0.25))


class TestStructure:
    def test_group_other_is_involution(self):
        assert Group.GREEN.other is Group.BLUE
        assert Group.BLUE.other is Group.GREEN
        for g in Group:
            assert g.other.other is g

    def test_params_swap_roundtrip(self):
        params = make_params()
        assert params.swapped().swapped() == params
        assert params.swapped().green == params.blue

    def test_state_swap_roundtrip(self):
        s = StateVector(0.1, 0.2, 0.3, 0.4)
        assert s.swapped() == StateVector(0.3, 0.4, 0.1, 0.2)
        assert s.swapped().swapped() == s

    def test_component_accessor(self):
        s = StateVector(0.1, 0.2, 0.3, 0.4)
        assert s.component(Group.GREEN, 0) == 0.1
        assert s.component(Group.GREEN, 1) == 0.2
        assert s.component(Group.BLUE, 0) == 0.3
        assert s.component(Group.BLUE, 1) == 0.4

    def test_sup_distance(self):
        a = StateVector(0.0, 0.0, 0.0, 0.0)
        b = StateVector(0.1, -0.2, 0.05, 0.0)
        assert sup_distance(a, b) == pytest.approx(0.2)
        assert sup_distance(a, a) == 0.0


class TestRegime:
    def test_both_sides(self):
        assert classify_regime(make_params(cg=0.2, cb=0.3)).tag is RegimeTag.BOTH_RISKY
        assert classify_regime(make_params(cg=0.8, cb=0.9)).tag is RegimeTag.BOTH_SAFE

    def test_split_records_high_cost_group(self):
        r = classify_regime(make_params(cg=0.8, cb=0.3))
        assert r.tag is RegimeTag.SPLIT and r.high_cost_group is Group.GREEN
        r = classify_regime(make_params(cg=0.3, cb=0.8))
        assert r.tag is RegimeTag.SPLIT and r.high_cost_group is Group.BLUE

    def test_cost_equal_to_prior_counts_as_risky_side(self):
        # ties at c = p go to the risky-by-default side, like decide()
        r = classify_regime(make_params(cg=0.4, cb=0.4, p=0.4))
        assert r.tag is RegimeTag.BOTH_RISKY

    @given(st.floats(0.01, 0.99), st.floats(0.01, 0.99),
           st.floats(0.02, 0.98))
    def test_regime_swap_equivariance(self, cg, cb, p):
        params = make_params(cg=cg, cb=cb, p=p)
        r = classify_regime(params)
        rs = classify_regime(params.swapped())
        assert r.tag is rs.tag
        if r.tag is RegimeTag.SPLIT:
            assert rs.high_cost_group is r.high_cost_group.other
