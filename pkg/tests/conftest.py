import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_params(rng, max_degree: int = 4, low_costs_only: bool = False):
    """A random valid two-group parameterization for cross-checks."""
    from homlearn import GroupParams, ModelParams

    def grp():
        cost = float(rng.uniform(0.02, 0.98)) if low_costs_only \
            else float(rng.choice([rng.uniform(0.02, 0.98), rng.uniform(1.02, 1.9)]))
        return GroupParams(
            cost=cost,
            pi=float(rng.uniform(0.0, 1.0)),
            degree=int(rng.integers(1, max_degree + 1)),
            homophily=float(rng.uniform(0.0, 1.0)),
        )

    return ModelParams(p=float(rng.uniform(0.05, 0.95)), green=grp(), blue=grp())


def random_state(rng):
    from homlearn import StateVector

    g0, g1, b0, b1 = rng.uniform(0.0, 1.0, size=4)
    return StateVector(float(g0), float(g1), float(b0), float(b1))


def to_pars(params) -> dict:
    """Plain-dict mirror of ModelParams for the oracle implementations."""
    def gp(g):
        return {"cost": g.cost, "pi": g.pi, "degree": g.degree,
                "homophily": g.homophily}

    return {"p": params.p, "green": gp(params.green), "blue": gp(params.blue)}
