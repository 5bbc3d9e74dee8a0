import pytest

from edgesem import BBox, Candidate, MappingParams, RoutingPolicy


@pytest.fixture
def class_table():
    return {"person": 0, "car": 1, "bicycle": 2}


@pytest.fixture
def params():
    # The worked-example coefficients used throughout the suite.
    return MappingParams(
        tau0=0.5,
        alpha1=0.2,
        alpha2=0.1,
        omega0=1.0,
        beta1=0.1,
        beta2=0.15,
        beta3=0.2,
        p_th=10,
        gamma=1.5,
    )


@pytest.fixture
def policy():
    return RoutingPolicy(tau_route=0.6, candidate_floor=0.25)


def make_box(x1=0.1, y1=0.1, x2=0.5, y2=0.5):
    return BBox(x1, y1, x2, y2)


def make_candidate(score, class_id=0, box=None):
    return Candidate(box or make_box(), class_id, score)


@pytest.fixture
def candidate_factory():
    return make_candidate


@pytest.fixture
def box_factory():
    return make_box
