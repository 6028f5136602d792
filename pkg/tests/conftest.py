import numpy as np
import pytest

from apdpro.pagerank import make_synthetic_instance
from apdpro.problem import derive_constants, feasible_ball


@pytest.fixture(scope="session")
def canonical():
    """The 1-D known-solution instance: f=|x|, g=(x-2)^2/2 - 1, x*=2-sqrt(2)."""
    problem, x_star, y_star = make_synthetic_instance(1, 2.0, 1.0)
    ball = feasible_ball(problem, [problem.strict_point])
    constants = derive_constants(problem, ball)
    return problem, constants, x_star, y_star
