"""Tests for the information-defect minimizer."""

import math

import numpy as np
import pytest

from blind_bounds.core.defect_optimizer import (
    DefectProblem,
    DefectSolution,
    SolverBackend,
    constraint_value,
    convexity_gap,
    defect_gradient,
    defect_value,
    grid_oracle,
    minimize_defect,
    project_rows,
)
from blind_bounds.core.distributions import two_state_example, uniform_staircase
from blind_bounds.core.errors import ParameterRangeError, UnsupportedInputError
from blind_bounds.core.info_measures import conditional_entropy
from blind_bounds.core.stochastic import (
    StochasticMatrix,
    constant_rows,
    identity,
    random_stochastic,
)

EXAMPLE = two_state_example(exact=False)
EXAMPLE_DEFECT = 0.5 + 0.5 * (math.log2(3) - 2 / 3)


def test_defect_of_identity_is_conditional_entropy():
    assert defect_value(EXAMPLE, identity(2, exact=False)) == pytest.approx(EXAMPLE_DEFECT)
    assert constraint_value(EXAMPLE, identity(2, exact=False)) == 0.0


def test_constant_channel_has_zero_defect():
    e = uniform_staircase(3, exact=False)
    channel = constant_rows(e.average())
    assert defect_value(e, channel) == pytest.approx(0.0, abs=1e-12)
    assert constraint_value(e, channel) > 0


def test_gradient_matches_finite_differences(rng):
    e = uniform_staircase(3, exact=False)
    m = random_stochastic(3, rng, concentration=5.0)
    grad = defect_gradient(e, m)
    h = 1e-6
    base = m.as_float()
    for c in range(3):
        bumped = base.copy()
        bumped[c, 0] += h
        bumped[c, 1] -= h
        # direction e_{c,0} - e_{c,1} keeps rows normalized
        numeric = (defect_value(e, StochasticMatrix(bumped)) - defect_value(e, m)) / h
        assert numeric == pytest.approx(grad[c, 0] - grad[c, 1], abs=1e-4)


def test_convexity_gap_non_negative(rng):
    e = uniform_staircase(4, exact=False)
    for _ in range(20):
        m1, m2 = random_stochastic(4, rng), random_stochastic(4, rng)
        assert convexity_gap(e, m1, m2, float(rng.uniform())) >= -1e-10


def test_project_rows():
    projected = project_rows(np.array([[0.5, 0.5, 0.5], [2.0, 0.0, -1.0], [0.2, 0.3, 0.5]]))
    assert np.allclose(projected.sum(axis=1), 1.0)
    assert np.all(projected >= 0)
    assert np.allclose(projected[0], [1 / 3, 1 / 3, 1 / 3])
    assert np.allclose(projected[1], [1.0, 0.0, 0.0])
    assert np.allclose(projected[2], [0.2, 0.3, 0.5])


def test_problem_validation():
    with pytest.raises(ParameterRangeError):
        DefectProblem(ensemble=EXAMPLE, eps=1.0)
    with pytest.raises(ParameterRangeError):
        DefectProblem(ensemble=EXAMPLE, restarts=0)
    problem = DefectProblem(ensemble=EXAMPLE, eps=0.01, backend="grid-oracle")
    assert problem.backend == SolverBackend.GRID_ORACLE
    assert DefectProblem.from_dict(problem.to_dict()).eps == 0.01


def test_zero_error_forces_identity():
    solution = minimize_defect(DefectProblem(ensemble=EXAMPLE, eps=0.0, restarts=3, max_iter=200))
    assert solution.channel.is_identity(tol=1e-9)
    assert solution.value == pytest.approx(EXAMPLE_DEFECT, abs=1e-9)
    assert solution.feasible
    assert solution.diagnostics["chain_defect_bound"] == pytest.approx(1 / 2592)


def test_grid_oracle_zero_error():
    solution = grid_oracle(EXAMPLE, 0.0)
    assert solution.backend == SolverBackend.GRID_ORACLE
    assert solution.value == pytest.approx(EXAMPLE_DEFECT, abs=1e-9)


def test_grid_oracle_needs_binary_alphabet():
    with pytest.raises(UnsupportedInputError):
        grid_oracle(uniform_staircase(3, exact=False), 0.01)


@pytest.mark.parametrize("d", [2, 3])
def test_zero_error_uniform_staircase_is_identity(d):
    e = uniform_staircase(d, exact=False)
    solution = minimize_defect(DefectProblem(ensemble=e, eps=0.0, restarts=3, max_iter=300))
    assert solution.channel.is_identity(tol=1e-6)
    assert solution.value == pytest.approx(conditional_entropy(e), abs=1e-6)
    assert solution.diagnostics["chain_defect_bound"] >= 0.0


@pytest.mark.slow
@pytest.mark.parametrize("eps", [0.0, 0.001, 0.01])
def test_penalty_solver_agrees_with_grid(eps):
    grid = grid_oracle(EXAMPLE, eps)
    penalty = minimize_defect(DefectProblem(ensemble=EXAMPLE, eps=eps, restarts=4))
    assert penalty.feasible and grid.feasible
    assert penalty.value == pytest.approx(grid.value, abs=1e-3)
    assert penalty.value >= penalty.diagnostics["chain_defect_bound"]
    assert penalty.value <= EXAMPLE_DEFECT + 1e-9


@pytest.mark.slow
def test_uniform_staircase_defect_below_conditional_entropy():
    e = uniform_staircase(3, exact=False)
    solution = minimize_defect(DefectProblem(ensemble=e, eps=0.01, restarts=3, max_iter=500))
    assert solution.feasible
    assert 0.0 <= solution.value <= conditional_entropy(e) + 1e-9
    assert "chain_defect_bound" in solution.diagnostics


def test_solution_round_trip():
    solution = grid_oracle(EXAMPLE, 0.0)
    back = DefectSolution.from_dict(solution.to_dict())
    assert back.value == solution.value
    assert back.backend == solution.backend
    assert back.channel.is_identity(tol=1e-12)
