"""Tests for row-stochastic matrices and the doubly-stochastic approximation."""

from fractions import Fraction

import numpy as np
import pytest

from blind_bounds.core.debug_config import DebugConfig
from blind_bounds.core.distributions import Distribution, staircase, uniform
from blind_bounds.core.errors import (
    ConstraintViolatedError,
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidInputError,
)
from blind_bounds.core.rigidity import fixed_point_errors
from blind_bounds.core.stochastic import (
    StochasticMatrix,
    apply,
    approx_doubly_stochastic,
    column_deviation,
    depolarizing,
    identity,
    marginal_error,
    permutation,
    random_doubly_stochastic,
    random_near_identity,
    random_stochastic,
)

SWAP = permutation([1, 0])


def test_matrix_validation():
    with pytest.raises(InvalidInputError):
        StochasticMatrix([[0.5, 0.6], [0.5, 0.5]])
    with pytest.raises(InvalidInputError):
        StochasticMatrix([[Fraction(3, 2), Fraction(-1, 2)], [0, 1]])
    with pytest.raises(InvalidDimensionError):
        StochasticMatrix([[1.0, 0.0]])
    with pytest.raises(InvalidInputError):
        permutation([0, 0, 1])


def test_apply_examples():
    v = staircase(3)
    assert apply(v, identity(3)).equals(v)
    assert list(apply(staircase(2), SWAP).probs) == [Fraction(1, 3), Fraction(2, 3)]
    with pytest.raises(DimensionMismatchError):
        apply(uniform(2), identity(3))


def test_apply_uniform_through_doubly_stochastic(rng):
    m = random_doubly_stochastic(5, rng)
    assert apply(uniform(5, exact=False), m).equals(uniform(5, exact=False), tol=1e-12)


def test_column_deviation_examples(rng):
    assert all(a == 0 for a in column_deviation(identity(4)))
    stuck = StochasticMatrix([[1, 0], [1, 0]])
    assert list(column_deviation(stuck)) == [1, -1]
    alpha = column_deviation(random_stochastic(6, rng))
    assert abs(float(np.sum(alpha))) <= 1e-12


def test_mix_and_depolarizing():
    half = identity(2).mix(SWAP, Fraction(1, 2))
    assert half.exact
    assert list(half.entries.ravel()) == [Fraction(1, 2)] * 4

    noisy = depolarizing(3, Fraction(1, 4))
    assert noisy.exact and noisy.is_doubly_stochastic()
    assert noisy.entries[0, 0] == Fraction(3, 4) + Fraction(1, 12)
    assert not identity(2).mix(SWAP, 0.25).exact


def test_dict_round_trip():
    m = depolarizing(3, Fraction(1, 5))
    back = StochasticMatrix.from_dict(m.to_dict())
    assert back.exact
    assert all(a == b for a, b in zip(back.entries.flat, m.entries.flat))

    rows = StochasticMatrix.from_dict([[0.25, 0.75], [0.5, 0.5]])
    assert not rows.exact and rows.d == 2
    with pytest.raises(InvalidInputError):
        StochasticMatrix.from_dict({"rows": [[1, 0]]})


def test_approx_doubly_stochastic_identity_examples():
    n = approx_doubly_stochastic(identity(2), Fraction(1, 8))
    assert n.exact
    expected = [Fraction(3, 4), Fraction(1, 4), Fraction(1, 4), Fraction(3, 4)]
    assert list(n.entries.ravel()) == expected

    assert approx_doubly_stochastic(identity(3), 0).is_identity()


def test_approx_doubly_stochastic_bounds_on_random_channel(rng):
    d = 4
    m = random_stochastic(d, rng)
    eps = marginal_error(m, uniform(d, exact=False)) / 4
    n = approx_doubly_stochastic(m, eps)
    assert n.is_doubly_stochastic(tol=1e-12)
    assert np.max(np.abs(n.as_float().sum(axis=1) - 1)) <= 1e-12

    nf, mf = n.as_float(), m.as_float()
    v = staircase(d, exact=False).as_float()
    assert np.max(np.abs(nf - mf)) <= 12 * d * eps + 1e-12
    assert np.abs(v @ nf - v @ mf).sum() <= 12 * d * eps + 1e-12


def test_approx_doubly_stochastic_exact_random_channel():
    m = StochasticMatrix([[Fraction(1, 2), Fraction(1, 2), 0],
                          [Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)],
                          [Fraction(1, 4), 0, Fraction(3, 4)]])
    eps = marginal_error(m, uniform(3)) / 4
    n = approx_doubly_stochastic(m, eps)
    assert n.exact and n.is_doubly_stochastic()
    shift = max(abs(a - b) for a, b in zip(n.entries.flat, m.entries.flat))
    assert shift <= 12 * 3 * eps


def test_approx_doubly_stochastic_rejects_large_error():
    stuck = StochasticMatrix([[1, 0], [1, 0]])
    with pytest.raises(ConstraintViolatedError) as info:
        approx_doubly_stochastic(stuck, Fraction(1, 10))
    assert info.value.measured["u_error"] == pytest.approx(1.0)
    with pytest.raises(InvalidDimensionError):
        approx_doubly_stochastic(identity(1), 0)


def test_injected_faulty_constant_is_reported(rng):
    m = random_near_identity(3, rng, scale=0.1)
    u_err, v_err = fixed_point_errors(m)
    eps = max(float(u_err), float(v_err)) / 4
    DebugConfig.inject_faulty_shift_constant(11)
    with pytest.raises(ConstraintViolatedError) as info:
        approx_doubly_stochastic(m, eps)
    assert info.value.measured["shift_constant"] == 11
    DebugConfig.clear_faulty_shift_constant()
    assert approx_doubly_stochastic(m, eps).is_doubly_stochastic(tol=1e-12)


def test_random_generators_are_stochastic(rng):
    for d in (2, 5):
        assert random_stochastic(d, rng).d == d
        assert random_doubly_stochastic(d, rng).is_doubly_stochastic(tol=1e-12)
        near = random_near_identity(d, rng, scale=1e-6)
        assert near.is_identity(tol=1e-5)


def test_marginal_error_exact():
    assert marginal_error(SWAP, staircase(2)) == Fraction(2, 3)
    assert marginal_error(SWAP, Distribution([Fraction(1, 2), Fraction(1, 2)])) == 0
