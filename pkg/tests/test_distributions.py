"""Tests for distributions, ensembles and joint tables."""

from fractions import Fraction

import numpy as np
import pytest

from blind_bounds.core.distributions import (
    ClassicalEnsemble,
    Distribution,
    JointDistribution,
    empirical,
    equiprobable,
    point_mass,
    product,
    sample,
    staircase,
    staircase_eta,
    two_state_example,
    uniform,
    uniform_staircase,
)
from blind_bounds.core.errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidInputError,
)
from blind_bounds.core.stochastic import identity


def test_uniform_entries():
    """Every entry of uniform(d) is exactly 1/d."""
    assert list(uniform(4).probs) == [Fraction(1, 4)] * 4
    assert list(uniform(1).probs) == [Fraction(1)]
    assert uniform(2).equals(Distribution([Fraction(1, 2), Fraction(1, 2)]))


@pytest.mark.parametrize("bad", [0, -3, 2.5, True])
def test_invalid_dimension(bad):
    with pytest.raises(InvalidDimensionError):
        uniform(bad)
    with pytest.raises(InvalidDimensionError):
        staircase(bad)


def test_staircase_values():
    assert list(staircase(2).probs) == [Fraction(2, 3), Fraction(1, 3)]
    assert list(staircase(4).probs) == [Fraction(4, 10), Fraction(3, 10),
                                        Fraction(2, 10), Fraction(1, 10)]
    assert staircase_eta(4) == 10


@pytest.mark.parametrize("d", range(1, 65))
def test_staircase_sums_to_one_exactly(d):
    v = staircase(d)
    assert sum(v.probs, Fraction(0)) == 1
    eta = staircase_eta(d)
    assert v[0] == Fraction(d, eta)
    assert v[d - 1] == Fraction(1, eta)
    assert all(a > b for a, b in zip(v.probs[:-1], v.probs[1:]))


def test_float_backend_matches_exact():
    exact = staircase(7)
    approx = staircase(7, exact=False)
    assert exact.exact and not approx.exact
    assert np.allclose(exact.as_float(), approx.probs, atol=1e-15)
    assert exact.to_float().equals(approx, tol=1e-15)


def test_distribution_validation():
    with pytest.raises(InvalidInputError):
        Distribution([0.5, 0.6])
    with pytest.raises(InvalidInputError):
        Distribution([Fraction(3, 2), Fraction(-1, 2)])
    with pytest.raises(InvalidDimensionError):
        Distribution([])
    # integer input is read exactly
    assert Distribution([0, 1]).exact


def test_distribution_is_read_only():
    v = staircase(3)
    with pytest.raises(ValueError):
        v.probs[0] = Fraction(1)


def test_product_examples():
    half = uniform(2)
    assert list(product(half, half).probs) == [Fraction(1, 4)] * 4

    q = Distribution([Fraction(1, 3), Fraction(2, 3)])
    assert list(product(q, q).probs) == [Fraction(1, 9), Fraction(2, 9),
                                         Fraction(2, 9), Fraction(4, 9)]

    relabeled = product(point_mass(2, 1), staircase(3))
    assert list(relabeled.probs[3:]) == list(staircase(3).probs)
    assert all(x == 0 for x in relabeled.probs[:3])


def test_product_marginals_recover_factors():
    p = staircase(3)
    q = Distribution([Fraction(1, 5), Fraction(4, 5)])
    table = product(p, q).probs.reshape(3, 2)
    assert list(table.sum(axis=1)) == list(p.probs)
    assert list(table.sum(axis=0)) == list(q.probs)


def test_product_mixed_backends_falls_back_to_float():
    mixed = product(uniform(2), uniform(2, exact=False))
    assert not mixed.exact


def test_sample_point_mass_and_determinism():
    assert list(sample(point_mass(4, 2), seed=7, n=5)) == [2] * 5
    first = sample(uniform(2), seed=11, n=1000)
    second = sample(uniform(2), seed=11, n=1000)
    assert np.array_equal(first, second)


def test_sample_frequency_close_to_half():
    draws = sample(uniform(2), seed=3, n=100_000)
    assert abs(np.mean(draws == 0) - 0.5) <= 5e-3


def test_empirical():
    freq = empirical([0, 1, 1, 3], 4)
    assert np.allclose(freq.probs, [0.25, 0.5, 0.0, 0.25])
    with pytest.raises(InvalidInputError):
        empirical([], 3)
    with pytest.raises(DimensionMismatchError):
        empirical([0, 5], 3)


def test_ensemble_average_and_validation():
    e = two_state_example()
    assert e.exact
    assert e.n_labels == 2 and e.d == 2
    assert list(e.average().probs) == [Fraction(5, 12), Fraction(7, 12)]

    with pytest.raises(DimensionMismatchError):
        ClassicalEnsemble(uniform(3), (uniform(2), uniform(2)))
    with pytest.raises(DimensionMismatchError):
        equiprobable(uniform(2), uniform(3))
    with pytest.raises(InvalidInputError):
        equiprobable()


def test_ensemble_dict_round_trip_keeps_exactness():
    e = uniform_staircase(3)
    back = ClassicalEnsemble.from_dict(e.to_dict())
    assert back.exact
    assert all(a.equals(b) for a, b in zip(back.conditionals, e.conditionals))


def test_joint_from_identity_channel():
    e = two_state_example()
    t = JointDistribution.from_channel(e, identity(2))
    assert t.exact
    assert t.table.shape == (2, 2, 2)
    assert t.c_marginal(1).equals(e.conditionals[1])
    assert t.cprime_marginal(0).equals(e.conditionals[0])
    assert t.label_priors().equals(uniform(2))
    assert t.markov_gap() == 0.0


def test_joint_validation():
    with pytest.raises(InvalidDimensionError):
        JointDistribution(np.full((2, 2, 3), 1 / 12))
    with pytest.raises(InvalidInputError):
        JointDistribution(np.full((1, 2, 2), 0.3))
    with pytest.raises(DimensionMismatchError):
        JointDistribution.from_channel(two_state_example(), identity(3))


def test_joint_markov_gap_detects_label_dependence():
    table = np.zeros((2, 2, 2))
    table[0, 0, 0] = 0.25
    table[0, 1, 1] = 0.25
    table[1, 0, 1] = 0.25
    table[1, 1, 0] = 0.25
    assert JointDistribution(table).markov_gap() == pytest.approx(0.5)
