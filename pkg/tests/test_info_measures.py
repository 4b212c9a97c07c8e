"""Tests for entropies, divergences and distances."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blind_bounds.core.distributions import (
    ClassicalEnsemble,
    Distribution,
    JointDistribution,
    equiprobable,
    point_mass,
    product,
    random_distribution,
    staircase,
    uniform,
    uniform_staircase,
)
from blind_bounds.core.errors import DimensionMismatchError, DivergenceUndefinedError
from blind_bounds.core.info_measures import (
    conditional_entropy,
    conditional_entropy_of,
    conditional_mutual_information,
    conditional_mutual_information_of,
    entropy,
    fidelity,
    holevo_information,
    kl_divergence,
    kl_divergence_of,
    mutual_information,
    trace_distance,
)
from blind_bounds.core.stochastic import apply, identity, random_stochastic

THIRDS = Distribution([Fraction(1, 3), Fraction(2, 3)])


def test_entropy_examples():
    assert entropy(uniform(4)) == pytest.approx(2.0)
    assert entropy(point_mass(5, 3)) == 0.0
    assert entropy(staircase(2)) == pytest.approx(math.log2(3) - 2 / 3, abs=1e-12)
    assert entropy(staircase(2)) == pytest.approx(0.918296, abs=1e-6)


def test_trace_distance_exact_values():
    assert trace_distance(uniform(2), THIRDS) == Fraction(1, 6)
    two_copy = trace_distance(product(uniform(2), uniform(2)), product(THIRDS, THIRDS))
    assert two_copy == Fraction(7, 36)
    assert trace_distance(THIRDS, THIRDS) == 0


def test_trace_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        trace_distance(uniform(2), uniform(3))
    with pytest.raises(DimensionMismatchError):
        fidelity(uniform(2), uniform(3))


def test_fidelity_examples():
    assert fidelity(THIRDS, THIRDS) == pytest.approx(1.0)
    assert fidelity(point_mass(3, 0), point_mass(3, 2)) == 0.0
    expected = math.sqrt(1 / 6) + math.sqrt(1 / 3)
    assert fidelity(uniform(2), THIRDS) == pytest.approx(expected, abs=1e-12)
    assert fidelity(uniform(2), THIRDS) == pytest.approx(0.98560, abs=1e-5)


def test_kl_divergence_examples():
    assert kl_divergence(THIRDS, THIRDS) == 0.0
    expected = 0.5 * math.log2(1.5) + 0.5 * math.log2(0.75)
    assert kl_divergence(uniform(2), THIRDS) == pytest.approx(expected, abs=1e-12)
    assert kl_divergence(uniform(2), THIRDS) == pytest.approx(0.084963, abs=1e-6)
    assert kl_divergence(point_mass(8, 5), uniform(8)) == pytest.approx(3.0)


def test_kl_divergence_support_violation():
    with pytest.raises(DivergenceUndefinedError) as info:
        kl_divergence(uniform(3), point_mass(3, 1))
    assert info.value.measured["symbols"] == [0, 2]


def test_kl_divergence_rejects_mismatched_shapes():
    with pytest.raises(DimensionMismatchError):
        kl_divergence_of(np.full((2, 2), 0.25), np.full(4, 0.25))


def test_holevo_examples():
    assert holevo_information(equiprobable(staircase(3), staircase(3))) == pytest.approx(0.0, abs=1e-12)
    orthogonal = equiprobable(point_mass(2, 0), point_mass(2, 1))
    assert holevo_information(orthogonal) == pytest.approx(1.0)
    assert 0.0 <= holevo_information(uniform_staircase(16, exact=False)) <= 1.0


def test_conditional_entropy_examples():
    d4 = 1.0 + 0.5 * entropy(Distribution([0.4, 0.3, 0.2, 0.1]))
    assert conditional_entropy(uniform_staircase(4)) == pytest.approx(d4, abs=1e-12)
    assert conditional_entropy(uniform_staircase(4)) == pytest.approx(1.92322, abs=1e-5)
    deterministic = equiprobable(point_mass(3, 0), point_mass(3, 2))
    assert conditional_entropy(deterministic) == 0.0


@pytest.mark.parametrize("d", [2, 3, 8, 64, 1024])
def test_uniform_staircase_entropy_floor(d):
    assert conditional_entropy(uniform_staircase(d, exact=False)) >= math.log2(d) - 1


def test_cmi_examples():
    # C' independent of C given X
    e = uniform_staircase(3)
    independent = np.stack([np.outer(c.as_float(), c.as_float()) * 0.5
                            for c in e.conditionals])
    assert conditional_mutual_information(JointDistribution(independent)) == pytest.approx(0.0, abs=1e-12)

    point_pairs = equiprobable(point_mass(2, 0), point_mass(2, 1))
    copy = JointDistribution.from_channel(point_pairs, identity(2))
    assert conditional_mutual_information(copy) == 0.0

    single = ClassicalEnsemble(uniform(1), (uniform(2),))
    perfect = JointDistribution.from_channel(single, identity(2))
    assert conditional_mutual_information(perfect) == pytest.approx(1.0)


def test_cmi_matches_entropy_expansion(rng):
    """I(C:C'|X) = S(CX) + S(C'X) - S(CC'X) - S(X) for a random channel."""
    e = uniform_staircase(4, exact=False)
    t = JointDistribution.from_channel(e, random_stochastic(4, rng))
    table = np.asarray(t.table, dtype=float)

    def h(arr):
        arr = arr[arr > 0]
        return float(-(arr * np.log2(arr)).sum())

    expected = (h(table.sum(axis=2)) + h(table.sum(axis=1)) - h(table.ravel())
                - h(table.sum(axis=(1, 2))))
    assert conditional_mutual_information(t) == pytest.approx(expected, abs=1e-10)


def test_joint_helpers():
    copy = np.diag([0.5, 0.5])
    assert mutual_information(copy) == pytest.approx(1.0)
    assert conditional_entropy_of(copy) == pytest.approx(0.0, abs=1e-12)
    assert conditional_entropy_of(np.full((2, 2), 0.25)) == pytest.approx(1.0)
    assert conditional_mutual_information_of(np.full((2, 2, 2), 0.125)) == pytest.approx(0.0, abs=1e-12)


dimension_and_seed = st.integers(min_value=2, max_value=8).flatmap(
    lambda d: st.tuples(st.just(d), st.integers(min_value=0, max_value=2 ** 32 - 1)))


@settings(max_examples=60, deadline=None)
@given(dimension_and_seed)
def test_triangle_and_data_processing(case):
    d, seed = case
    gen = np.random.default_rng(seed)
    p, q, r = (random_distribution(d, gen) for _ in range(3))
    assert trace_distance(p, r) <= trace_distance(p, q) + trace_distance(q, r) + 1e-12

    m = random_stochastic(d, gen)
    assert trace_distance(apply(p, m), apply(q, m)) <= trace_distance(p, q) + 1e-12
    assert kl_divergence(apply(p, m), apply(q, m)) <= kl_divergence(p, q) + 1e-10


@settings(max_examples=60, deadline=None)
@given(dimension_and_seed)
def test_pinsker_and_holevo_cap(case):
    d, seed = case
    gen = np.random.default_rng(seed)
    p, q = random_distribution(d, gen), random_distribution(d, gen)
    assert trace_distance(p, q) ** 2 <= 0.5 * kl_divergence(p, q) * math.log(2) + 1e-12

    e = equiprobable(p, q)
    assert holevo_information(e) <= min(1.0, math.log2(d)) + 1e-10


@settings(max_examples=60, deadline=None)
@given(dimension_and_seed)
def test_fano_inequality(case):
    d, seed = case
    gen = np.random.default_rng(seed)
    pab = gen.dirichlet(np.ones(d * d)).reshape(d, d)
    mismatch = 1.0 - float(np.trace(pab))
    assert conditional_entropy_of(pab) <= 1.0 + mismatch * math.log2(d) + 1e-10
