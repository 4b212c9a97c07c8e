"""Entropies, divergences and distances for classical distributions.

All information quantities are in bits. Trace distance stays exact on the
exact backend; everything involving a logarithm or square root is float64.
"""

import math
from fractions import Fraction
from typing import Union

import numpy as np
from scipy.special import entr, rel_entr

from .distributions import (
    ClassicalEnsemble,
    Distribution,
    JointDistribution,
    common_backend,
    is_exact,
    to_float,
)
from .errors import DimensionMismatchError, DivergenceUndefinedError, InvalidInputError

LN2 = math.log(2.0)
NONNEGATIVE_SLACK = 1e-10


def _check_same_alphabet(p: Distribution, q: Distribution):
    if p.d != q.d:
        raise DimensionMismatchError(f"alphabet sizes differ: {p.d} vs {q.d}")


def _clip_small_negative(value: float) -> float:
    # roundoff can push an exactly-zero information value slightly below 0
    if -NONNEGATIVE_SLACK < value < 0.0:
        return 0.0
    return value


def entropy_of(probs: np.ndarray) -> float:
    """Shannon entropy (bits) of any non-negative array summing to 1."""
    return float(entr(to_float(probs)).sum() / LN2)


def entropy(p: Distribution) -> float:
    """Shannon entropy -sum p log p in bits, with 0 log 0 = 0."""
    return entropy_of(p.probs)


def trace_distance(p: Distribution, q: Distribution) -> Union[Fraction, float]:
    """Half the l1 distance; a Fraction when both inputs are exact."""
    _check_same_alphabet(p, q)
    a, b = common_backend(p.probs, q.probs)
    if is_exact(a):
        return sum((abs(x - y) for x, y in zip(a, b)), Fraction(0)) / 2
    return float(0.5 * np.abs(a - b).sum())


def l1_distance(a: np.ndarray, b: np.ndarray) -> Union[Fraction, float]:
    """l1 norm of a - b for raw vectors of either backend."""
    a, b = common_backend(np.asarray(a), np.asarray(b))
    if is_exact(a):
        return sum((abs(x - y) for x, y in zip(a.flat, b.flat)), Fraction(0))
    return float(np.abs(a - b).sum())


def fidelity(p: Distribution, q: Distribution) -> float:
    """Classical fidelity (Bhattacharyya coefficient) sum sqrt(p q)."""
    _check_same_alphabet(p, q)
    value = float(np.sqrt(p.as_float() * q.as_float()).sum())
    return min(value, 1.0)


def kl_divergence_of(p: np.ndarray, q: np.ndarray) -> float:
    """Relative entropy (bits) between raw arrays of equal shape.

    Raises:
        DimensionMismatchError: If the shapes differ
        DivergenceUndefinedError: If p has mass where q has none
    """
    p = to_float(p)
    q = to_float(q)
    if p.shape != q.shape:
        raise DimensionMismatchError(f"shapes differ: {p.shape} vs {q.shape}")
    violation = (p > 0) & (q <= 0)
    if np.any(violation):
        raise DivergenceUndefinedError(
            "support of p is not contained in support of q",
            measured={"symbols": np.flatnonzero(violation.ravel()).tolist()})
    return _clip_small_negative(float(rel_entr(p, q).sum() / LN2))


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """Relative entropy D(p || q) in bits."""
    _check_same_alphabet(p, q)
    return kl_divergence_of(p.probs, q.probs)


def holevo_information(e: ClassicalEnsemble) -> float:
    """S(sum_x p_x rho^x) - sum_x p_x S(rho^x), i.e. I(X:C)."""
    value = entropy(e.average()) - conditional_entropy(e)
    return _clip_small_negative(value)


def conditional_entropy(e: ClassicalEnsemble) -> float:
    """S(C|X) = sum_x p_x S(rho^x)."""
    priors = e.priors.as_float()
    return float(sum(px * entropy(rho) for px, rho in zip(priors, e.conditionals) if px > 0))


def conditional_mutual_information(t: JointDistribution) -> float:
    """I(C:C'|X) = sum_x p(x) D(tau^x_CC' || tau^x_C x tau^x_C')."""
    return conditional_mutual_information_of(np.transpose(to_float(t.table), (1, 2, 0)))


# Joint-table helpers. Axes follow the argument names: pab[a, b], pabc[a, b, c].

def _check_joint(table: np.ndarray, ndim: int) -> np.ndarray:
    table = to_float(table)
    if table.ndim != ndim:
        raise DimensionMismatchError(f"expected a {ndim}-D joint table, got {table.ndim}-D")
    if np.any(table < 0) or abs(table.sum() - 1.0) > 1e-9:
        raise InvalidInputError("joint table must be non-negative and sum to 1")
    return table


def joint_entropy(table: np.ndarray) -> float:
    """Entropy of a joint table of any shape."""
    return entropy_of(np.ravel(table))


def mutual_information(pab: np.ndarray) -> float:
    """I(A:B) = D(p_AB || p_A x p_B)."""
    pab = _check_joint(pab, 2)
    pa = pab.sum(axis=1)
    pb = pab.sum(axis=0)
    return kl_divergence_of(pab, np.outer(pa, pb))


def conditional_entropy_of(pab: np.ndarray) -> float:
    """S(A|B) = S(AB) - S(B)."""
    pab = _check_joint(pab, 2)
    return _clip_small_negative(joint_entropy(pab) - entropy_of(pab.sum(axis=0)))


def conditional_mutual_information_of(pabc: np.ndarray) -> float:
    """I(A:B|C) = sum_c p(c) D(p_AB|c || p_A|c x p_B|c)."""
    pabc = _check_joint(pabc, 3)
    total = 0.0
    for c in range(pabc.shape[2]):
        mass = pabc[:, :, c].sum()
        if mass <= 0:
            continue
        pair = pabc[:, :, c] / mass
        total += mass * kl_divergence_of(pair, np.outer(pair.sum(axis=1), pair.sum(axis=0)))
    return _clip_small_negative(total)
