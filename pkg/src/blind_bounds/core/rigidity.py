"""Rigidity of channels fixing the uniform and staircase distributions.

A channel that fixes both the uniform distribution u and the strictly
decreasing staircase v must be the identity; a channel that fixes them
approximately keeps its diagonal close to 1. The helpers here check both
statements and provide the permutation-overlap and hull-distance tools the
approximate argument uses.
"""

import itertools
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import numpy as np

from .birkhoff import BirkhoffDecomposition, identity_weight
from .distributions import (
    SUM_TOLERANCE,
    Distribution,
    common_backend,
    is_exact,
    staircase,
    staircase_eta,
    uniform,
)
from .errors import (
    ConstraintViolatedError,
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidInputError,
    InvariantViolationError,
    UnsupportedInputError,
)
from .exact_lp import solve_lp
from .stochastic import StochasticMatrix, apply, marginal_error
from ..utils.logger import get_logger

logger = get_logger(__name__)

BRUTE_FORCE_MAX_D = 7
Number = Union[Fraction, float]


def rigidity_floor(d: int, eps: Number) -> Number:
    """1 - 24 d^4 eps."""
    return 1 - 24 * d ** 4 * eps


def fixed_point_errors(m: StochasticMatrix) -> Tuple[Number, Number]:
    """(||u - uM||_1, ||v - vM||_1) for uniform u and staircase v."""
    u = uniform(m.d, exact=m.exact)
    v = staircase(m.d, exact=m.exact)
    return marginal_error(m, u), marginal_error(m, v)


def diagonal_rigidity_bound(m: StochasticMatrix, eps: Number) -> np.ndarray:
    """Diagonal of a channel that nearly fixes u and v, checked against 1 - 24 d^4 eps.

    Args:
        m: Channel with ||u - uM||_1 <= 4 eps and ||v - vM||_1 <= 4 eps
        eps: Error parameter

    Returns:
        The diagonal of M

    Raises:
        ConstraintViolatedError: If either marginal error exceeds 4 eps
        InvariantViolationError: If a diagonal entry falls below the floor
    """
    d = m.d
    if d < 2:
        raise InvalidDimensionError("rigidity bound needs d >= 2")
    u_err, v_err = fixed_point_errors(m)
    slack = 0 if m.exact and isinstance(eps, (Fraction, int)) else SUM_TOLERANCE
    measured = {"u_error": float(u_err), "v_error": float(v_err), "eps": float(eps)}
    if u_err > 4 * eps + slack or v_err > 4 * eps + slack:
        raise ConstraintViolatedError(
            f"marginal errors ({float(u_err):.3e}, {float(v_err):.3e}) exceed 4*eps",
            measured=measured)

    diag = m.diagonal()
    floor = rigidity_floor(d, eps)
    worst = min(diag)
    if worst < floor - slack:
        measured.update({"min_diagonal": float(worst), "floor": float(floor)})
        raise InvariantViolationError(
            f"diagonal entry {float(worst):.6g} below 1 - 24 d^4 eps = {float(floor):.6g}",
            measured=measured)
    return diag


def _strictly_decreasing(v: Distribution) -> bool:
    return all(a > b for a, b in zip(v.probs[:-1], v.probs[1:]))


def zero_error_rigidity_check(m: StochasticMatrix, v: Distribution) -> bool:
    """True iff M is the identity, given that M fixes u and v.

    Exact inputs are checked exactly. Floating inputs are routed to the
    diagonal bound with eps read off the measured marginal errors, and the
    identity test uses the resulting floor as tolerance.

    Raises:
        ConstraintViolatedError: If v is not strictly decreasing or M moves u or v
    """
    if m.d != v.d:
        raise DimensionMismatchError(f"channel of size {m.d} with distribution of size {v.d}")
    if not _strictly_decreasing(v):
        raise ConstraintViolatedError("v must be strictly decreasing")

    if not (m.exact and v.exact):
        if m.d < 2:
            return True
        u_err, v_err = fixed_point_errors(m)
        eps = max(float(u_err), float(v_err)) / 4
        diagonal_rigidity_bound(m, eps)
        return m.is_identity(tol=24 * m.d ** 4 * eps + SUM_TOLERANCE)

    u = uniform(m.d)
    moved_u = not apply(u, m).equals(u)
    moved_v = not apply(v, m).equals(v)
    if moved_u or moved_v:
        raise ConstraintViolatedError(
            "channel does not fix both u and v exactly",
            measured={"u_error": str(marginal_error(m, u)),
                      "v_error": str(marginal_error(m, v))})
    result = m.is_identity()
    if not result:
        logger.warning("Channel fixes u and v exactly but is not the identity")
    return result


def max_offdiagonal_mass(v: Distribution) -> Fraction:
    """Largest off-diagonal mass of a doubly-stochastic M with vM = v.

    Exact LP over the Birkhoff polytope; 0 certifies that the identity is the
    only channel fixing both u and v.
    """
    d = v.d
    values = [Fraction(x) for x in v.probs]
    n = d * d

    def var(r: int, c: int) -> int:
        return r * d + c

    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    for r in range(d):
        row = [Fraction(0)] * n
        for c in range(d):
            row[var(r, c)] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
    for c in range(d):
        row = [Fraction(0)] * n
        for r in range(d):
            row[var(r, c)] = Fraction(1)
        rows.append(row)
        rhs.append(Fraction(1))
    for c in range(d):
        row = [Fraction(0)] * n
        for r in range(d):
            row[var(r, c)] = values[r]
        rows.append(row)
        rhs.append(values[c])

    cost = [Fraction(0) if r == c else Fraction(-1) for r in range(d) for c in range(d)]
    result = solve_lp(cost, rows, rhs)
    if not result.optimal:
        raise InvariantViolationError(f"fixed-point LP is {result.status.value}")
    return -result.value


def _check_staircase(v: Distribution):
    d = v.d
    if d < 2:
        raise InvalidDimensionError("permutation overlap needs d >= 2")
    reference = staircase(d, exact=v.exact)
    if not v.equals(reference, tol=SUM_TOLERANCE):
        raise UnsupportedInputError("permutation overlap is only defined for the staircase")


def overlap(v: Distribution, sigma: Sequence[int]) -> Number:
    """sum_j v_j (v Pi)_j for the permutation P[r, sigma[r]] = 1."""
    if len(sigma) != v.d:
        raise DimensionMismatchError("permutation length differs from alphabet size")
    probs = v.probs
    return sum((probs[r] * probs[sigma[r]] for r in range(v.d)),
               Fraction(0) if v.exact else 0.0)


def perm_overlap_max(v: Distribution) -> Number:
    """Maximum overlap over non-identity permutations: sum v^2 - 1/eta^2."""
    _check_staircase(v)
    eta = staircase_eta(v.d)
    if v.exact:
        return sum((x * x for x in v.probs), Fraction(0)) - Fraction(1, eta * eta)
    probs = v.as_float()
    return float(probs @ probs - 1.0 / eta ** 2)


def perm_overlap_witness(d: int) -> Tuple[int, ...]:
    """Adjacent transposition of the first two symbols; attains the maximum."""
    if d < 2:
        raise InvalidDimensionError("a non-identity permutation needs d >= 2")
    return (1, 0) + tuple(range(2, d))


def perm_overlap_bruteforce(v: Distribution) -> Number:
    """Exhaustive maximum over all d! - 1 non-identity permutations (d <= 7)."""
    d = v.d
    if d < 2:
        raise InvalidDimensionError("permutation overlap needs d >= 2")
    if d > BRUTE_FORCE_MAX_D:
        raise UnsupportedInputError(f"brute force limited to d <= {BRUTE_FORCE_MAX_D}")
    ident = tuple(range(d))
    return max(overlap(v, sigma) for sigma in itertools.permutations(range(d))
               if sigma != ident)


def _check_hull_inputs(v: Distribution, ws: Sequence[Distribution]):
    if not ws:
        raise InvalidInputError("hull needs at least one vertex")
    for w in ws:
        if w.d != v.d:
            raise DimensionMismatchError(f"vertex of size {w.d} for alphabet {v.d}")


def l1_dist_to_hull_lower_bound(v: Distribution, ws: Sequence[Distribution]) -> Number:
    """(1/v1) (sum v^2 - max_i sum_j v_j w_ij), a lower bound on the l1 distance
    from v to the convex hull of ws. v1 is the largest entry of v."""
    _check_hull_inputs(v, ws)
    arrays = common_backend(v.probs, *[w.probs for w in ws])
    vv, rest = arrays[0], arrays[1:]
    if is_exact(vv):
        v1 = max(vv)
        self_overlap = sum((x * x for x in vv), Fraction(0))
        best = max(sum((a * b for a, b in zip(vv, w)), Fraction(0)) for w in rest)
        return (self_overlap - best) / v1
    v1 = float(vv.max())
    best = max(float(vv @ w) for w in rest)
    return float((vv @ vv - best) / v1)


def hull_l1_distance(v: Distribution, ws: Sequence[Distribution]) -> Fraction:
    """Exact min over convex weights r of ||v - sum_i r_i w_i||_1.

    Split-variable LP: W r + s+ - s- = v, sum r = 1, minimize sum(s+ + s-).
    Float inputs are converted to their exact binary values.
    """
    _check_hull_inputs(v, ws)
    d = v.d
    k = len(ws)
    target = [Fraction(x) for x in v.probs]
    vertices = [[Fraction(x) for x in w.probs] for w in ws]
    n = k + 2 * d

    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    for j in range(d):
        row = [Fraction(0)] * n
        for i in range(k):
            row[i] = vertices[i][j]
        row[k + j] = Fraction(1)
        row[k + d + j] = Fraction(-1)
        rows.append(row)
        rhs.append(target[j])
    rows.append([Fraction(1)] * k + [Fraction(0)] * (2 * d))
    rhs.append(Fraction(1))

    cost = [Fraction(0)] * k + [Fraction(1)] * (2 * d)
    result = solve_lp(cost, rows, rhs)
    if not result.optimal:
        raise InvariantViolationError(f"hull-distance LP is {result.status.value}")
    return result.value


def identity_weight_gap(decomposition: BirkhoffDecomposition, v: Distribution) -> float:
    """(1 - q_1) / (v_1 eta^2) for the identity weight q_1 of a decomposition.

    Bounded by ||v - vN||_1 for the decomposed matrix N when v is the staircase.
    """
    q1 = float(identity_weight(decomposition))
    eta = staircase_eta(v.d)
    return (1.0 - q1) / (float(max(v.as_float())) * eta ** 2)
