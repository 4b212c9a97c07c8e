"""Birkhoff-von Neumann decomposition by repeated perfect matching."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .distributions import is_exact, to_exact, to_float
from .errors import InvalidInputError, InvariantViolationError
from .stochastic import StochasticMatrix
from ..utils.logger import get_logger
from ..utils.serialization import format_number, parse_number_list

logger = get_logger(__name__)

ZERO_THRESHOLD = 1e-12
DOUBLY_STOCHASTIC_TOLERANCE = 1e-10
RESIDUAL_TOLERANCE = 1e-9

Permutation = Tuple[int, ...]


def max_permutation_count(d: int) -> int:
    """Upper bound (d-1)^2 + 1 on the number of rounds."""
    return (d - 1) ** 2 + 1


@dataclass(frozen=True, eq=False)
class BirkhoffDecomposition:
    """Convex weights paired with permutations sigma (P[r, sigma[r]] = 1)."""
    weights: np.ndarray
    perms: Tuple[Permutation, ...]

    def __post_init__(self):
        perms = tuple(tuple(int(c) for c in p) for p in self.perms)
        if len(perms) != len(self.weights):
            raise InvalidInputError(f"{len(self.weights)} weights for {len(perms)} permutations")
        if len(set(perms)) != len(perms):
            raise InvalidInputError("permutations must be distinct")
        weights = np.array(self.weights, copy=True)
        weights.flags.writeable = False
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "perms", perms)

    @property
    def d(self) -> int:
        return len(self.perms[0]) if self.perms else 0

    def __len__(self) -> int:
        return len(self.perms)

    def reconstruct(self) -> np.ndarray:
        """sum_i q_i P_i in the weights' backend."""
        d = self.d
        if is_exact(self.weights):
            out = np.empty((d, d), dtype=object)
            out.fill(Fraction(0))
        else:
            out = np.zeros((d, d))
        rows = np.arange(d)
        for w, sigma in zip(self.weights, self.perms):
            out[rows, list(sigma)] += w
        return out

    def reconstruction_error(self, m: StochasticMatrix) -> float:
        """Max entrywise |sum q_i P_i - M|."""
        return float(np.max(np.abs(to_float(self.reconstruct()) - m.as_float())))

    def weight_of(self, sigma: Sequence[int]) -> Any:
        """Weight on a given permutation, 0 if absent."""
        sigma = tuple(sigma)
        for w, p in zip(self.weights, self.perms):
            if p == sigma:
                return w
        return Fraction(0) if is_exact(self.weights) else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "weights": [format_number(w) for w in self.weights],
            "permutations": [list(p) for p in self.perms],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BirkhoffDecomposition':
        values = parse_number_list(data["weights"])
        weights = to_exact(values) if values and isinstance(values[0], Fraction) \
            else np.asarray(values, dtype=np.float64)
        return cls(weights, tuple(tuple(p) for p in data["permutations"]))


def _has_perfect_matching(allowed: np.ndarray) -> bool:
    if allowed.size == 0:
        return True
    matching = maximum_bipartite_matching(csr_matrix(allowed.astype(np.int8)),
                                          perm_type='column')
    return bool(np.all(matching >= 0))


def perfect_matching(support: List[List[int]]) -> Optional[Permutation]:
    """Lexicographically smallest perfect matching on a square bipartite support graph.

    Rows are fixed in order, each to the smallest column that still leaves a
    perfect matching for the rows below it.

    Args:
        support: support[r] lists the columns usable by row r

    Returns:
        sigma with sigma[r] the column matched to row r, or None
    """
    n = len(support)
    allowed = np.zeros((n, n), dtype=bool)
    for row, cols in enumerate(support):
        allowed[row, list(cols)] = True
    if not _has_perfect_matching(allowed):
        return None

    free = np.ones(n, dtype=bool)
    sigma: List[int] = []
    for row in range(n):
        for col in np.flatnonzero(allowed[row] & free):
            free[col] = False
            if _has_perfect_matching(allowed[row + 1:][:, free]):
                sigma.append(int(col))
                break
            free[col] = True
    return tuple(sigma)


def birkhoff_decompose(m: StochasticMatrix) -> BirkhoffDecomposition:
    """Write a doubly-stochastic matrix as a convex combination of permutations.

    Each round takes the lexicographically smallest perfect matching on the
    positive entries, subtracts the smallest matched entry along it and
    zeroes entries below 1e-12. Exact input is decomposed exactly.

    Raises:
        InvalidInputError: If M is not doubly stochastic within 1e-10
        InvariantViolationError: If the support stops admitting a perfect matching
    """
    if not m.is_doubly_stochastic(DOUBLY_STOCHASTIC_TOLERANCE):
        deviation = float(np.max(np.abs(to_float(m.column_sums()) - 1.0)))
        raise InvalidInputError(
            f"matrix is not doubly stochastic (column error {deviation:.3e})",
            measured={"column_error": deviation})

    d = m.d
    exact = m.exact
    residual = np.array(m.entries, copy=True)
    threshold = 0 if exact else ZERO_THRESHOLD
    weights: List[Any] = []
    perms: List[Permutation] = []
    limit = max_permutation_count(d)

    while True:
        remaining = residual.sum()
        if exact and remaining == 0:
            break
        if not exact and float(remaining) <= RESIDUAL_TOLERANCE:
            break
        support = [[c for c in range(d) if residual[r, c] > threshold] for r in range(d)]
        sigma = perfect_matching(support)
        if sigma is None:
            raise InvariantViolationError(
                "residual support has no perfect matching",
                measured={"residual_mass": float(remaining), "rounds": len(perms)})
        weight = min(residual[r, sigma[r]] for r in range(d))
        residual[np.arange(d), list(sigma)] -= weight
        if not exact:
            residual[residual < ZERO_THRESHOLD] = 0.0
        weights.append(weight)
        perms.append(sigma)
        logger.debug(f"Birkhoff round {len(perms)}: weight {float(weight):.6g} on {sigma}")
        if len(perms) > limit:
            raise InvariantViolationError(
                f"decomposition exceeded {limit} permutations",
                measured={"rounds": len(perms), "d": d})

    if exact:
        weight_arr = to_exact(weights)
    else:
        weight_arr = np.asarray(weights, dtype=np.float64)
        weight_arr = weight_arr / weight_arr.sum()
    return BirkhoffDecomposition(weight_arr, tuple(perms))


def identity_weight(decomposition: BirkhoffDecomposition) -> Any:
    """Weight q_1 on the identity permutation."""
    return decomposition.weight_of(tuple(range(decomposition.d)))
