"""Row-stochastic matrices and the approximate doubly-stochastic construction."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Sequence, Union

import numpy as np

from .debug_config import DebugConfig
from .distributions import (
    SUM_TOLERANCE,
    Distribution,
    check_dimension,
    common_backend,
    freeze,
    is_exact,
    to_exact,
    to_float,
    uniform,
)
from .errors import (
    ConstraintViolatedError,
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidInputError,
    ParameterRangeError,
)
from .info_measures import l1_distance
from ..utils.logger import get_logger
from ..utils.serialization import format_number, parse_number_list

logger = get_logger(__name__)

Number = Union[int, float, Fraction]


def _coerce_matrix(values: Any) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object or arr.dtype.kind in "iub":
        return to_exact(np.ravel(arr)).reshape(arr.shape)
    return arr.astype(np.float64)


def _exact_zeros(shape) -> np.ndarray:
    arr = np.empty(shape, dtype=object)
    arr.fill(Fraction(0))
    return arr


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Channel C -> C'. Rows index the input symbol, columns the output."""
    entries: np.ndarray

    def __post_init__(self):
        arr = _coerce_matrix(self.entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.size == 0:
            raise InvalidDimensionError(
                f"stochastic matrix must be square and non-empty, got shape {arr.shape}")
        if is_exact(arr):
            if any(v < 0 for v in arr.flat):
                raise InvalidInputError("stochastic matrix has a negative entry")
            bad = [r for r in range(arr.shape[0]) if sum(arr[r], Fraction(0)) != 1]
            if bad:
                raise InvalidInputError(f"rows {bad} do not sum to exactly 1")
        else:
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise InvalidInputError("stochastic matrix entries must be finite and >= 0")
            row_error = float(np.max(np.abs(arr.sum(axis=1) - 1.0)))
            if row_error > SUM_TOLERANCE:
                raise InvalidInputError(f"row sums deviate from 1 by {row_error:.3e}",
                                        measured={"row_error": row_error})
        object.__setattr__(self, "entries", freeze(arr))

    @property
    def d(self) -> int:
        return int(self.entries.shape[0])

    @property
    def exact(self) -> bool:
        return is_exact(self.entries)

    def as_float(self) -> np.ndarray:
        return to_float(self.entries)

    def diagonal(self) -> np.ndarray:
        return np.array(np.diag(self.entries))

    def column_sums(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def is_doubly_stochastic(self, tol: float = 1e-10) -> bool:
        """Column sums equal 1 (exactly on the exact backend)."""
        sums = self.column_sums()
        if self.exact:
            return all(s == 1 for s in sums)
        return bool(np.max(np.abs(to_float(sums) - 1.0)) <= tol)

    def is_identity(self, tol: float = 0.0) -> bool:
        if self.exact and tol == 0:
            return all(self.entries[r, c] == (1 if r == c else 0)
                       for r in range(self.d) for c in range(self.d))
        return bool(np.max(np.abs(self.as_float() - np.eye(self.d))) <= tol)

    def mix(self, other: 'StochasticMatrix', t: Number) -> 'StochasticMatrix':
        """(1 - t) * self + t * other."""
        if other.d != self.d:
            raise DimensionMismatchError(f"cannot mix sizes {self.d} and {other.d}")
        a, b = common_backend(self.entries, other.entries)
        if is_exact(a) and not isinstance(t, (Fraction, int)):
            a, b = to_float(a), to_float(b)
        if is_exact(a):
            t = Fraction(t)
        return StochasticMatrix((1 - t) * a + t * b)

    def to_dict(self) -> Dict[str, Any]:
        """Row-major entries."""
        return {"rows": [[format_number(v) for v in row] for row in self.entries]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StochasticMatrix':
        rows = data["rows"] if isinstance(data, dict) else data
        if not rows or any(len(r) != len(rows) for r in rows):
            raise InvalidInputError("matrix must be a non-empty square list of rows")
        flat = parse_number_list([v for row in rows for v in row])
        d = len(rows)
        if isinstance(flat[0], Fraction):
            return cls(to_exact(flat).reshape(d, d))
        return cls(np.asarray(flat, dtype=np.float64).reshape(d, d))

    def __repr__(self) -> str:
        kind = "exact" if self.exact else "float"
        return f"StochasticMatrix(d={self.d}, {kind})"


def identity(d: int, exact: bool = True) -> StochasticMatrix:
    d = check_dimension(d)
    if exact:
        arr = _exact_zeros((d, d))
        for i in range(d):
            arr[i, i] = Fraction(1)
        return StochasticMatrix(arr)
    return StochasticMatrix(np.eye(d))


def permutation(sigma: Sequence[int], exact: bool = True) -> StochasticMatrix:
    """Permutation matrix with P[r, sigma[r]] = 1 (0-based)."""
    d = len(sigma)
    if sorted(sigma) != list(range(d)):
        raise InvalidInputError(f"{list(sigma)} is not a permutation of 0..{d - 1}")
    if exact:
        arr = _exact_zeros((d, d))
        for r, c in enumerate(sigma):
            arr[r, c] = Fraction(1)
        return StochasticMatrix(arr)
    arr = np.zeros((d, d))
    arr[np.arange(d), list(sigma)] = 1.0
    return StochasticMatrix(arr)


def constant_rows(p: Distribution) -> StochasticMatrix:
    """Channel whose every row is p (output independent of input)."""
    return StochasticMatrix(np.tile(p.probs, (p.d, 1)))


def apply(p: Distribution, m: StochasticMatrix) -> Distribution:
    """Row-vector product pM."""
    if p.d != m.d:
        raise DimensionMismatchError(f"distribution of size {p.d} through channel of size {m.d}")
    probs, entries = common_backend(p.probs, m.entries)
    out = probs @ entries
    if not is_exact(out):
        # keep the float sum inside tolerance after the matrix product
        out = np.maximum(out, 0.0)
        out = out / out.sum()
    return Distribution(out)


def column_deviation(m: StochasticMatrix) -> np.ndarray:
    """alpha_{c'} = sum_c M[c, c'] - 1; sums to zero for any stochastic M."""
    return m.column_sums() - 1


def marginal_error(m: StochasticMatrix, p: Distribution) -> Union[Fraction, float]:
    """||p - pM||_1."""
    return l1_distance(p.probs, apply(p, m).probs)


def approx_doubly_stochastic(m: StochasticMatrix, eps: Number) -> StochasticMatrix:
    """Doubly-stochastic N close to a channel that nearly fixes the uniform input.

    N[c, c'] = (M[c, c'] + (4*d*eps - alpha[c'])/d) / (1 + 4*d*eps). Entries
    stay within 12*d*eps of M and ||vN - vM||_1 <= 12*d*eps for the staircase v.

    Args:
        m: Channel with ||u - uM||_1 <= 4*eps
        eps: Error parameter

    Returns:
        Doubly-stochastic matrix, exact when m and eps are exact

    Raises:
        ConstraintViolatedError: If ||u - uM||_1 > 4*eps
    """
    d = m.d
    if d < 2:
        raise InvalidDimensionError("approximation needs d >= 2")
    if eps < 0:
        raise ParameterRangeError(f"eps must be non-negative, got {eps}")

    exact = m.exact and isinstance(eps, (Fraction, int))
    entries = m.entries if exact else m.as_float()
    eps = Fraction(eps) if exact else float(eps)

    u = uniform(d, exact=exact)
    measured = marginal_error(m, u)
    if measured > 4 * eps + (0 if exact else SUM_TOLERANCE):
        raise ConstraintViolatedError(
            f"||u - uM||_1 = {float(measured):.3e} exceeds 4*eps = {float(4 * eps):.3e}",
            measured={"u_error": float(measured), "eps": float(eps)})

    k = DebugConfig.get_shift_constant()
    alpha = entries.sum(axis=0) - 1
    shift = (k * d * eps - alpha) / d
    n = (entries + shift[None, :]) / (1 + 4 * d * eps)
    if not exact:
        n = np.where(np.abs(n) < 1e-15, 0.0, n)
    if k != 4:
        logger.debug(f"Doubly-stochastic approximation using shift constant {k}")
        # a wrong shift constant leaves rows unnormalized; report it instead of failing construction
        rows = n.sum(axis=1)
        deviation = max(abs(float(r) - 1.0) for r in rows)
        if deviation > SUM_TOLERANCE:
            raise ConstraintViolatedError(
                f"constructed matrix has row sums off by {deviation:.3e}",
                measured={"row_error": deviation, "shift_constant": k})
    return StochasticMatrix(n)


def depolarizing(d: int, eps: Number, exact: bool = True) -> StochasticMatrix:
    """(1 - eps) * identity + eps * (every row uniform).

    Moves any input by at most eps in trace distance; the only fixed point is
    the uniform distribution when eps > 0.
    """
    d = check_dimension(d)
    if not 0 <= eps <= 1:
        raise ParameterRangeError(f"eps must lie in [0, 1], got {eps}")
    if exact and isinstance(eps, (Fraction, int)):
        return identity(d).mix(constant_rows(uniform(d)), Fraction(eps))
    return identity(d, exact=False).mix(constant_rows(uniform(d, exact=False)), float(eps))


def random_stochastic(d: int, rng: np.random.Generator,
                      concentration: float = 1.0) -> StochasticMatrix:
    """Independent Dirichlet rows."""
    d = check_dimension(d)
    rows = rng.dirichlet(np.full(d, concentration), size=d)
    rows = np.maximum(rows, 0.0)
    return StochasticMatrix(rows / rows.sum(axis=1, keepdims=True))


def random_doubly_stochastic(d: int, rng: np.random.Generator,
                             n_perms: int = 0) -> StochasticMatrix:
    """Random convex combination of permutation matrices.

    Args:
        d: Size
        rng: Random generator
        n_perms: Number of permutations mixed (default d + 2)
    """
    d = check_dimension(d)
    n_perms = n_perms or d + 2
    weights = rng.dirichlet(np.ones(n_perms))
    m = np.zeros((d, d))
    for w in weights:
        m[np.arange(d), rng.permutation(d)] += w
    m = m / m.sum(axis=1, keepdims=True)
    return StochasticMatrix(m)


def random_near_identity(d: int, rng: np.random.Generator, scale: float) -> StochasticMatrix:
    """(1 - t) * identity + t * R with R random stochastic and t uniform in [0, scale]."""
    d = check_dimension(d)
    t = float(rng.uniform(0.0, scale))
    noise = random_stochastic(d, rng).as_float()
    m = (1.0 - t) * np.eye(d) + t * noise
    return StochasticMatrix(m / m.sum(axis=1, keepdims=True))
