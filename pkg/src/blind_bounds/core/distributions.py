"""Distributions, classical ensembles and joint tables.

Every container wraps a read-only numpy array. ``dtype=object`` arrays hold
``fractions.Fraction`` values (exact backend); ``float64`` arrays are the
floating backend. Symbols are 0-based here; docs use c = 1..d.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    InvalidInputError,
    ParameterRangeError,
)
from ..utils.serialization import format_number, parse_number_list

Number = Union[int, float, Fraction]

SUM_TOLERANCE = 1e-12


def is_exact(arr: np.ndarray) -> bool:
    """True when the array uses the exact (Fraction) backend."""
    return arr.dtype == object


def to_exact(values: Iterable[Number]) -> np.ndarray:
    """Build an object array of Fractions."""
    items = [v if isinstance(v, Fraction) else Fraction(v) for v in values]
    arr = np.empty(len(items), dtype=object)
    arr[:] = items
    return arr


def to_float(arr: np.ndarray) -> np.ndarray:
    """Float64 view of either backend."""
    return np.asarray(arr, dtype=np.float64)


def common_backend(*arrays: np.ndarray) -> List[np.ndarray]:
    """Return the arrays in one backend: exact only if all of them are."""
    if all(is_exact(a) for a in arrays):
        return list(arrays)
    return [to_float(a) for a in arrays]


def freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


def check_dimension(d: Any) -> int:
    """Validate an alphabet size.

    Raises:
        InvalidDimensionError: If d is not a positive integer
    """
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 1:
        raise InvalidDimensionError(f"alphabet size must be a positive integer, got {d!r}")
    return int(d)


def _coerce_vector(values: Any) -> np.ndarray:
    arr = np.asarray(values)
    # integer input (e.g. a point mass written as [0, 1]) counts as exact
    if arr.dtype == object or arr.dtype.kind in "iub":
        return to_exact(np.ravel(arr)).reshape(arr.shape)
    return arr.astype(np.float64)


def _check_normalized(arr: np.ndarray, what: str):
    if is_exact(arr):
        if any(v < 0 for v in arr.flat):
            raise InvalidInputError(f"{what} has a negative entry")
        total = sum(arr.flat, Fraction(0))
        if total != 1:
            raise InvalidInputError(f"{what} sums to {total}, expected exactly 1",
                                    measured={"sum": str(total)})
    else:
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError(f"{what} has non-finite entries")
        if np.any(arr < 0):
            raise InvalidInputError(f"{what} has a negative entry",
                                    measured={"min": float(arr.min())})
        total = float(arr.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidInputError(f"{what} sums to {total!r}, expected 1",
                                    measured={"sum": total})


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability vector over an alphabet of size d."""
    probs: np.ndarray

    def __post_init__(self):
        arr = _coerce_vector(self.probs)
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidDimensionError("a distribution needs a non-empty 1-D vector")
        _check_normalized(arr, "distribution")
        object.__setattr__(self, "probs", freeze(arr))

    @property
    def d(self) -> int:
        return int(self.probs.size)

    @property
    def exact(self) -> bool:
        return is_exact(self.probs)

    def __len__(self) -> int:
        return self.d

    def __getitem__(self, index: int) -> Number:
        return self.probs[index]

    def as_float(self) -> np.ndarray:
        return to_float(self.probs)

    def to_float(self) -> 'Distribution':
        """Same distribution on the floating backend."""
        if not self.exact:
            return self
        return Distribution(self.as_float())

    def support(self) -> np.ndarray:
        """Indices with non-zero mass."""
        return np.flatnonzero(self.as_float() > 0)

    def equals(self, other: 'Distribution', tol: float = 0.0) -> bool:
        """Entrywise comparison; exact when both are exact and tol is 0."""
        if self.d != other.d:
            return False
        a, b = common_backend(self.probs, other.probs)
        if is_exact(a):
            return all(x == y for x, y in zip(a, b))
        return bool(np.max(np.abs(a - b)) <= tol)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {"probs": [format_number(v) for v in self.probs]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Distribution':
        """Create Distribution from dictionary."""
        return cls(parse_number_list(data["probs"]))

    def __repr__(self) -> str:
        shown = ", ".join(format_number(v) for v in self.probs[:8])
        more = ", ..." if self.d > 8 else ""
        return f"Distribution(d={self.d}, [{shown}{more}])"


def uniform(d: int, exact: bool = True) -> Distribution:
    """Uniform distribution, every entry 1/d."""
    d = check_dimension(d)
    if exact:
        return Distribution(to_exact([Fraction(1, d)] * d))
    return Distribution(np.full(d, 1.0 / d))


def staircase(d: int, exact: bool = True) -> Distribution:
    """Linearly decreasing distribution v_c = (d - c + 1) / eta, eta = d(d+1)/2."""
    d = check_dimension(d)
    eta = d * (d + 1) // 2
    if exact:
        return Distribution(to_exact(Fraction(d - i, eta) for i in range(d)))
    return Distribution(np.arange(d, 0, -1, dtype=np.float64) / eta)


def staircase_eta(d: int) -> int:
    """Normaliser eta = d(d+1)/2 of the staircase distribution."""
    d = check_dimension(d)
    return d * (d + 1) // 2


def point_mass(d: int, index: int, exact: bool = True) -> Distribution:
    """All mass on one symbol (0-based index)."""
    d = check_dimension(d)
    if not 0 <= index < d:
        raise ParameterRangeError(f"index {index} outside alphabet of size {d}")
    if exact:
        values = [Fraction(0)] * d
        values[index] = Fraction(1)
        return Distribution(to_exact(values))
    arr = np.zeros(d)
    arr[index] = 1.0
    return Distribution(arr)


def product(p: Distribution, q: Distribution) -> Distribution:
    """Product distribution over p.d * q.d symbols, entry (a, b) -> a * q.d + b."""
    a, b = common_backend(p.probs, q.probs)
    return Distribution(np.outer(a, b).ravel())


def sample(p: Distribution, seed: int, n: int) -> np.ndarray:
    """Draw n i.i.d. symbols from p; deterministic given seed."""
    if n < 0:
        raise ParameterRangeError(f"sample count must be non-negative, got {n}")
    rng = np.random.default_rng(seed)
    probs = p.as_float()
    probs = probs / probs.sum()
    return rng.choice(p.d, size=n, p=probs)


def empirical(samples: Sequence[int], d: int) -> Distribution:
    """Empirical distribution of a non-empty sample."""
    d = check_dimension(d)
    counts = np.bincount(np.asarray(samples, dtype=np.int64), minlength=d)
    if counts.size != d:
        raise DimensionMismatchError(f"samples contain symbols outside alphabet of size {d}")
    total = counts.sum()
    if total == 0:
        raise InvalidInputError("empirical distribution of an empty sample")
    return Distribution(counts / total)


def random_distribution(d: int, rng: np.random.Generator,
                        concentration: float = 1.0) -> Distribution:
    """Dirichlet draw on the simplex (float backend), used by property suites."""
    d = check_dimension(d)
    probs = rng.dirichlet(np.full(d, concentration))
    # renormalise so the float sum is within tolerance
    probs = np.maximum(probs, 0.0)
    return Distribution(probs / probs.sum())


@dataclass(frozen=True, eq=False)
class ClassicalEnsemble:
    """Prior over labels plus one conditional distribution per label."""
    priors: Distribution
    conditionals: Tuple[Distribution, ...]

    def __post_init__(self):
        conditionals = tuple(self.conditionals)
        if self.priors.d != len(conditionals):
            raise DimensionMismatchError(
                f"{self.priors.d} priors but {len(conditionals)} conditionals")
        sizes = {c.d for c in conditionals}
        if len(sizes) != 1:
            raise DimensionMismatchError(f"conditionals have differing sizes {sorted(sizes)}")
        object.__setattr__(self, "conditionals", conditionals)

    @property
    def n_labels(self) -> int:
        return self.priors.d

    @property
    def d(self) -> int:
        return self.conditionals[0].d

    @property
    def exact(self) -> bool:
        return self.priors.exact and all(c.exact for c in self.conditionals)

    def conditional_matrix(self) -> np.ndarray:
        """Rows rho^x as an (|X|, d) array in the ensemble's backend."""
        rows = [c.probs for c in self.conditionals]
        if self.exact:
            table = np.empty((self.n_labels, self.d), dtype=object)
            for x, row in enumerate(rows):
                table[x, :] = row
            return table
        return np.vstack([to_float(r) for r in rows])

    def average(self) -> Distribution:
        """Average state p_C = sum_x p(x) rho^x."""
        priors, table = common_backend(self.priors.probs, self.conditional_matrix())
        return Distribution(priors @ table)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "priors": self.priors.to_dict(),
            "conditionals": [c.to_dict() for c in self.conditionals],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ClassicalEnsemble':
        return cls(
            priors=Distribution.from_dict(data["priors"]),
            conditionals=tuple(Distribution.from_dict(c) for c in data["conditionals"]),
        )


def equiprobable(*states: Distribution) -> ClassicalEnsemble:
    """Ensemble with equal priors over the given states."""
    if not states:
        raise InvalidInputError("an ensemble needs at least one state")
    exact = all(s.exact for s in states)
    return ClassicalEnsemble(uniform(len(states), exact=exact), tuple(states))


def uniform_staircase(d: int, exact: bool = True) -> ClassicalEnsemble:
    """Equiprobable {uniform(d), staircase(d)} ensemble."""
    return equiprobable(uniform(d, exact=exact), staircase(d, exact=exact))


def two_state_example(exact: bool = True) -> ClassicalEnsemble:
    """Equiprobable pair (1/2, 1/2) and (1/3, 2/3) on a binary alphabet."""
    if exact:
        second = Distribution(to_exact([Fraction(1, 3), Fraction(2, 3)]))
    else:
        second = Distribution(np.array([1.0 / 3.0, 2.0 / 3.0]))
    return equiprobable(uniform(2, exact=exact), second)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Classical joint table p(x, c, c') with axes (|X|, d, d)."""
    table: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.table)
        if raw.ndim != 3 or raw.shape[1] != raw.shape[2] or raw.size == 0:
            raise InvalidDimensionError(
                f"joint table must have shape (|X|, d, d), got {raw.shape}")
        arr = _coerce_vector(raw.ravel()).reshape(raw.shape)
        _check_normalized(arr, "joint distribution")
        object.__setattr__(self, "table", freeze(arr))

    @classmethod
    def from_channel(cls, ensemble: ClassicalEnsemble, channel) -> 'JointDistribution':
        """tau(x, c, c') = p(x) rho^x(c) M[c, c'] for a row-stochastic channel."""
        entries = channel.entries
        if entries.shape != (ensemble.d, ensemble.d):
            raise DimensionMismatchError(
                f"channel of size {entries.shape} for alphabet {ensemble.d}")
        priors, cond, m = common_backend(
            ensemble.priors.probs, ensemble.conditional_matrix(), entries)
        weighted = priors[:, None] * cond
        return cls(weighted[:, :, None] * m[None, :, :])

    @property
    def n_labels(self) -> int:
        return int(self.table.shape[0])

    @property
    def d(self) -> int:
        return int(self.table.shape[1])

    @property
    def exact(self) -> bool:
        return is_exact(self.table)

    def label_priors(self) -> Distribution:
        return Distribution(self.table.sum(axis=(1, 2)))

    def pair(self, x: int) -> np.ndarray:
        """Conditional table tau^x_{CC'} (sums to 1)."""
        mass = self.table[x].sum()
        if mass == 0:
            raise InvalidInputError(f"label {x} has zero probability")
        return self.table[x] / mass

    def c_marginal(self, x: int) -> Distribution:
        return Distribution(self.pair(x).sum(axis=1))

    def cprime_marginal(self, x: int) -> Distribution:
        return Distribution(self.pair(x).sum(axis=0))

    def markov_gap(self) -> float:
        """Largest deviation from p(c'|c, x) being independent of x."""
        table = to_float(self.table)
        pc = table.sum(axis=(0, 2))
        gap = 0.0
        for c in range(self.d):
            if pc[c] <= 0:
                continue
            shared = table[:, c, :].sum(axis=0) / pc[c]
            for x in range(self.n_labels):
                mass = table[x, c, :].sum()
                if mass > 0:
                    gap = max(gap, float(np.max(np.abs(table[x, c, :] / mass - shared))))
        return gap

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shape": list(self.table.shape),
            "table": [format_number(v) for v in self.table.ravel()],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'JointDistribution':
        values = parse_number_list(data["table"])
        return cls(np.asarray(values).reshape(tuple(data["shape"])))
