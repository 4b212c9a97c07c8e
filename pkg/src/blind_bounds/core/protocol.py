"""Bucketing compression protocol for a pair of commuting states.

Every symbol a is filed under a pair of geometric levels (i, j): i from p(a)
under rho and j from q(a) under sigma, with level k covering the half-open
interval ((1 - delta)^k, (1 - delta)^(k-1)] and level u + 1 collecting
everything at or below (1 - delta)^u. The sender transmits the pair; the
receiver outputs a uniformly random member of that bucket.
"""

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.special import entr

from .distributions import (
    Distribution,
    check_dimension,
    is_exact,
    sample,
    staircase,
    to_exact,
    uniform,
)
from .errors import (
    DimensionMismatchError,
    InvalidInputError,
    InvariantViolationError,
    ParameterRangeError,
    ProtocolError,
    UnsupportedInputError,
)
from .info_measures import entropy, fidelity, trace_distance
from .models import KIErrorReport, ProtocolReport
from ..utils.logger import get_logger
from ..utils.serialization import format_number

logger = get_logger(__name__)

BucketIndex = Tuple[int, int]
Number = Union[Fraction, float]

ERROR_SLACK = 1e-12
MC_SIGMAS = 3.0
DEFAULT_SAMPLES = 100_000
CLAMP_MARGIN = 2.0 ** -20


@dataclass(frozen=True)
class BucketProtocol:
    """Bucket table T[(i, j)] over a d-symbol alphabet (levels 1-based, symbols 0-based)."""
    delta: Number
    gamma: Number
    u: int
    d: int
    buckets: Dict[BucketIndex, Tuple[int, ...]]
    symbol_to_bucket: Tuple[BucketIndex, ...]

    def bucket_of(self, a: int) -> BucketIndex:
        return self.symbol_to_bucket[a]

    def bucket_sizes(self) -> np.ndarray:
        """|T(a)| for every symbol a."""
        return np.array([len(self.buckets[ij]) for ij in self.symbol_to_bucket])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": format_number(self.delta),
            "gamma": format_number(self.gamma),
            "u": self.u,
            "d": self.d,
            "buckets": [{"i": i, "j": j, "symbols": list(symbols)}
                        for (i, j), symbols in sorted(self.buckets.items())],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BucketProtocol':
        d = int(data["d"])
        buckets = {(int(b["i"]), int(b["j"])): tuple(int(a) for a in b["symbols"])
                   for b in data["buckets"]}
        owner: List[Optional[BucketIndex]] = [None] * d
        for ij, symbols in buckets.items():
            for a in symbols:
                if not 0 <= a < d or owner[a] is not None:
                    raise InvalidInputError(f"symbol {a} is out of range or listed twice")
                owner[a] = ij
        if any(o is None for o in owner):
            raise InvalidInputError("buckets do not cover the alphabet")
        delta, gamma = (_read_parameter(data[k]) for k in ("delta", "gamma"))
        return cls(delta, gamma, int(data["u"]), d, buckets, tuple(owner))


def _read_parameter(value: Any) -> Number:
    text = str(value)
    return Fraction(text) if "/" in text else float(text)


def _check_parameters(delta: Number, gamma: Number):
    if not 0 < delta < Fraction(1, 2):
        raise ParameterRangeError(f"delta must lie in (0, 1/2), got {delta}")
    if not 0 < gamma < 1:
        raise ParameterRangeError(f"gamma must lie in (0, 1), got {gamma}")


def level_count(d: int, delta: Number, gamma: Number) -> int:
    """u = ceil(log(d/gamma) / log(1/(1-delta))), raised until (1-delta)^u <= gamma/d."""
    d = check_dimension(d)
    _check_parameters(delta, gamma)
    u = max(1, math.ceil(math.log(d / float(gamma)) / math.log(1.0 / (1.0 - float(delta)))))
    exact = isinstance(delta, Fraction) and isinstance(gamma, Fraction)
    while True:
        if exact:
            if (1 - delta) ** u <= gamma / d:
                return u
        elif (1.0 - float(delta)) ** u <= float(gamma) / d:
            return u
        u += 1


def _levels(probs: np.ndarray, delta: Number, u: int) -> List[int]:
    """Level index of every probability: (number of thresholds >= p) + 1."""
    if is_exact(probs) and isinstance(delta, Fraction):
        ascending = [(1 - delta) ** k for k in range(u, 0, -1)]
        return [u - bisect.bisect_left(ascending, p) + 1 for p in probs]
    ascending = (1.0 - float(delta)) ** np.arange(u, 0, -1, dtype=np.float64)
    counts = u - np.searchsorted(ascending, np.asarray(probs, dtype=np.float64), side="left")
    return [int(c) + 1 for c in counts]


def build_protocol(rho: Distribution, sigma: Distribution, delta: Number,
                   gamma: Number) -> BucketProtocol:
    """File every symbol under its (rho-level, sigma-level) bucket.

    Raises:
        DimensionMismatchError: If rho and sigma differ in size
        ParameterRangeError: If delta is outside (0, 1/2) or gamma outside (0, 1)
    """
    if rho.d != sigma.d:
        raise DimensionMismatchError(f"states of sizes {rho.d} and {sigma.d}")
    _check_parameters(delta, gamma)
    d = rho.d
    u = level_count(d, delta, gamma)
    rows = _levels(rho.probs, delta, u)
    cols = _levels(sigma.probs, delta, u)

    members: Dict[BucketIndex, List[int]] = {}
    for a, ij in enumerate(zip(rows, cols)):
        members.setdefault(ij, []).append(a)
    buckets = {ij: tuple(symbols) for ij, symbols in members.items()}
    logger.debug(f"Built protocol: d={d}, u={u}, {len(buckets)} non-empty buckets")
    return BucketProtocol(delta, gamma, u, d, buckets, tuple(zip(rows, cols)))


def encode(p: BucketProtocol, a: int) -> BucketIndex:
    """Bucket index (i, j) of a 0-based symbol."""
    if isinstance(a, bool) or not isinstance(a, (int, np.integer)) or not 0 <= a < p.d:
        raise InvalidInputError(f"symbol {a!r} outside alphabet of size {p.d}")
    return p.symbol_to_bucket[int(a)]


def decode(p: BucketProtocol, ij: BucketIndex, seed: int) -> int:
    """Uniform draw from bucket ij; deterministic given seed.

    Raises:
        ProtocolError: If the bucket is empty
    """
    symbols = p.buckets.get(tuple(ij))
    if not symbols:
        raise ProtocolError(f"bucket {tuple(ij)} is empty")
    rng = np.random.default_rng(seed)
    return symbols[int(rng.integers(len(symbols)))]


def induced_output(p: BucketProtocol, source: Distribution) -> Distribution:
    """Exact output distribution: each bucket's mass spread evenly over it."""
    if source.d != p.d:
        raise DimensionMismatchError(f"input of size {source.d} for protocol of size {p.d}")
    if source.exact:
        out = [Fraction(0)] * p.d
        for symbols in p.buckets.values():
            share = sum((source.probs[a] for a in symbols), Fraction(0)) / len(symbols)
            for a in symbols:
                out[a] = share
        return Distribution(to_exact(out))
    ids, _ = _bucket_ids(p)
    probs = source.as_float()
    mass = np.bincount(ids, weights=probs)
    size = np.bincount(ids)
    out = mass[ids] / size[ids]
    return Distribution(out / out.sum())


def _bucket_ids(p: BucketProtocol) -> Tuple[np.ndarray, List[BucketIndex]]:
    order = sorted(p.buckets)
    index = {ij: k for k, ij in enumerate(order)}
    return np.array([index[ij] for ij in p.symbol_to_bucket], dtype=np.int64), order


def _spread_error(p: BucketProtocol, probs: np.ndarray, bucket_mass: np.ndarray) -> float:
    """sum_T sum_{a in T} (mass_T / |T| - p_a)^+ for per-bucket masses indexed by bucket id."""
    ids, order = _bucket_ids(p)
    sizes = np.bincount(ids, minlength=len(order))
    spread = bucket_mass[ids] / sizes[ids]
    return float(np.maximum(spread - probs, 0.0).sum())


def monte_carlo_error(p: BucketProtocol, source: Distribution, seed: int,
                      n: int) -> Tuple[float, float]:
    """Estimate the local error from n simulated copies.

    Symbols are sampled, encoded and decoded; the decoded bucket histogram
    gives estimated bucket masses, which are spread evenly and compared with
    the source.

    Returns:
        (estimated error, standard deviation of the estimate)
    """
    if n <= 0:
        raise ParameterRangeError(f"Monte Carlo needs n > 0, got {n}")
    sample_seq, decode_seq = np.random.SeedSequence(seed).spawn(2)
    ids, order = _bucket_ids(p)
    symbols = sample(source, int(sample_seq.generate_state(1)[0]), n)
    sent = ids[symbols]

    # uniform draw inside each transmitted bucket
    members = [np.array(p.buckets[ij]) for ij in order]
    sizes = np.array([len(m) for m in members])
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    flat = np.concatenate(members)
    rng = np.random.default_rng(decode_seq)
    picks = (rng.random(n) * sizes[sent]).astype(np.int64)
    decoded = flat[offsets[sent] + picks]

    estimated = np.bincount(ids[decoded], minlength=len(order)) / n
    error = _spread_error(p, source.as_float(), estimated)
    sigma = math.sqrt(float(np.sum(estimated * (1.0 - estimated))) / n)
    return error, sigma


def protocol_rate_bound(d: int, delta: Number, gamma: Number) -> float:
    """2 log log(d/gamma) + 2 log(1/delta) + 3."""
    return 2.0 * math.log2(math.log2(d / float(gamma))) + 2.0 * math.log2(1.0 / float(delta)) + 3.0


def _truncation_mass(p: BucketProtocol, probs: np.ndarray, axis: int) -> float:
    return float(sum(probs[a] for a, ij in enumerate(p.symbol_to_bucket) if ij[axis] == p.u + 1))


def _max_spread_fraction(p: BucketProtocol, probs: np.ndarray, axis: int) -> float:
    """Largest per-bucket spreading error relative to bucket mass, untruncated buckets only."""
    worst = 0.0
    for ij, symbols in p.buckets.items():
        if ij[axis] > p.u:
            continue
        values = np.array([float(probs[a]) for a in symbols])
        mass = values.sum()
        if mass > 0:
            worst = max(worst, float(np.abs(mass / len(values) - values).sum() / (2.0 * mass)))
    return worst


def protocol_report(rho: Distribution, sigma: Distribution, delta: Number, gamma: Number,
                    seed: Optional[int] = 0, samples: int = DEFAULT_SAMPLES,
                    protocol: Optional[BucketProtocol] = None) -> ProtocolReport:
    """Communication cost and exact local errors, cross-checked by simulation.

    Pass ``protocol`` to reuse a table already built for the same pair and
    parameters.

    Raises:
        DimensionMismatchError: If ``protocol`` was built for other parameters
        InvariantViolationError: If a local error exceeds delta + gamma, the
            simulated error misses the exact one by more than 3 sigma, or
            bits_sent exceeds the rate bound when log(d/gamma) >= 1
    """
    if protocol is None:
        p = build_protocol(rho, sigma, delta, gamma)
    elif (protocol.d, protocol.delta, protocol.gamma) != (rho.d, delta, gamma):
        raise DimensionMismatchError(
            f"protocol built for d={protocol.d}, delta={protocol.delta}, gamma={protocol.gamma}")
    else:
        p = protocol
    d = p.d
    bits = 2.0 * math.log2(p.u + 1)
    rate = protocol_rate_bound(d, delta, gamma)
    applies = math.log2(d / float(gamma)) >= 1.0
    if bits > rate + ERROR_SLACK:
        if applies:
            raise InvariantViolationError(
                f"bits sent {bits:.6g} exceed rate bound {rate:.6g}",
                measured={"bits_sent": bits, "rate_bound": rate, "u": p.u})
        logger.warning(f"Rate bound {rate:.4g} below bits sent {bits:.4g} (log(d/gamma) < 1)")

    induced_rho = induced_output(p, rho)
    induced_sigma = induced_output(p, sigma)
    err_rho = float(trace_distance(rho, induced_rho))
    err_sigma = float(trace_distance(sigma, induced_sigma))
    bound = float(delta) + float(gamma)
    if max(err_rho, err_sigma) > bound + ERROR_SLACK:
        raise InvariantViolationError(
            "local error exceeds delta + gamma",
            measured={"err_rho": err_rho, "err_sigma": err_sigma, "bound": bound})

    mc: Dict[str, Optional[float]] = {}
    if samples > 0 and seed is not None:
        seeds = np.random.SeedSequence(seed).spawn(2)
        for name, source, exact_err, child in (("rho", rho, err_rho, seeds[0]),
                                               ("sigma", sigma, err_sigma, seeds[1])):
            estimate, spread = monte_carlo_error(p, source, int(child.generate_state(1)[0]), samples)
            if abs(estimate - exact_err) > MC_SIGMAS * spread + ERROR_SLACK:
                raise InvariantViolationError(
                    f"simulated {name} error {estimate:.6g} differs from exact {exact_err:.6g}",
                    measured={"estimate": estimate, "exact": exact_err, "sigma": spread})
            mc[f"mc_error_{name}"] = estimate
            mc[f"mc_sigma_{name}"] = spread

    rho_probs = rho.as_float()
    sigma_probs = sigma.as_float()
    report = ProtocolReport(
        d=d,
        delta=float(delta),
        gamma=float(gamma),
        u=p.u,
        bits_sent=bits,
        bits_sent_code=math.ceil(bits - ERROR_SLACK),
        rate_bound=rate,
        rate_bound_applies=applies,
        induced_rho=[format_number(v) for v in induced_rho.probs],
        induced_sigma=[format_number(v) for v in induced_sigma.probs],
        local_error_rho=err_rho,
        local_error_sigma=err_sigma,
        error_bound=bound,
        seed=seed,
        samples=samples if mc else 0,
        truncation_mass_rho=_truncation_mass(p, rho_probs, 0),
        truncation_mass_sigma=_truncation_mass(p, sigma_probs, 1),
        max_spread_error=max(_max_spread_fraction(p, rho_probs, 0),
                             _max_spread_fraction(p, sigma_probs, 1)),
        spread_error_bound=float(delta) / (2.0 * (1.0 - float(delta))),
        nonempty_buckets=len(p.buckets),
        bucket_count_bound=(p.u + 1) ** 2,
        **mc,
    )
    logger.info(f"Protocol d={d}: u={p.u}, bits {bits:.4f}, errors ({err_rho:.4g}, {err_sigma:.4g})")
    return report


def _binary_entropy(x: float) -> float:
    return float((entr(x) + entr(1.0 - x)) / math.log(2.0))


def ki_error_functions(rho: Distribution, sigma: Distribution,
                       p: BucketProtocol) -> KIErrorReport:
    """Fidelity error f, leakage lambda and entropy error g of the protocol channel.

    For the equiprobable pair {rho, sigma} with average r:
    f = 1 - (F(rho, rho') + F(sigma, sigma')) / 2, 1 - lambda = sum_a r(a) / |T(a)|
    and g = H(lambda) + lambda log(d - 1). g is undefined (degenerate) for d = 1.
    """
    if rho.d != p.d or sigma.d != p.d:
        raise DimensionMismatchError(f"states do not match protocol of size {p.d}")
    induced_rho = induced_output(p, rho)
    induced_sigma = induced_output(p, sigma)
    f_rho = fidelity(rho, induced_rho)
    f_sigma = fidelity(sigma, induced_sigma)
    for fid, src, out in ((f_rho, rho, induced_rho), (f_sigma, sigma, induced_sigma)):
        if fid < 1.0 - float(trace_distance(src, out)) - ERROR_SLACK:
            raise InvariantViolationError("fidelity below 1 - trace distance",
                                          measured={"fidelity": fid})
    f = 1.0 - 0.5 * (f_rho + f_sigma)

    average = 0.5 * (rho.as_float() + sigma.as_float())
    one_minus_lambda = float(np.sum(average / p.bucket_sizes()))
    lam = min(1.0, max(0.0, 1.0 - one_minus_lambda))
    d = p.d
    degenerate = d < 2
    g = None if degenerate else _binary_entropy(lam) + lam * math.log2(d - 1)
    max_r = float(average.max())
    delta = float(p.delta)
    gamma = float(p.gamma)

    rate = None
    if g is not None:
        rate = entropy(Distribution(average / average.sum())) - g
    return KIErrorReport(
        d=d,
        delta=delta,
        gamma=gamma,
        u=p.u,
        f=f,
        lam=lam,
        g=g,
        degenerate=degenerate,
        f_bound=2.0 * delta + 2.0 * gamma,
        one_minus_lambda=one_minus_lambda,
        leakage_bound=max_r * (p.u + 1) ** 2,
        analytic_leakage_bound=4.0 * math.log2(d / gamma) ** 2 / delta ** 2 * max_r,
        rate_lower_bound=rate,
    )


def ki_rate_lower_bound(rho: Distribution, sigma: Distribution, p: BucketProtocol) -> float:
    """S(r) - g for the average state r.

    Raises:
        UnsupportedInputError: If g is degenerate (d = 1)
    """
    report = ki_error_functions(rho, sigma, p)
    if report.rate_lower_bound is None:
        raise UnsupportedInputError("g is undefined for a single-symbol alphabet")
    return report.rate_lower_bound


def _clamp(value: float, upper: float) -> float:
    return min(max(value, CLAMP_MARGIN), upper - CLAMP_MARGIN)


def ki_sensitivity(d: int) -> KIErrorReport:
    """f, lambda and g for the uniform/staircase pair at delta = gamma = log^2 d / sqrt d.

    Parameters outside (0, 1/2) and (0, 1) are pulled just inside with a
    warning. Targets: f <= 4 log^2 d / sqrt d and g >= log(d - 1) - 20 / log d.
    """
    d = check_dimension(d)
    if d < 2:
        raise ParameterRangeError("sensitivity needs d >= 2")
    raw = math.log2(d) ** 2 / math.sqrt(d)
    delta = _clamp(raw, 0.5)
    gamma = _clamp(raw, 1.0)
    clamped = delta != raw or gamma != raw
    if clamped:
        logger.warning(f"log^2 d / sqrt d = {raw:.4g} at d={d}; using delta={delta:.6g}, gamma={gamma:.6g}")

    rho = uniform(d, exact=False)
    sigma = staircase(d, exact=False)
    protocol = build_protocol(rho, sigma, delta, gamma)
    report = ki_error_functions(rho, sigma, protocol)
    return report.model_copy(update={
        "f_target": 4.0 * raw,
        "g_target": math.log2(d - 1) - 20.0 / math.log2(d) if d > 2 else None,
        "clamped": clamped,
        "raw_parameter": raw,
    })
