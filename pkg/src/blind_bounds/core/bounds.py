"""Lower bounds on the blind-compression rate of classical ensembles."""

import math
from fractions import Fraction
from typing import Dict, Optional, Union

import numpy as np

from .distributions import (
    SUM_TOLERANCE,
    ClassicalEnsemble,
    Distribution,
    JointDistribution,
    product,
    uniform_staircase,
)
from .errors import (
    ConstraintViolatedError,
    DimensionMismatchError,
    InvalidDimensionError,
    InvariantViolationError,
    ParameterRangeError,
    UnsupportedInputError,
)
from .info_measures import (
    conditional_entropy,
    conditional_mutual_information,
    holevo_information,
    kl_divergence_of,
    trace_distance,
)
from .models import ChainReport, RateBound
from .rigidity import rigidity_floor
from .stochastic import StochasticMatrix
from ..utils.logger import get_logger
from ..utils.serialization import format_number

logger = get_logger(__name__)

Number = Union[Fraction, float]

CHAIN_SLACK = 1e-10
MARKOV_TOLERANCE = 1e-9


def _log2(x: float) -> float:
    return math.log2(x)


def fano_defect_bound(e: ClassicalEnsemble, m: StochasticMatrix, eps: float) -> float:
    """Lower bound on I(C:C'|X) from the channel's diagonal mass.

    S(C|X) - 2 - (1 - sum_c p_C(c) M[c, c] + eps) log d with p_C the average
    state. Negative values are returned as they are.
    """
    if m.d != e.d:
        raise DimensionMismatchError(f"channel of size {m.d} for alphabet {e.d}")
    p_c = e.average().as_float()
    retained = float(p_c @ np.diag(m.as_float()))
    return fano_from_retained_mass(conditional_entropy(e), retained, eps, e.d)


def fano_from_retained_mass(cond: float, retained: float, eps: float, d: int) -> float:
    """S(C|X) - 2 - (1 - retained + eps) log d, with retained = sum_c p_C(c) M[c, c]."""
    return cond - 2.0 - (1.0 - float(retained) + float(eps)) * _log2(d)


def single_letter_rate_bound(e: ClassicalEnsemble, defect: float, eps: float,
                             provenance: Optional[Dict[str, str]] = None) -> RateBound:
    """defect + I(X:C) - eps log|X| - 1, with its component breakdown.

    Raises:
        ParameterRangeError: If defect is negative
    """
    if defect < 0:
        raise ParameterRangeError(f"defect must be non-negative, got {defect}")
    components = {
        "defect": float(defect),
        "holevo": holevo_information(e),
        "error_penalty": -float(eps) * _log2(e.n_labels),
        "constant": -1.0,
    }
    sources = {
        "defect": "minimum conditional mutual information I(C:C'|X)",
        "holevo": "Holevo information I(X:C) of the ensemble",
        "error_penalty": "continuity of I(X:C') under local error eps",
        "constant": "continuity of I(X:C') under local error eps",
    }
    sources.update(provenance or {})
    bound = RateBound(value=sum(components.values()), components=components,
                      epsilon=float(eps), provenance=sources)
    if bound.vacuous:
        logger.debug(f"Single-letter rate bound is vacuous ({bound.value:.6g})")
    return bound


def zero_error_rate_bound(e: ClassicalEnsemble, eps: float = 0.0) -> RateBound:
    """Rate bound when the channel is forced to be the identity copy.

    The defect of the copy channel is S(C|X); eps log d is charged for the
    diagonal slack.
    """
    defect = max(0.0, conditional_entropy(e) - float(eps) * _log2(e.d))
    return single_letter_rate_bound(
        e, defect, eps,
        provenance={"defect": "identity channel: I(C:C'|X) = S(C|X), less eps log d"})


def no_cloning_defect_bound(rho0: Distribution, rho1: Distribution,
                            eps: Number = 0) -> Number:
    """max(0, D2 - D1 - 2 eps)^2 / 2 with D1, D2 the one- and two-copy trace distances.

    Exact when both states and eps are exact.
    """
    if rho0.d != rho1.d:
        raise DimensionMismatchError(f"states of sizes {rho0.d} and {rho1.d}")
    if eps < 0:
        raise ParameterRangeError(f"eps must be non-negative, got {eps}")
    single = trace_distance(rho0, rho1)
    double = trace_distance(product(rho0, rho0), product(rho1, rho1))
    exact = isinstance(single, Fraction) and isinstance(eps, (Fraction, int))
    if not exact:
        single, double, eps = float(single), float(double), float(eps)
    gap = double - single - 2 * eps
    if gap <= 0:
        return Fraction(0) if exact else 0.0
    return gap * gap / 2


def _pair_distribution(t: JointDistribution, x: int) -> Distribution:
    return Distribution(t.pair(x).ravel())


def _marginal_product(t: JointDistribution, x: int) -> Distribution:
    return product(t.c_marginal(x), t.cprime_marginal(x))


def _check_chain_inputs(e: ClassicalEnsemble, t: JointDistribution, eps: Number):
    if e.n_labels != 2:
        raise UnsupportedInputError("the no-cloning chain is defined for two states")
    half = e.priors.probs
    if abs(float(half[0]) - 0.5) > SUM_TOLERANCE:
        raise UnsupportedInputError("the no-cloning chain needs equal priors")
    if t.n_labels != 2 or t.d != e.d:
        raise DimensionMismatchError(
            f"joint table of shape {t.table.shape} for ensemble of size {e.d}")

    for x in range(2):
        if not t.c_marginal(x).equals(e.conditionals[x], tol=SUM_TOLERANCE):
            raise ConstraintViolatedError(f"C-marginal of label {x} differs from the input state")
    gap = t.markov_gap()
    if gap > MARKOV_TOLERANCE:
        raise ConstraintViolatedError("C' depends on X beyond C",
                                      measured={"markov_gap": gap})
    error = sum(float(trace_distance(t.cprime_marginal(x), e.conditionals[x]))
                for x in range(2)) / 2
    if error > float(eps) + SUM_TOLERANCE:
        raise ConstraintViolatedError(
            f"output error {error:.6g} exceeds eps = {float(eps):.6g}",
            measured={"output_error": error, "eps": float(eps)})


def no_cloning_chain(e: ClassicalEnsemble, t: JointDistribution, eps: Number) -> ChainReport:
    """Evaluate the chain from sqrt(I(C:C'|X)) down to the two-copy gain.

    Each term lower-bounds the previous one; the last depends only on the
    two states and eps.

    Raises:
        ConstraintViolatedError: If t does not retain C, is not Markov, or
            misses the states by more than eps
        InvariantViolationError: If some inequality of the chain fails
    """
    _check_chain_inputs(e, t, eps)
    rho0, rho1 = e.conditionals
    root2 = math.sqrt(2.0)
    epsf = float(eps)

    divergences = [kl_divergence_of(_pair_distribution(t, x).as_float(),
                                    _marginal_product(t, x).as_float())
                   for x in range(2)]
    distances = [float(trace_distance(_pair_distribution(t, x), _marginal_product(t, x)))
                 for x in range(2)]
    joint_gap = float(trace_distance(_pair_distribution(t, 0), _pair_distribution(t, 1)))
    product_gap = float(trace_distance(_marginal_product(t, 0), _marginal_product(t, 1)))
    single = trace_distance(rho0, rho1)
    double = trace_distance(product(rho0, rho0), product(rho1, rho1))
    bound = no_cloning_defect_bound(rho0, rho1, eps)

    report = ChainReport(
        epsilon=epsf,
        sqrt_defect=math.sqrt(max(0.0, 0.5 * sum(divergences))),
        pinsker_root=math.sqrt(distances[0] ** 2 + distances[1] ** 2),
        no_cloning=sum(distances) / root2,
        product_gap=(product_gap - joint_gap) / root2,
        marginal_gap=(float(double) - joint_gap - 2 * epsf) / root2,
        two_copy_gain=(float(double) - float(single) - 2 * epsf) / root2,
        defect=conditional_mutual_information(t),
        defect_bound=float(bound),
        distances={
            "single_copy": format_number(single),
            "two_copy": format_number(double),
            "gain": format_number(double - single),
            "defect_bound": format_number(bound),
        },
    )
    if not report.holds:
        raise InvariantViolationError("no-cloning chain is not monotone",
                                      measured={"terms": report.terms()})
    if report.defect < float(bound) - CHAIN_SLACK:
        raise InvariantViolationError(
            f"I(C:C'|X) = {report.defect:.6g} below the no-cloning bound {float(bound):.6g}",
            measured={"defect": report.defect, "bound": float(bound)})
    return report


def separation_epsilon(d: int) -> float:
    """eps = 1 / (24 d^4 log d)."""
    return 1.0 / (24.0 * d ** 4 * _log2(d))


def staircase_entropy_lower_bound(d: int) -> float:
    """(1/2) log d + (1/2) log(3d(d+1)/(4d+2)).

    The conditional entropy of the uniform/staircase ensemble is at least this,
    and this is at least log d - 1.
    """
    if d < 1:
        raise InvalidDimensionError(f"alphabet size must be positive, got {d}")
    return 0.5 * _log2(d) + 0.5 * _log2(3.0 * d * (d + 1) / (4.0 * d + 2.0))


def separation_pipeline(d: int) -> RateBound:
    """Rate bound log d - 7 for the equiprobable uniform/staircase ensemble.

    With eps = 1/(24 d^4 log d) any admissible channel keeps its diagonal above
    1 - 1/log d, so the Fano bound gives a defect of at least log d - 5. The
    Holevo term is bounded below by 0 and eps log|X| by 1.

    Raises:
        InvalidDimensionError: If d < 2
        InvariantViolationError: If S(C|X) < log d - 1, I(X:C) > 1, or the Fano
            bound at the rigidity floor falls below log d - 5
    """
    if isinstance(d, bool) or not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidDimensionError(f"separation needs an integer d >= 2, got {d!r}")
    d = int(d)
    log_d = _log2(d)
    eps = separation_epsilon(d)

    ensemble = uniform_staircase(d, exact=False)
    cond = conditional_entropy(ensemble)
    holevo = holevo_information(ensemble)
    if cond < log_d - 1.0 - CHAIN_SLACK or holevo > 1.0 + CHAIN_SLACK:
        raise InvariantViolationError(
            "uniform/staircase entropies out of range",
            measured={"conditional_entropy": cond, "holevo": holevo, "d": d})

    # every diagonal entry is at least the floor, so the retained mass is too
    diagonal_floor = float(rigidity_floor(d, eps))
    fano_value = fano_from_retained_mass(cond, diagonal_floor, eps, d)
    if fano_value < log_d - 5.0 - CHAIN_SLACK:
        raise InvariantViolationError(
            f"Fano bound {fano_value:.6g} below log d - 5 = {log_d - 5.0:.6g}",
            measured={"fano_defect": fano_value, "diagonal_floor": diagonal_floor, "d": d})

    components = {
        "defect": log_d - 5.0,
        "holevo_floor": 0.0,
        "error_penalty_cap": -1.0,
        "constant": -1.0,
    }
    provenance = {
        "defect": "Fano bound with diagonal >= 1 - 1/log d from approximate rigidity, S(C|X) >= log d - 1",
        "holevo_floor": "Holevo information is non-negative",
        "error_penalty_cap": "eps log|X| <= 1",
        "constant": "continuity of I(X:C') under local error eps",
    }
    diagnostics = {
        "d": float(d),
        "holevo": holevo,
        "conditional_entropy": cond,
        "diagonal_floor": diagonal_floor,
        "fano_defect": fano_value,
        "tight_value": fano_value + holevo - eps - 1.0,
        "entropy_lower_bound": staircase_entropy_lower_bound(d),
    }
    bound = RateBound(value=sum(components.values()), components=components,
                      epsilon=eps, provenance=provenance, diagnostics=diagnostics)
    if bound.vacuous:
        logger.warning(f"Separation bound is vacuous at d={d} ({bound.value:.4g} bits)")
    return bound
