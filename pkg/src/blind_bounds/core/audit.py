"""Randomized audit of the proved inequalities.

Each suite draws its own instances from a child of one SeedSequence, so a
suite's outcome depends only on the master seed and the suite's position in
the registry.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .birkhoff import birkhoff_decompose, max_permutation_count
from .distributions import Distribution, random_distribution, staircase
from .errors import BlindBoundsError, ConstraintViolatedError, InvariantViolationError
from .info_measures import (
    conditional_entropy_of,
    conditional_mutual_information_of,
    kl_divergence,
    mutual_information,
    trace_distance,
)
from .platform_utils import PlatformManager
from .rigidity import (
    diagonal_rigidity_bound,
    fixed_point_errors,
    hull_l1_distance,
    identity_weight_gap,
    l1_dist_to_hull_lower_bound,
    max_offdiagonal_mass,
    overlap,
    perm_overlap_bruteforce,
    perm_overlap_max,
    perm_overlap_witness,
    rigidity_floor,
    zero_error_rigidity_check,
)
from .stochastic import (
    apply,
    approx_doubly_stochastic,
    identity,
    random_doubly_stochastic,
    random_near_identity,
    random_stochastic,
)
from ..utils.logger import get_logger

logger = get_logger(__name__)

FLOAT_SLACK = 1e-10
HULL_INSTANCES = 100
HULL_MAX_D = 6
HULL_MAX_VERTICES = 8
IDENTITY_WEIGHT_MAX_D = 4


class AuditStatus(str, Enum):
    """Status of one audit suite."""
    PASSED = "passed"
    FAILED = "failed"
    SKIPPED = "skipped"
    ERROR = "error"


@dataclass
class AuditStepResult:
    """Result of running a single suite."""
    step_index: int
    suite: str
    status: AuditStatus
    trials: int = 0
    violations: int = 0
    worst: Dict[str, float] = field(default_factory=dict)
    error_message: Optional[str] = None
    elapsed_ms: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'step_index': self.step_index,
            'suite': self.suite,
            'status': self.status.value,
            'trials': self.trials,
            'violations': self.violations,
            'worst': dict(self.worst),
            'error_message': self.error_message,
        }


@dataclass
class AuditResult:
    """Result of a whole audit run."""
    status: AuditStatus
    seed: int
    trials: int
    d_max: int
    step_results: List[AuditStepResult]
    total_elapsed_ms: int
    passed_steps: int
    failed_steps: int
    skipped_steps: int
    error_steps: int

    @property
    def passed(self) -> bool:
        return self.status == AuditStatus.PASSED

    def to_dict(self) -> Dict[str, Any]:
        return {
            'status': self.status.value,
            'seed': self.seed,
            'trials': self.trials,
            'd_max': self.d_max,
            'steps': [r.to_dict() for r in self.step_results],
            'passed_steps': self.passed_steps,
            'failed_steps': self.failed_steps,
            'skipped_steps': self.skipped_steps,
            'error_steps': self.error_steps,
        }


class _Tally:
    """Counts trials and failed checks; keeps the largest excess lhs - rhs per check."""

    def __init__(self):
        self.trials = 0
        self.violations = 0
        self.worst: Dict[str, float] = {}

    def trial(self):
        self.trials += 1

    def check(self, name: str, lhs: Any, rhs: Any, slack: float = FLOAT_SLACK) -> bool:
        """Record lhs <= rhs. Exact operands are compared exactly."""
        excess = lhs - rhs
        exact = isinstance(excess, (Fraction, int)) and not isinstance(excess, bool)
        value = float(excess)
        self.worst[name] = max(self.worst.get(name, -math.inf), value)
        ok = excess <= 0 if exact else value <= slack
        if not ok:
            self.violations += 1
            logger.debug(f"Audit check {name} failed: {float(lhs):.6g} > {float(rhs):.6g}")
        return ok

    def fail(self, name: str, error: BlindBoundsError):
        self.violations += 1
        self.worst[name] = max(self.worst.get(name, -math.inf), 1.0)
        logger.debug(f"Audit check {name} raised: {error} {error.measured}")


SuiteFunction = Callable[[np.random.Generator, int, int], _Tally]


def _doubly_stochastic_approximation(rng: np.random.Generator, trials: int, d_max: int) -> _Tally:
    tally = _Tally()
    for d in range(2, d_max + 1):
        v = staircase(d, exact=False)
        vf = v.as_float()
        for index in range(trials):
            tally.trial()
            if index % 2:
                m = random_near_identity(d, rng, scale=float(10 ** rng.uniform(-4, 0)))
            else:
                m = random_stochastic(d, rng, concentration=float(rng.choice([0.3, 1.0, 5.0])))
            u_err, v_err = fixed_point_errors(m)
            eps = max(float(u_err), float(v_err)) / 4
            try:
                n = approx_doubly_stochastic(m, eps)
            except ConstraintViolatedError as e:
                tally.fail("construction", e)
                continue

            nf, mf = n.as_float(), m.as_float()
            deviation = max(float(np.max(np.abs(nf.sum(axis=0) - 1))),
                            float(np.max(np.abs(nf.sum(axis=1) - 1))))
            tally.check("doubly_stochastic", deviation, 1e-12, slack=0.0)
            tally.check("entrywise_shift", float(np.max(np.abs(nf - mf))), 12 * d * eps)
            tally.check("staircase_image_shift", float(np.abs(vf @ nf - vf @ mf).sum()), 12 * d * eps)
            staircase_error = float(np.abs(vf - vf @ nf).sum())
            tally.check("staircase_fixed_point", staircase_error, 16 * d * eps)
            if d <= IDENTITY_WEIGHT_MAX_D:
                decomposition = birkhoff_decompose(n)
                tally.check("identity_weight", identity_weight_gap(decomposition, v),
                            staircase_error, slack=1e-9)
    return tally


def _diagonal_rigidity(rng: np.random.Generator, trials: int, d_max: int) -> _Tally:
    tally = _Tally()
    for d in range(2, d_max + 1):
        for _ in range(trials):
            tally.trial()
            m = random_near_identity(d, rng, scale=float(10 ** rng.uniform(-7, 0)))
            u_err, v_err = fixed_point_errors(m)
            eps = max(float(u_err), float(v_err)) / 4
            try:
                diagonal = diagonal_rigidity_bound(m, eps)
            except InvariantViolationError as e:
                tally.fail("diagonal_floor", e)
                continue
            tally.check("diagonal_floor", rigidity_floor(d, eps), float(min(diagonal)), slack=1e-12)
    return tally


def _permutation_overlap(rng: np.random.Generator, trials: int, d_max: int) -> _Tally:
    tally = _Tally()
    for d in range(2, d_max + 1):
        tally.trial()
        v = staircase(d)
        formula = perm_overlap_max(v)
        brute = perm_overlap_bruteforce(v)
        tally.check("bruteforce_above_formula", brute, formula)
        tally.check("formula_above_bruteforce", formula, brute)
        tally.check("witness_attains", formula, overlap(v, perm_overlap_witness(d)))
    return tally


def _hull_distance(rng: np.random.Generator, trials: int, d_max: int) -> _Tally:
    tally = _Tally()
    top = min(d_max, HULL_MAX_D)
    for _ in range(min(trials, HULL_INSTANCES)):
        tally.trial()
        d = int(rng.integers(2, top + 1))
        k = int(rng.integers(1, HULL_MAX_VERTICES + 1))
        v = staircase(d)
        vertices = [Distribution(v.probs[rng.permutation(d)]) for _ in range(k)]
        bound = l1_dist_to_hull_lower_bound(v, vertices)
        tally.check("bound_below_distance", bound, hull_l1_distance(v, vertices))
    return tally


def _birkhoff_decomposition(rng: np.random.Generator, trials: int, d_max: int) -> _Tally:
    tally = _Tally()
    for d in range(3, max(d_max, 3) + 3):
        for _ in range(trials):
            tally.trial()
            m = random_doubly_stochastic(d, rng, n_perms=int(rng.integers(1, 2 * d + 1)))
            decomposition = birkhoff_decompose(m)
            tally.check("reconstruction", decomposition.reconstruction_error(m), 1e-9, slack=0.0)
            tally.check("permutation_count", len(decomposition), max_permutation_count(d))
            total = float(sum(float(w) for w in decomposition.weights))
            tally.check("weight_sum", abs(total - 1.0), 1e-9, slack=0.0)
    return tally


def _joint_with_marginal(rng: np.random.Generator, conditionals_shape: Sequence[int],
                         marginal: np.ndarray) -> np.ndarray:
    """Table p[a, b] = p(b) p(a|b) with the given B-marginal."""
    n_a, n_b = conditionals_shape
    given = rng.dirichlet(np.ones(n_a), size=n_b).T
    return given * marginal[None, :]


def _information_facts(rng: np.random.Generator, trials: int, d_max: int) -> _Tally:
    tally = _Tally()
    for _ in range(trials):
        tally.trial()
        d = int(rng.integers(2, d_max + 1))
        p, q, r = (random_distribution(d, rng) for _ in range(3))
        tally.check("triangle", trace_distance(p, r), trace_distance(p, q) + trace_distance(q, r))

        channel = random_stochastic(d, rng)
        pm, qm = apply(p, channel), apply(q, channel)
        tally.check("data_processing_trace", trace_distance(pm, qm), trace_distance(p, q))
        divergence = kl_divergence(p, q)
        tally.check("data_processing_divergence", kl_divergence(pm, qm), divergence)
        tally.check("pinsker", 2 * trace_distance(p, q) ** 2, divergence * math.log(2))

        pab = rng.dirichlet(np.ones(d * d)).reshape(d, d)
        mismatch = 1.0 - float(np.trace(pab))
        tally.check("fano", conditional_entropy_of(pab), 1.0 + mismatch * math.log2(d))

        n_x = int(rng.integers(2, d + 1))
        n_b = int(rng.integers(1, d + 1))
        paxb = rng.dirichlet(np.ones(d * n_x * n_b)).reshape(d, n_x, n_b)
        tally.check("dimension", conditional_mutual_information_of(paxb), math.log2(n_x))

        marginal = rng.dirichlet(np.ones(n_x))
        rho = _joint_with_marginal(rng, (d, n_x), marginal)
        sigma = _joint_with_marginal(rng, (d, n_x), marginal)
        distance = 0.5 * float(np.abs(rho - sigma).sum())
        tally.check("continuity_conditional_entropy",
                    abs(conditional_entropy_of(rho) - conditional_entropy_of(sigma)),
                    distance * math.log2(d) + 1.0)
        tally.check("continuity_mutual_information",
                    abs(mutual_information(rho) - mutual_information(sigma)),
                    distance * math.log2(n_x) + 1.0)
    return tally


def _zero_error_fixed_points(rng: np.random.Generator, trials: int, d_max: int) -> _Tally:
    tally = _Tally()
    for d in range(2, d_max + 1):
        tally.trial()
        v = staircase(d)
        tally.check("offdiagonal_mass", max_offdiagonal_mass(v), Fraction(0))
        accepted = zero_error_rigidity_check(identity(d), v)
        tally.check("identity_accepted", int(not accepted), 0)
    return tally


AUDIT_SUITES: Dict[str, SuiteFunction] = {
    'doubly-stochastic-approximation': _doubly_stochastic_approximation,
    'diagonal-rigidity': _diagonal_rigidity,
    'permutation-overlap': _permutation_overlap,
    'hull-distance': _hull_distance,
    'birkhoff-decomposition': _birkhoff_decomposition,
    'information-facts': _information_facts,
    'zero-error-fixed-points': _zero_error_fixed_points,
}


class AuditRunner:
    """Runs audit suites on a thread pool and reports them in registry order."""

    def __init__(self, seed: int = 0, trials: int = 1000, d_max: int = 6,
                 workers: Optional[int] = None):
        """Initialize audit runner.

        Args:
            seed: Master seed
            trials: Random instances per dimension (per suite for the
                dimension-free suites)
            d_max: Largest alphabet size audited
            workers: Thread count (default from PlatformManager)
        """
        self.seed = seed
        self.trials = trials
        self.d_max = d_max
        self.workers = workers or PlatformManager.get_thread_count()
        self.logger = get_logger(__name__)
        self._progress_callback: Optional[Callable[[AuditStepResult], None]] = None

    def set_progress_callback(self, callback: Callable[[AuditStepResult], None]):
        """Set callback for progress updates.

        Args:
            callback: Function called after each suite with its AuditStepResult
        """
        self._progress_callback = callback

    def run(self, suites: Optional[Sequence[str]] = None) -> AuditResult:
        """Run the selected suites (all by default).

        Raises:
            ConstraintViolatedError: If a suite name is unknown
        """
        names = list(AUDIT_SUITES)
        selected = list(suites) if suites else names
        unknown = [s for s in selected if s not in AUDIT_SUITES]
        if unknown:
            raise ConstraintViolatedError(f"unknown audit suites: {', '.join(unknown)}")

        self.logger.info(f"Starting audit: seed={self.seed} trials={self.trials} d_max={self.d_max}")
        if self.trials == 0:
            self.logger.warning("Audit with trials=0 checks nothing; reporting a vacuous pass")

        start_time = time.time()
        children = np.random.SeedSequence(self.seed).spawn(len(names))
        seeds = {name: child for name, child in zip(names, children)}

        step_results: List[AuditStepResult] = []
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = [pool.submit(self._run_suite, index, name, seeds[name])
                       for index, name in enumerate(selected)]
            for future in futures:
                step_result = future.result()
                step_results.append(step_result)
                if self._progress_callback:
                    self._progress_callback(step_result)

        total_elapsed_ms = int((time.time() - start_time) * 1000)
        passed = sum(1 for r in step_results if r.status == AuditStatus.PASSED)
        failed = sum(1 for r in step_results if r.status == AuditStatus.FAILED)
        skipped = sum(1 for r in step_results if r.status == AuditStatus.SKIPPED)
        errors = sum(1 for r in step_results if r.status == AuditStatus.ERROR)

        overall = AuditStatus.FAILED if failed or errors else AuditStatus.PASSED
        result = AuditResult(
            status=overall,
            seed=self.seed,
            trials=self.trials,
            d_max=self.d_max,
            step_results=step_results,
            total_elapsed_ms=total_elapsed_ms,
            passed_steps=passed,
            failed_steps=failed,
            skipped_steps=skipped,
            error_steps=errors,
        )

        self.logger.info(
            f"Audit completed: {passed} passed, {failed} failed, {skipped} skipped, "
            f"{errors} errors ({total_elapsed_ms}ms)"
        )
        return result

    def _run_suite(self, index: int, name: str, seed: np.random.SeedSequence) -> AuditStepResult:
        if self.trials == 0:
            return AuditStepResult(step_index=index, suite=name, status=AuditStatus.SKIPPED,
                                   error_message="trials=0")

        self.logger.debug(f"Running audit suite {index}: {name}")
        start_time = time.time()
        try:
            tally = AUDIT_SUITES[name](np.random.default_rng(seed), self.trials, self.d_max)
        except Exception as e:
            elapsed_ms = int((time.time() - start_time) * 1000)
            self.logger.error(f"Audit suite {name} failed with exception: {e}", exc_info=True)
            return AuditStepResult(step_index=index, suite=name, status=AuditStatus.ERROR,
                                   error_message=str(e), elapsed_ms=elapsed_ms)

        elapsed_ms = int((time.time() - start_time) * 1000)
        status = AuditStatus.FAILED if tally.violations else AuditStatus.PASSED
        if status == AuditStatus.FAILED:
            self.logger.error(f"Audit suite {name}: {tally.violations} violations in {tally.trials} trials")
        else:
            self.logger.info(f"Audit suite {name}: {tally.trials} trials passed")
        return AuditStepResult(step_index=index, suite=name, status=status,
                               trials=tally.trials, violations=tally.violations,
                               worst=tally.worst, elapsed_ms=elapsed_ms)
