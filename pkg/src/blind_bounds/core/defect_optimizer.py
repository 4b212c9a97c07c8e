"""Minimize the information defect I(C:C'|X) over classical channels.

The channel is a row-stochastic M acting on C, so the joint output is
p(x) rho^x(c) M[c, c'] and the XC marginal is retained by construction. The
only constraint is the output error sum_x p(x) Delta(rho^x M, rho^x) <= eps.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import rel_entr

from .bounds import no_cloning_chain
from .distributions import ClassicalEnsemble, JointDistribution
from .errors import (
    BlindBoundsError,
    DimensionMismatchError,
    InvariantViolationError,
    ParameterRangeError,
    UnsupportedInputError,
)
from .info_measures import conditional_mutual_information
from .platform_utils import PlatformManager
from .stochastic import StochasticMatrix
from ..utils.logger import get_logger

logger = get_logger(__name__)

LN2 = math.log(2.0)
LOG_CLIP = 1e-15
FEASIBILITY_SLACK = 1e-9
PENALTY_SCHEDULE = (1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8)
CONVERGENCE_TOL = 1e-9
CONVERGENCE_WINDOW = 100
ARMIJO_SIGMA = 1e-4
MIN_STEP = 1e-14
GRID_STEP = 0.01
ZOOM_POINTS = 21
ZOOM_STOP = 1e-7
POLISH_FTOL = 1e-12


class SolverBackend(str, Enum):
    """How a defect problem is solved."""
    PENALTY_GRADIENT = "penalty-gradient"
    GRID_ORACLE = "grid-oracle"


@dataclass(frozen=True)
class DefectProblem:
    """Ensemble, allowed output error and solver settings."""
    ensemble: ClassicalEnsemble
    eps: float = 0.0
    backend: SolverBackend = SolverBackend.PENALTY_GRADIENT
    restarts: int = 50
    seed: int = 0
    max_iter: int = 2000

    def __post_init__(self):
        if not 0 <= self.eps < 1:
            raise ParameterRangeError(f"eps must lie in [0, 1), got {self.eps}")
        if self.restarts < 1:
            raise ParameterRangeError(f"need at least one restart, got {self.restarts}")
        object.__setattr__(self, "backend", SolverBackend(self.backend))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ensemble": self.ensemble.to_dict(),
            "eps": self.eps,
            "backend": self.backend.value,
            "restarts": self.restarts,
            "seed": self.seed,
            "max_iter": self.max_iter,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DefectProblem':
        return cls(
            ensemble=ClassicalEnsemble.from_dict(data["ensemble"]),
            eps=float(data.get("eps", 0.0)),
            backend=SolverBackend(data.get("backend", SolverBackend.PENALTY_GRADIENT.value)),
            restarts=int(data.get("restarts", 50)),
            seed=int(data.get("seed", 0)),
            max_iter=int(data.get("max_iter", 2000)),
        )


@dataclass(frozen=True)
class DefectSolution:
    """Feasible channel with its defect value."""
    channel: StochasticMatrix
    value: float
    constraint_value: float
    eps: float
    backend: SolverBackend
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def feasibility_gap(self) -> float:
        """Measured constraint slack: output error minus eps (<= 0 when feasible)."""
        return self.constraint_value - self.eps

    @property
    def feasible(self) -> bool:
        return self.feasibility_gap <= FEASIBILITY_SLACK

    def to_dict(self) -> Dict[str, Any]:
        return {
            "channel": self.channel.to_dict(),
            "value": self.value,
            "constraint_value": self.constraint_value,
            "eps": self.eps,
            "feasibility_gap": self.feasibility_gap,
            "backend": self.backend.value,
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DefectSolution':
        return cls(
            channel=StochasticMatrix.from_dict(data["channel"]),
            value=float(data["value"]),
            constraint_value=float(data["constraint_value"]),
            eps=float(data["eps"]),
            backend=SolverBackend(data["backend"]),
            diagnostics=dict(data.get("diagnostics", {})),
        )


# Float kernels. priors: (X,), states: (X, d), m: (d, d) or batched (N, d, d).

def _ensemble_arrays(e: ClassicalEnsemble) -> Tuple[np.ndarray, np.ndarray]:
    return e.priors.as_float(), np.asarray(e.conditional_matrix(), dtype=np.float64)


def _objective(priors: np.ndarray, states: np.ndarray, m: np.ndarray) -> np.ndarray:
    """I(C:C'|X) in bits; batched over leading axes of m."""
    outputs = np.einsum("xc,...cd->...xd", states, m)
    joint = states[:, :, None] * m[..., None, :, :]
    indep = states[:, :, None] * outputs[..., :, None, :]
    per_label = rel_entr(joint, indep).sum(axis=(-1, -2))
    return (per_label * priors).sum(axis=-1) / LN2


def _constraint(priors: np.ndarray, states: np.ndarray, m: np.ndarray) -> np.ndarray:
    """sum_x p(x) Delta(rho^x M, rho^x); batched over leading axes of m."""
    outputs = np.einsum("xc,...cd->...xd", states, m)
    per_label = 0.5 * np.abs(outputs - states).sum(axis=-1)
    return (per_label * priors).sum(axis=-1)


def _objective_gradient(priors: np.ndarray, states: np.ndarray, m: np.ndarray) -> np.ndarray:
    outputs = states @ m
    log_ratio = (np.log(np.maximum(m, LOG_CLIP))[None, :, :]
                 - np.log(np.maximum(outputs, LOG_CLIP))[:, None, :]) / LN2
    weights = priors[:, None] * states
    return np.einsum("xc,xcd->cd", weights, log_ratio)


def _constraint_subgradient(priors: np.ndarray, states: np.ndarray, m: np.ndarray) -> np.ndarray:
    signs = np.sign(states @ m - states)
    return 0.5 * np.einsum("x,xc,xd->cd", priors, states, signs)


def _check_channel(e: ClassicalEnsemble, m: StochasticMatrix):
    if m.d != e.d:
        raise DimensionMismatchError(f"channel of size {m.d} for alphabet {e.d}")


def defect_value(e: ClassicalEnsemble, m: StochasticMatrix) -> float:
    """I(C:C'|X) of the joint p(x) rho^x(c) M[c, c']."""
    _check_channel(e, m)
    return conditional_mutual_information(JointDistribution.from_channel(e, m))


def constraint_value(e: ClassicalEnsemble, m: StochasticMatrix) -> float:
    """Output error sum_x p(x) Delta(rho^x M, rho^x)."""
    _check_channel(e, m)
    priors, states = _ensemble_arrays(e)
    return float(_constraint(priors, states, m.as_float()))


def defect_gradient(e: ClassicalEnsemble, m: StochasticMatrix) -> np.ndarray:
    """d I(C:C'|X) / d M[c, c'] = sum_x p(x) rho^x(c) log(M[c, c'] / (rho^x M)[c'])."""
    _check_channel(e, m)
    priors, states = _ensemble_arrays(e)
    return _objective_gradient(priors, states, m.as_float())


def convexity_gap(e: ClassicalEnsemble, m1: StochasticMatrix, m2: StochasticMatrix,
                  t: float) -> float:
    """t f(M1) + (1 - t) f(M2) - f(t M1 + (1 - t) M2); non-negative for convex f."""
    mixed = m2.mix(m1, t)
    return t * defect_value(e, m1) + (1 - t) * defect_value(e, m2) - defect_value(e, mixed)


def project_rows(c: np.ndarray) -> np.ndarray:
    """Euclidean projection of every row onto the probability simplex."""
    n = c.shape[-1]
    a = -np.sort(-c, axis=-1)
    lambdas = (np.cumsum(a, axis=-1) - 1.0) / np.arange(1, n + 1)
    active = a > lambdas
    # last index where the sorted entry exceeds its threshold
    k = n - 1 - np.argmax(active[..., ::-1], axis=-1)
    theta = np.take_along_axis(lambdas, k[..., None], axis=-1)
    return np.maximum(c - theta, 0.0)


def _repair(priors: np.ndarray, states: np.ndarray, m: np.ndarray,
            eps: float) -> np.ndarray:
    """Mix with the identity until the output error is at most eps."""
    g = float(_constraint(priors, states, m))
    if g <= eps:
        return m
    t = 1.0 - eps / g
    mixed = (1.0 - t) * m + t * np.eye(m.shape[0])
    return mixed / mixed.sum(axis=1, keepdims=True)


def _penalized(priors, states, m, eps, mu) -> float:
    violation = max(0.0, float(_constraint(priors, states, m)) - eps)
    return float(_objective(priors, states, m)) + mu * violation * violation


def _penalized_gradient(priors, states, m, eps, mu) -> np.ndarray:
    grad = _objective_gradient(priors, states, m)
    violation = float(_constraint(priors, states, m)) - eps
    if violation > 0:
        grad = grad + 2.0 * mu * violation * _constraint_subgradient(priors, states, m)
    return grad


def _descend(priors, states, m, eps, mu, max_iter) -> np.ndarray:
    """Projected gradient with Armijo backtracking at a fixed penalty weight."""
    value = _penalized(priors, states, m, eps, mu)
    history: List[float] = [value]
    step = 1.0
    for _ in range(max_iter):
        grad = _penalized_gradient(priors, states, m, eps, mu)
        step = min(1.0, step * 2.0)
        while step >= MIN_STEP:
            candidate = project_rows(m - step * grad)
            decrease = float(np.sum(grad * (m - candidate)))
            candidate_value = _penalized(priors, states, candidate, eps, mu)
            if candidate_value <= value - ARMIJO_SIGMA * decrease:
                break
            step *= 0.5
        else:
            break
        m, value = candidate, candidate_value
        history.append(value)
        if len(history) > CONVERGENCE_WINDOW and \
                history[-CONVERGENCE_WINDOW - 1] - value < CONVERGENCE_TOL:
            break
    return m


def _error_constraints(priors: np.ndarray, states: np.ndarray,
                       eps: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Linear form of the error budget over z = (M.ravel(), s.ravel()).

    s[x, c'] >= |(rho^x M - rho^x)[c']| is split into two inequalities, and the
    budget reads eps - (1/2) sum_x p(x) sum_c' s[x, c'] >= 0. Returns (A_eq, A_in, b_in)
    with rows of M summing to 1 and A_in z >= b_in.
    """
    n_labels, d = states.shape
    n_m = d * d
    n_s = n_labels * d
    a_eq = np.zeros((d, n_m + n_s))
    for c in range(d):
        a_eq[c, c * d:(c + 1) * d] = 1.0

    rows = []
    bounds = []
    for x in range(n_labels):
        for out in range(d):
            # (rho^x M)[out] = sum_c rho^x(c) M[c, out]
            coeffs = np.zeros(n_m + n_s)
            coeffs[np.arange(d) * d + out] = states[x]
            slack = np.zeros(n_m + n_s)
            slack[n_m + x * d + out] = 1.0
            rows.append(slack - coeffs)
            bounds.append(-states[x, out])
            rows.append(slack + coeffs)
            bounds.append(states[x, out])
    budget = np.zeros(n_m + n_s)
    budget[n_m:] = -0.5 * np.repeat(priors, d)
    rows.append(budget)
    bounds.append(-eps)
    return a_eq, np.array(rows), np.array(bounds)


def _polish(priors: np.ndarray, states: np.ndarray, m: np.ndarray, eps: float,
            max_iter: int) -> np.ndarray:
    """SLSQP on the split-variable form, started from a penalty solution.

    Returns the polished channel only when it is feasible and no worse.
    """
    d = m.shape[0]
    n_m = d * d
    a_eq, a_in, b_in = _error_constraints(priors, states, eps)

    def channel(z: np.ndarray) -> np.ndarray:
        return project_rows(np.clip(z[:n_m].reshape(d, d), 0.0, 1.0))

    def objective(z: np.ndarray) -> float:
        return float(_objective(priors, states, np.clip(z[:n_m].reshape(d, d), 0.0, 1.0)))

    def gradient(z: np.ndarray) -> np.ndarray:
        grad = np.zeros_like(z)
        grad[:n_m] = _objective_gradient(priors, states,
                                         np.clip(z[:n_m].reshape(d, d), 0.0, 1.0)).ravel()
        return grad

    slack = np.abs(states @ m - states).ravel()
    z0 = np.concatenate([m.ravel(), slack])
    constraints = [
        {'type': 'eq', 'fun': lambda z: a_eq @ z - 1.0, 'jac': lambda z: a_eq},
        {'type': 'ineq', 'fun': lambda z: a_in @ z - b_in, 'jac': lambda z: a_in},
    ]
    result = minimize(objective, z0, jac=gradient, method='SLSQP',
                      bounds=[(0.0, 1.0)] * z0.size, constraints=constraints,
                      options={'maxiter': max_iter, 'ftol': POLISH_FTOL})
    if not np.all(np.isfinite(result.x)):
        logger.debug(f"Polish produced non-finite values: {result.message}")
        return m

    polished = _repair(priors, states, channel(result.x), eps)
    before = float(_objective(priors, states, m))
    after = float(_objective(priors, states, polished))
    if after <= before and float(_constraint(priors, states, polished)) <= eps + FEASIBILITY_SLACK:
        logger.debug(f"Polish lowered the defect by {before - after:.3g}")
        return polished
    return m


def _solve_from(priors, states, start, eps, max_iter) -> np.ndarray:
    m = start
    for mu in PENALTY_SCHEDULE:
        m = _descend(priors, states, m, eps, mu, max_iter)
    return _polish(priors, states, _repair(priors, states, m, eps), eps, max_iter)


def _start_points(d: int, restarts: int, seed: int) -> List[np.ndarray]:
    children = np.random.SeedSequence(seed).spawn(restarts)
    starts = [np.eye(d)]
    for child in children[1:]:
        rng = np.random.default_rng(child)
        starts.append(rng.dirichlet(np.ones(d), size=d))
    return starts


def _finish(e: ClassicalEnsemble, m: np.ndarray, eps: float,
            backend: SolverBackend, diagnostics: Dict[str, float]) -> DefectSolution:
    channel = StochasticMatrix(m / m.sum(axis=1, keepdims=True))
    value = max(0.0, defect_value(e, channel))
    solution = DefectSolution(
        channel=channel,
        value=value,
        constraint_value=constraint_value(e, channel),
        eps=eps,
        backend=backend,
        diagnostics=diagnostics,
    )
    if not solution.feasible:
        raise InvariantViolationError(
            "solver returned an infeasible channel",
            measured={"constraint_value": solution.constraint_value, "eps": eps})
    _attach_chain(e, solution)
    return solution


def _attach_chain(e: ClassicalEnsemble, solution: DefectSolution):
    """Cross-check two-state solutions against the no-cloning chain."""
    if e.n_labels != 2:
        return
    try:
        chain = no_cloning_chain(
            e, JointDistribution.from_channel(e, solution.channel),
            max(solution.eps, solution.constraint_value))
    except BlindBoundsError as err:
        if isinstance(err, InvariantViolationError):
            raise
        logger.debug(f"Chain cross-check skipped: {err}")
        return
    solution.diagnostics["chain_defect_bound"] = chain.defect_bound
    solution.diagnostics["chain_pinsker_root"] = chain.pinsker_root
    if solution.value < chain.pinsker_root ** 2 - FEASIBILITY_SLACK:
        raise InvariantViolationError(
            "defect below the Pinsker term of the no-cloning chain",
            measured={"value": solution.value, "pinsker_root": chain.pinsker_root})


def _minimize_penalty(problem: DefectProblem) -> DefectSolution:
    e = problem.ensemble
    priors, states = _ensemble_arrays(e)
    starts = _start_points(e.d, problem.restarts, problem.seed)

    def run(start: np.ndarray) -> np.ndarray:
        return _solve_from(priors, states, start, problem.eps, problem.max_iter)

    workers = min(len(starts), PlatformManager.get_thread_count())
    with ThreadPoolExecutor(max_workers=workers) as pool:
        candidates = list(pool.map(run, starts))

    values = [float(_objective(priors, states, m)) for m in candidates]
    best = int(np.argmin(values))
    logger.debug(f"Restart values: min {values[best]:.9g}, max {max(values):.9g}")
    diagnostics = {
        "restarts": float(len(starts)),
        "best_restart": float(best),
        "restart_spread": float(max(values) - values[best]),
    }
    return _finish(e, candidates[best], problem.eps, SolverBackend.PENALTY_GRADIENT, diagnostics)


def _two_by_two(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Channels [[1 - a, a], [b, 1 - b]] stacked along the leading axes."""
    m = np.empty(a.shape + (2, 2))
    m[..., 0, 0] = 1.0 - a
    m[..., 0, 1] = a
    m[..., 1, 0] = b
    m[..., 1, 1] = 1.0 - b
    return m


def _best_on_grid(priors, states, a, b, eps) -> Optional[Tuple[float, float, float]]:
    m = _two_by_two(a, b)
    feasible = _constraint(priors, states, m) <= eps + 1e-12
    if not np.any(feasible):
        return None
    values = np.where(feasible, _objective(priors, states, m), np.inf)
    idx = np.unravel_index(int(np.argmin(values)), values.shape)
    return float(values[idx]), float(a[idx]), float(b[idx])


def grid_oracle(e: ClassicalEnsemble, eps: float) -> DefectSolution:
    """Exhaustive 0.01 grid over 2x2 channels, then zoomed local grids.

    Raises:
        UnsupportedInputError: If d != 2
    """
    if e.d != 2:
        raise UnsupportedInputError("the grid oracle only handles d = 2")
    if not 0 <= eps < 1:
        raise ParameterRangeError(f"eps must lie in [0, 1), got {eps}")
    priors, states = _ensemble_arrays(e)

    axis = np.linspace(0.0, 1.0, int(round(1 / GRID_STEP)) + 1)
    a, b = np.meshgrid(axis, axis, indexing="ij")
    best = _best_on_grid(priors, states, a, b, eps)
    if best is None:
        raise InvariantViolationError("identity channel missing from the grid")

    radius = 2 * GRID_STEP
    levels = 0
    while radius > ZOOM_STOP:
        _, ca, cb = best
        local_a = np.clip(np.linspace(ca - radius, ca + radius, ZOOM_POINTS), 0.0, 1.0)
        local_b = np.clip(np.linspace(cb - radius, cb + radius, ZOOM_POINTS), 0.0, 1.0)
        a, b = np.meshgrid(local_a, local_b, indexing="ij")
        candidate = _best_on_grid(priors, states, a, b, eps)
        if candidate is not None and candidate[0] <= best[0]:
            best = candidate
        radius /= 4.0
        levels += 1

    _, ca, cb = best
    m = _two_by_two(np.array(ca), np.array(cb))
    return _finish(e, m, eps, SolverBackend.GRID_ORACLE, {"zoom_levels": float(levels)})


def minimize_defect(problem: DefectProblem) -> DefectSolution:
    """Approximate min I(C:C'|X) over channels with output error <= eps.

    The penalty-gradient backend runs projected gradient with an exterior
    penalty on the error constraint from several starts in parallel, then mixes
    the best channel with the identity until it is feasible.
    """
    logger.info(f"Minimizing defect: d={problem.ensemble.d}, eps={problem.eps}, "
                f"backend={problem.backend.value}")
    if problem.backend == SolverBackend.GRID_ORACLE:
        solution = grid_oracle(problem.ensemble, problem.eps)
    else:
        solution = _minimize_penalty(problem)
    logger.info(f"Defect minimum {solution.value:.9g} (output error {solution.constraint_value:.3g})")
    return solution
