"""Numerical minimization of the information defect."""

from typing import List, Tuple

import numpy as np

from .base import BaseExperiment, ExperimentResult
from ..core.defect_optimizer import DefectProblem, SolverBackend, minimize_defect
from ..core.distributions import ClassicalEnsemble, two_state_example, uniform_staircase
from ..core.errors import ParameterRangeError, UnsupportedInputError


class DefectExperiment(BaseExperiment):
    """min I(C:C'|X) over channels with output error <= eps, for each eps."""

    name = "defect"

    COLUMNS = ["ensemble", "d", "eps", "backend", "value", "constraint_value",
               "identity_distance", "chain_defect_bound"]

    def validate_config(self) -> bool:
        cfg = self.config
        bad = [e for e in cfg.eps_list if not 0 <= e < 1]
        if bad:
            raise ParameterRangeError(f"eps must lie in [0, 1), got {bad}")
        if cfg.backend == SolverBackend.GRID_ORACLE.value:
            dims = [d for _, d in self._ensembles()]
            if any(d != 2 for d in dims):
                raise UnsupportedInputError("the grid oracle only handles d = 2")
        return True

    def _ensembles(self) -> List[Tuple[ClassicalEnsemble, int]]:
        if self.config.ensemble == "example":
            return [(two_state_example(exact=False), 2)]
        return [(uniform_staircase(d, exact=False), d) for d in self.config.defect_dims]

    def run(self) -> ExperimentResult:
        cfg = self.config
        rows = []
        solutions = []
        for ensemble, d in self._ensembles():
            for eps in cfg.eps_list:
                problem = DefectProblem(ensemble=ensemble, eps=float(eps),
                                        backend=SolverBackend(cfg.backend),
                                        restarts=cfg.restarts, seed=cfg.seed,
                                        max_iter=cfg.max_iter)
                solution = minimize_defect(problem)
                distance = float(np.max(np.abs(solution.channel.as_float() - np.eye(d))))
                self._log_progress(f"d={d}, eps={eps}: defect {solution.value:.9g}")
                rows.append({
                    "ensemble": cfg.ensemble,
                    "d": d,
                    "eps": float(eps),
                    "backend": solution.backend.value,
                    "value": solution.value,
                    "constraint_value": solution.constraint_value,
                    "identity_distance": distance,
                    "chain_defect_bound": solution.diagnostics.get("chain_defect_bound"),
                })
                solutions.append(dict(solution.to_dict(), d=d, problem=problem.to_dict()))

        return ExperimentResult.success_result(
            f"{len(rows)} defect minimizations",
            columns=self.COLUMNS, rows=rows, payload={"solutions": solutions})
