"""Experiments on the rate lower bounds: the two-state example and the separation sweep."""

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .base import BaseExperiment, ExperimentResult, OutputFormat
from ..core.bounds import no_cloning_chain, no_cloning_defect_bound, separation_pipeline
from ..core.distributions import JointDistribution, product, two_state_example
from ..core.errors import ParameterRangeError
from ..core.info_measures import trace_distance
from ..core.platform_utils import PlatformManager
from ..core.stochastic import identity
from ..utils.serialization import format_number


class Example2x2Experiment(BaseExperiment):
    """Exact distances and the no-cloning defect bound for (1/2, 1/2) vs (1/3, 2/3)."""

    name = "example-2x2"
    default_format = OutputFormat.JSON

    COLUMNS = ["eps", "single_copy", "two_copy", "gain", "defect_bound",
               "identity_defect", "chain_holds"]

    def validate_config(self) -> bool:
        eps = self._eps()
        if not 0 <= eps < 1:
            raise ParameterRangeError(f"eps must lie in [0, 1), got {self.config.eps}")
        return True

    def _eps(self) -> Fraction:
        try:
            return Fraction(self.config.eps)
        except (ValueError, ZeroDivisionError) as e:
            raise ParameterRangeError(f"eps is not a number: {self.config.eps!r}") from e

    def run(self) -> ExperimentResult:
        eps = self._eps()
        ensemble = two_state_example()
        rho0, rho1 = ensemble.conditionals

        single = trace_distance(rho0, rho1)
        double = trace_distance(product(rho0, rho0), product(rho1, rho1))
        bound = no_cloning_defect_bound(rho0, rho1, eps)
        chain = no_cloning_chain(ensemble, JointDistribution.from_channel(ensemble, identity(2)), eps)
        self._log_progress(f"Two-copy gain {double - single}, defect bound {bound}")

        row = {
            "eps": format_number(eps),
            "single_copy": single,
            "two_copy": double,
            "gain": double - single,
            "defect_bound": bound,
            "identity_defect": chain.defect,
            "chain_holds": chain.holds,
        }
        payload = {
            "eps": format_number(eps),
            "distances": {
                "single_copy": format_number(single),
                "two_copy": format_number(double),
                "gain": format_number(double - single),
            },
            "defect_bound": format_number(bound),
            "defect_bound_float": float(bound),
            "chain": chain.to_dict(),
        }
        return ExperimentResult.success_result(
            f"defect bound {format_number(bound)} at eps = {format_number(eps)}",
            columns=self.COLUMNS, rows=[row], payload=payload)


class SeparationExperiment(BaseExperiment):
    """Rate bound log d - 7 of the uniform/staircase ensemble over a list of d."""

    name = "separation"

    COLUMNS = ["d", "eps", "rate_bound", "holevo", "conditional_entropy",
               "defect_term", "tight_value", "vacuous"]

    def validate_config(self) -> bool:
        bad = [d for d in self.config.d_list if d < 2]
        if bad:
            raise ParameterRangeError(f"separation needs every d >= 2, got {bad}")
        return True

    def run(self) -> ExperimentResult:
        dims = list(self.config.d_list)
        with ThreadPoolExecutor(max_workers=PlatformManager.get_thread_count()) as pool:
            bounds = list(pool.map(separation_pipeline, dims))

        rows = []
        for d, bound in zip(dims, bounds):
            self._log_progress(f"d={d}: rate bound {bound.value:.6g}")
            rows.append({
                "d": d,
                "eps": bound.epsilon,
                "rate_bound": bound.value,
                "holevo": bound.diagnostics["holevo"],
                "conditional_entropy": bound.diagnostics["conditional_entropy"],
                "defect_term": bound.components["defect"],
                "tight_value": bound.diagnostics["tight_value"],
                "vacuous": bound.vacuous,
            })
        payload = {"bounds": [dict(b.to_dict(), d=d) for d, b in zip(dims, bounds)]}
        return ExperimentResult.success_result(
            f"separation bounds for {len(dims)} alphabet sizes",
            columns=self.COLUMNS, rows=rows, payload=payload)
