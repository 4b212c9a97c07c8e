"""Randomized audit experiment."""

from .base import EXIT_INVARIANT, BaseExperiment, ExperimentResult
from ..core.audit import AUDIT_SUITES, AuditRunner, AuditStatus, AuditStepResult
from ..core.config import MAX_AUDIT_DIMENSION
from ..core.debug_config import DebugConfig
from ..core.errors import ConstraintViolatedError, ParameterRangeError


class AuditExperiment(BaseExperiment):
    """Runs the audit suites; fails with exit code 3 on any violation."""

    name = "audit"

    COLUMNS = ["suite", "status", "trials", "violations", "error_message"]

    def validate_config(self) -> bool:
        cfg = self.config
        if cfg.trials < 0:
            raise ParameterRangeError(f"trials must be non-negative, got {cfg.trials}")
        if not 2 <= cfg.d_max <= MAX_AUDIT_DIMENSION:
            raise ParameterRangeError(f"d_max must lie in [2, {MAX_AUDIT_DIMENSION}], got {cfg.d_max}")
        unknown = [s for s in cfg.suites if s not in AUDIT_SUITES]
        if unknown:
            raise ConstraintViolatedError(f"unknown audit suites: {', '.join(unknown)}")
        return True

    def _report_step(self, step: AuditStepResult):
        if step.status == AuditStatus.PASSED:
            self._log_progress(f"[{step.suite}] passed {step.trials} trials ({step.elapsed_ms}ms)")
        elif step.status != AuditStatus.SKIPPED:
            self.logger.error(f"[{step.suite}] {step.status.value}: "
                              f"{step.violations} violations {step.error_message or ''}")

    def run(self) -> ExperimentResult:
        cfg = self.config
        runner = AuditRunner(seed=cfg.seed, trials=cfg.trials, d_max=cfg.d_max)
        runner.set_progress_callback(self._report_step)

        if cfg.faulty_shift_constant is not None:
            self.logger.warning(f"Injecting shift constant {cfg.faulty_shift_constant} into the "
                                f"doubly-stochastic approximation")
            DebugConfig.inject_faulty_shift_constant(cfg.faulty_shift_constant)
        try:
            result = runner.run(cfg.suites or None)
        finally:
            if cfg.faulty_shift_constant is not None:
                DebugConfig.clear_faulty_shift_constant()

        rows = [step.to_dict() for step in result.step_results]
        message = (f"audit {result.status.value}: {result.passed_steps} passed, "
                   f"{result.failed_steps} failed, {result.skipped_steps} skipped, "
                   f"{result.error_steps} errors")
        if result.passed:
            return ExperimentResult.success_result(message, columns=self.COLUMNS, rows=rows,
                                                   payload={"audit": result.to_dict()})
        return ExperimentResult.failure_result(message, columns=self.COLUMNS, rows=rows,
                                               payload={"audit": result.to_dict()},
                                               exit_code=EXIT_INVARIANT)
