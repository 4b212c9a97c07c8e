"""Bucketing protocol experiments."""

from .base import BaseExperiment, ExperimentResult
from ..core.distributions import staircase, uniform
from ..core.errors import ParameterRangeError
from ..core.protocol import build_protocol, ki_sensitivity, protocol_report

REPORT_COLUMNS = [
    "d", "delta", "gamma", "u", "bits_sent", "bits_sent_code", "rate_bound",
    "rate_bound_applies", "local_error_rho", "local_error_sigma", "error_bound",
    "seed", "samples", "mc_error_rho", "mc_sigma_rho", "mc_error_sigma", "mc_sigma_sigma",
    "truncation_mass_rho", "truncation_mass_sigma", "max_spread_error", "spread_error_bound",
    "nonempty_buckets", "bucket_count_bound",
]


class ProtocolExperiment(BaseExperiment):
    """Bucketing protocol on the uniform/staircase pair at one alphabet size."""

    name = "protocol"

    def validate_config(self) -> bool:
        if self.config.d < 1:
            raise ParameterRangeError(f"alphabet size must be positive, got {self.config.d}")
        if not 0 < self.config.delta < 0.5:
            raise ParameterRangeError(f"delta must lie in (0, 1/2), got {self.config.delta}")
        if not 0 < self.config.gamma < 1:
            raise ParameterRangeError(f"gamma must lie in (0, 1), got {self.config.gamma}")
        return True

    def run(self) -> ExperimentResult:
        cfg = self.config
        rho = uniform(cfg.d, exact=False)
        sigma = staircase(cfg.d, exact=False)

        table = build_protocol(rho, sigma, cfg.delta, cfg.gamma)
        report = protocol_report(rho, sigma, cfg.delta, cfg.gamma,
                                 seed=cfg.seed, samples=cfg.samples, protocol=table)
        self._log_progress(f"Protocol built with {len(table.buckets)} buckets")

        data = report.to_dict()
        row = {column: data.get(column) for column in REPORT_COLUMNS}
        return ExperimentResult.success_result(
            f"u={report.u}, {report.bits_sent:.4f} bits, errors "
            f"({report.local_error_rho:.4g}, {report.local_error_sigma:.4g})",
            columns=REPORT_COLUMNS, rows=[row],
            payload={"report": data, "protocol": table.to_dict()})


class KISensitivityExperiment(BaseExperiment):
    """Fidelity error f and entropy error g at delta = gamma = log^2 d / sqrt d."""

    name = "ki-sensitivity"

    COLUMNS = ["d", "raw_parameter", "clamped", "delta", "gamma", "u", "f", "f_target",
               "f_within_target", "lam", "g", "g_target", "g_above_target", "rate_lower_bound"]

    def validate_config(self) -> bool:
        bad = [d for d in self.config.d_list if d < 2]
        if bad:
            raise ParameterRangeError(f"sensitivity needs every d >= 2, got {bad}")
        return True

    def run(self) -> ExperimentResult:
        reports = []
        rows = []
        for d in self.config.d_list:
            report = ki_sensitivity(d)
            reports.append(report)
            g_ok = None
            if report.g is not None and report.g_target is not None:
                g_ok = report.g >= report.g_target
            rows.append({
                "d": d,
                "raw_parameter": report.raw_parameter,
                "clamped": report.clamped,
                "delta": report.delta,
                "gamma": report.gamma,
                "u": report.u,
                "f": report.f,
                "f_target": report.f_target,
                "f_within_target": report.f <= report.f_target,
                "lam": report.lam,
                "g": report.g,
                "g_target": report.g_target,
                "g_above_target": g_ok,
                "rate_lower_bound": report.rate_lower_bound,
            })
            self._log_progress(f"d={d}: f={report.f:.4g}, g={report.g}")
        return ExperimentResult.success_result(
            f"sensitivity at {len(rows)} alphabet sizes",
            columns=self.COLUMNS, rows=rows,
            payload={"reports": [r.to_dict() for r in reports]})
