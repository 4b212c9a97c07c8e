"""Experiment factory for creating experiment instances."""

from typing import Dict, List, Type

from .audit import AuditExperiment
from .base import BaseExperiment
from .compression import KISensitivityExperiment, ProtocolExperiment
from .decompose import DecomposeExperiment
from .defect import DefectExperiment
from .rate_bounds import Example2x2Experiment, SeparationExperiment
from ..core.config import ExperimentConfig
from ..core.errors import UnsupportedInputError


class ExperimentFactory:
    """Factory for creating experiment instances based on the subcommand."""

    # Registry of available experiments, in the order they are listed by the CLI
    _registry: Dict[str, Type[BaseExperiment]] = {
        Example2x2Experiment.name: Example2x2Experiment,
        SeparationExperiment.name: SeparationExperiment,
        ProtocolExperiment.name: ProtocolExperiment,
        DefectExperiment.name: DefectExperiment,
        AuditExperiment.name: AuditExperiment,
        DecomposeExperiment.name: DecomposeExperiment,
        KISensitivityExperiment.name: KISensitivityExperiment,
    }

    @classmethod
    def create_experiment(cls, config: ExperimentConfig) -> BaseExperiment:
        """Create the experiment named by ``config.command``.

        Args:
            config: Experiment configuration

        Returns:
            Experiment instance

        Raises:
            UnsupportedInputError: If no experiment is registered for the command
        """
        experiment_class = cls._registry.get(config.command.lower())
        if experiment_class is None:
            raise UnsupportedInputError(f"unknown experiment: {config.command!r}")
        return experiment_class(config)

    @classmethod
    def commands(cls) -> List[str]:
        """Subcommand names in CLI order."""
        return list(cls._registry)

