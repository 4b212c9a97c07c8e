"""Experiments behind the command-line subcommands."""

from .base import (
    BaseExperiment,
    ExperimentResult,
    OutputFormat,
    EXIT_OK,
    EXIT_VALIDATION,
    EXIT_INVARIANT,
)
from .factory import ExperimentFactory

__all__ = [
    'BaseExperiment',
    'ExperimentResult',
    'OutputFormat',
    'EXIT_OK',
    'EXIT_VALIDATION',
    'EXIT_INVARIANT',
    'ExperimentFactory',
]
