"""Base experiment classes and result model."""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional
import logging

from ..core.config import ExperimentConfig
from ..utils.serialization import dump_json, header_lines, render_csv

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INVARIANT = 3


class OutputFormat(Enum):
    """Rendering of an experiment result."""
    CSV = "csv"
    JSON = "json"


@dataclass
class ExperimentResult:
    """Result of running one experiment.

    ``rows`` follow ``columns`` and become the CSV body; ``payload`` is the
    full JSON document.
    """
    success: bool
    message: str
    columns: List[str] = field(default_factory=list)
    rows: List[Dict[str, Any]] = field(default_factory=list)
    payload: Dict[str, Any] = field(default_factory=dict)
    exit_code: int = EXIT_OK

    @classmethod
    def success_result(cls, message: str, columns: Optional[List[str]] = None,
                       rows: Optional[List[Dict[str, Any]]] = None,
                       payload: Optional[Dict[str, Any]] = None) -> 'ExperimentResult':
        """Create a successful result."""
        return cls(success=True, message=message, columns=list(columns or []),
                   rows=list(rows or []), payload=dict(payload or {}))

    @classmethod
    def failure_result(cls, message: str, columns: Optional[List[str]] = None,
                       rows: Optional[List[Dict[str, Any]]] = None,
                       payload: Optional[Dict[str, Any]] = None,
                       exit_code: int = EXIT_INVARIANT) -> 'ExperimentResult':
        """Create a failed result; the rows are still rendered."""
        return cls(success=False, message=message, columns=list(columns or []),
                   rows=list(rows or []), payload=dict(payload or {}), exit_code=exit_code)

    def render(self, fmt: OutputFormat, version: str, command: str,
               seed: Optional[int] = None) -> str:
        """Render as CSV (with comment header) or as a JSON document."""
        if fmt == OutputFormat.CSV:
            return render_csv(self.columns, self.rows, header_lines(version, command, seed))
        document = {
            'tool': 'blind-bounds',
            'version': version,
            'command': command,
            'seed': seed,
            'success': self.success,
            'message': self.message,
            **self.payload,
        }
        return dump_json(document) + "\n"


class BaseExperiment(ABC):
    """Abstract base class for all experiments."""

    name: str = ""
    default_format: OutputFormat = OutputFormat.CSV

    def __init__(self, config: ExperimentConfig):
        """Initialize experiment with configuration.

        Args:
            config: Validated experiment configuration
        """
        self.config = config
        self.logger = logging.getLogger(f"blind_bounds.{self.__class__.__name__}")

    @abstractmethod
    def run(self) -> ExperimentResult:
        """Run the experiment.

        Returns:
            ExperimentResult with rows and JSON payload
        """
        pass

    @abstractmethod
    def validate_config(self) -> bool:
        """Validate the parameters this experiment reads.

        Returns:
            True if configuration is valid

        Raises:
            ValidationError: If configuration is invalid
        """
        pass

    def _log_progress(self, message: str):
        """Log progress at info level in debug mode, debug level otherwise."""
        from ..core.debug_config import DebugConfig
        if DebugConfig.is_debug_mode():
            self.logger.info(message)
        else:
            self.logger.debug(message)
