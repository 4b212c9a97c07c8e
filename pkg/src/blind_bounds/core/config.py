"""Experiment configuration and per-user directories."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic import ValidationError as PydanticValidationError

from .errors import InvalidInputError, ParameterRangeError
from .platform_utils import PlatformManager
from ..utils.logger import get_logger
from ..utils.serialization import load_json, parse_number

logger = get_logger(__name__)

DEFAULT_SEPARATION_DIMENSIONS = [2, 16, 256, 4096]
DEFAULT_DEFECT_EPSILONS = [0.0, 0.001, 0.01]
MAX_AUDIT_DIMENSION = 7
MAX_DEFECT_DIMENSION = 8


class ExperimentConfig(BaseModel):
    """Parameters of every subcommand.

    Defaults reproduce the reference runs; validators enforce the
    preconditions of the operation each field feeds.
    """
    model_config = ConfigDict(extra='forbid', validate_assignment=True)

    command: str = ""
    seed: int = 0
    output: Optional[Path] = None

    # example-2x2
    eps: str = "0"

    # separation
    d_list: List[int] = Field(default_factory=lambda: list(DEFAULT_SEPARATION_DIMENSIONS))

    # protocol / ki-sensitivity
    d: int = 1024
    delta: float = 0.1
    gamma: float = 0.1
    samples: int = 100_000

    # defect
    ensemble: str = "example"
    defect_dims: List[int] = Field(default_factory=lambda: [2, 3])
    eps_list: List[float] = Field(default_factory=lambda: list(DEFAULT_DEFECT_EPSILONS))
    backend: str = "penalty-gradient"
    restarts: int = 50
    max_iter: int = 2000

    # audit
    trials: int = 1000
    d_max: int = 6
    suites: List[str] = Field(default_factory=list)
    faulty_shift_constant: Optional[int] = None

    # decompose
    matrix: Optional[Path] = None

    @field_validator('eps', mode='before')
    @classmethod
    def _check_eps_text(cls, v: Any) -> str:
        try:
            value = parse_number(v)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"eps is not a number: {v!r}") from e
        if not 0 <= value < 1:
            raise ValueError(f"eps must lie in [0, 1), got {v}")
        return str(v).strip()

    @field_validator('d_list')
    @classmethod
    def _check_d_list(cls, v: List[int]) -> List[int]:
        if not v:
            raise ValueError("d_list must not be empty")
        bad = [d for d in v if d < 2]
        if bad:
            raise ValueError(f"separation needs every d >= 2, got {bad}")
        return v

    @field_validator('d')
    @classmethod
    def _check_d(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"alphabet size must be positive, got {v}")
        return v

    @field_validator('delta')
    @classmethod
    def _check_delta(cls, v: float) -> float:
        if not 0 < v < 0.5:
            raise ValueError(f"delta must lie in (0, 1/2), got {v}")
        return v

    @field_validator('gamma')
    @classmethod
    def _check_gamma(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {v}")
        return v

    @field_validator('eps_list')
    @classmethod
    def _check_eps_list(cls, v: List[float]) -> List[float]:
        bad = [e for e in v if not 0 <= e < 1]
        if bad:
            raise ValueError(f"eps must lie in [0, 1), got {bad}")
        return v

    @field_validator('defect_dims')
    @classmethod
    def _check_defect_dims(cls, v: List[int]) -> List[int]:
        bad = [d for d in v if not 2 <= d <= MAX_DEFECT_DIMENSION]
        if not v or bad:
            raise ValueError(f"defect dimensions must lie in [2, {MAX_DEFECT_DIMENSION}], got {v}")
        return v

    @field_validator('ensemble')
    @classmethod
    def _check_ensemble(cls, v: str) -> str:
        if v not in ("example", "uniform-staircase"):
            raise ValueError(f"unknown ensemble {v!r}")
        return v

    @field_validator('backend')
    @classmethod
    def _check_backend(cls, v: str) -> str:
        if v not in ("penalty-gradient", "grid-oracle"):
            raise ValueError(f"unknown backend {v!r}")
        return v

    @field_validator('samples', 'trials')
    @classmethod
    def _check_non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"count must be non-negative, got {v}")
        return v

    @field_validator('restarts', 'max_iter')
    @classmethod
    def _check_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"count must be positive, got {v}")
        return v

    @field_validator('d_max')
    @classmethod
    def _check_d_max(cls, v: int) -> int:
        if not 2 <= v <= MAX_AUDIT_DIMENSION:
            raise ValueError(f"d_max must lie in [2, {MAX_AUDIT_DIMENSION}], got {v}")
        return v

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode='json')

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        return cls.model_validate(data)


class ConfigManager:
    """Resolves user directories and merges defaults, sweep files and flags."""

    def __init__(self, config_dir: Optional[Path] = None):
        """Initialize configuration manager.

        Args:
            config_dir: Optional custom config directory
        """
        self.config_dir = config_dir or PlatformManager.get_default_config_dir()
        self.defaults_path = self.config_dir / "defaults.json"

        self._defaults: Optional[Dict[str, Any]] = None

    def load_defaults(self) -> Dict[str, Any]:
        """Load user defaults from ``defaults.json``; empty when absent.

        Returns:
            Defaults dictionary
        """
        if self._defaults is not None:
            return self._defaults

        if self.defaults_path.exists():
            self._defaults = self._read(self.defaults_path)
        else:
            self._defaults = {}
        return self._defaults

    def load_sweep(self, path: Path) -> Dict[str, Any]:
        """Load a sweep file.

        The file is a JSON object of parameters; an entry keyed by a
        subcommand name holds overrides for that subcommand only.

        Raises:
            InvalidInputError: If the file is missing or malformed
        """
        if not path.exists():
            raise InvalidInputError(f"config file not found: {path}")
        return self._read(path)

    def build_config(self, command: str, flags: Optional[Dict[str, Any]] = None,
                     sweep_path: Optional[Path] = None) -> ExperimentConfig:
        """Merge defaults, sweep file and flags (later wins) into a config.

        Args:
            command: Subcommand name
            flags: Explicitly given command-line values
            sweep_path: Optional JSON sweep file

        Returns:
            Validated ExperimentConfig

        Raises:
            ParameterRangeError: If a value fails validation
        """
        merged: Dict[str, Any] = {}
        layers = [self.load_defaults()]
        if sweep_path is not None:
            layers.append(self.load_sweep(sweep_path))
        for layer in layers:
            merged.update(self._for_command(layer, command))
        merged.update({k: v for k, v in (flags or {}).items() if v is not None})
        merged['command'] = command

        try:
            config = ExperimentConfig.model_validate(merged)
        except PydanticValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
            raise ParameterRangeError(f"invalid {command} configuration: {problems}") from e

        logger.debug(f"Resolved {command} configuration: {config.to_dict()}")
        return config

    @staticmethod
    def _for_command(layer: Dict[str, Any], command: str) -> Dict[str, Any]:
        commands = {"example-2x2", "separation", "protocol", "defect", "audit",
                    "decompose", "ki-sensitivity"}
        values = {k: v for k, v in layer.items() if k not in commands}
        section = layer.get(command)
        if isinstance(section, dict):
            values.update(section)
        return values

    @staticmethod
    def _read(path: Path) -> Dict[str, Any]:
        try:
            data = load_json(path)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"malformed JSON in {path}: {e}") from e
        if not isinstance(data, dict):
            raise InvalidInputError(f"{path} must hold a JSON object")
        return data
