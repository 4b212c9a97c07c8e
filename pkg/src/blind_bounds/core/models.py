"""Report models using Pydantic."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, computed_field, model_validator

from .distributions import Distribution
from ..utils.serialization import parse_number_list

COMPONENT_TOLERANCE = 1e-12


class RateBound(BaseModel):
    """Per-copy lower bound on the communication rate, in bits.

    ``value`` is the sum of ``components``; ``provenance`` names the result
    each component comes from.
    """
    value: float
    components: Dict[str, float]
    epsilon: float
    provenance: Dict[str, str] = Field(default_factory=dict)
    diagnostics: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _components_add_up(self) -> 'RateBound':
        total = sum(self.components.values())
        if abs(self.value - total) > COMPONENT_TOLERANCE:
            raise ValueError(f"value {self.value!r} differs from component sum {total!r}")
        return self

    @computed_field
    @property
    def vacuous(self) -> bool:
        return self.value <= 0.0

    def to_dict(self) -> Dict:
        """Convert to dictionary for JSON serialization."""
        return self.model_dump(mode='json')

    @classmethod
    def from_dict(cls, data: Dict) -> 'RateBound':
        data = {k: v for k, v in data.items() if k != "vacuous"}
        return cls.model_validate(data)


class ChainReport(BaseModel):
    """The six terms of the no-cloning chain for a two-state ensemble.

    Terms must be non-increasing from ``sqrt_defect`` down to
    ``two_copy_gain``.
    """
    epsilon: float
    sqrt_defect: float
    pinsker_root: float
    no_cloning: float
    product_gap: float
    marginal_gap: float
    two_copy_gain: float
    defect: float
    defect_bound: float
    distances: Dict[str, str] = Field(default_factory=dict)

    def terms(self) -> List[float]:
        return [self.sqrt_defect, self.pinsker_root, self.no_cloning,
                self.product_gap, self.marginal_gap, self.two_copy_gain]

    @property
    def holds(self) -> bool:
        """Every successive inequality holds up to roundoff."""
        terms = self.terms()
        return all(a >= b - 1e-10 for a, b in zip(terms, terms[1:]))

    def to_dict(self) -> Dict:
        return self.model_dump(mode='json')

    @classmethod
    def from_dict(cls, data: Dict) -> 'ChainReport':
        return cls.model_validate(data)


class ProtocolReport(BaseModel):
    """Communication and error accounting of one bucketing protocol."""
    d: int
    delta: float
    gamma: float
    u: int
    bits_sent: float
    bits_sent_code: int
    rate_bound: float
    rate_bound_applies: bool = True
    induced_rho: List[str]
    induced_sigma: List[str]
    local_error_rho: float
    local_error_sigma: float
    error_bound: float
    seed: Optional[int] = None
    samples: int = 0
    mc_error_rho: Optional[float] = None
    mc_error_sigma: Optional[float] = None
    mc_sigma_rho: Optional[float] = None
    mc_sigma_sigma: Optional[float] = None
    truncation_mass_rho: float = 0.0
    truncation_mass_sigma: float = 0.0
    max_spread_error: float = 0.0
    spread_error_bound: float = 0.0
    nonempty_buckets: int = 0
    bucket_count_bound: int = 0

    def induced(self, which: str = "rho") -> Distribution:
        values = self.induced_rho if which == "rho" else self.induced_sigma
        return Distribution(parse_number_list(values))

    def to_dict(self) -> Dict:
        return self.model_dump(mode='json')

    @classmethod
    def from_dict(cls, data: Dict) -> 'ProtocolReport':
        return cls.model_validate(data)


class KIErrorReport(BaseModel):
    """Fidelity error f, diagonal leakage lambda and entropy error g of a protocol."""
    d: int
    delta: float
    gamma: float
    u: int
    f: float
    lam: float
    g: Optional[float] = None
    degenerate: bool = False
    f_bound: float
    one_minus_lambda: float
    leakage_bound: float
    analytic_leakage_bound: float
    rate_lower_bound: Optional[float] = None
    f_target: Optional[float] = None
    g_target: Optional[float] = None
    clamped: bool = False
    raw_parameter: Optional[float] = None

    def to_dict(self) -> Dict:
        return self.model_dump(mode='json')

    @classmethod
    def from_dict(cls, data: Dict) -> 'KIErrorReport':
        return cls.model_validate(data)
