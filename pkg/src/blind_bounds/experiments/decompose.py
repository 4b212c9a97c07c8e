"""Birkhoff decomposition of a doubly-stochastic matrix read from JSON."""

import json

from .base import BaseExperiment, ExperimentResult
from ..core.birkhoff import birkhoff_decompose, identity_weight, max_permutation_count
from ..core.errors import InvalidInputError
from ..core.stochastic import StochasticMatrix
from ..utils.serialization import format_number, load_json


class DecomposeExperiment(BaseExperiment):
    """Decompose the matrix in ``config.matrix`` into weighted permutations.

    The file holds either a list of rows or ``{"rows": [...]}``; entries
    written as "num/den" strings are decomposed exactly.
    """

    name = "decompose"

    COLUMNS = ["index", "weight", "permutation"]

    def validate_config(self) -> bool:
        path = self.config.matrix
        if path is None:
            raise InvalidInputError("decompose needs --matrix")
        if not path.exists():
            raise InvalidInputError(f"matrix file not found: {path}")
        return True

    def _load(self) -> StochasticMatrix:
        try:
            data = load_json(self.config.matrix)
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"malformed JSON in {self.config.matrix}: {e}") from e
        if not isinstance(data, (dict, list)):
            raise InvalidInputError("matrix file must hold a list of rows or {\"rows\": ...}")
        try:
            return StochasticMatrix.from_dict(data)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
            raise InvalidInputError(f"cannot read matrix: {e}") from e

    def run(self) -> ExperimentResult:
        matrix = self._load()
        decomposition = birkhoff_decompose(matrix)
        self._log_progress(f"{len(decomposition)} permutations for d={matrix.d}")

        rows = [{"index": i, "weight": w, "permutation": " ".join(str(c) for c in sigma)}
                for i, (w, sigma) in enumerate(zip(decomposition.weights, decomposition.perms))]
        payload = {
            "d": matrix.d,
            "exact": matrix.exact,
            "decomposition": decomposition.to_dict(),
            "identity_weight": format_number(identity_weight(decomposition)),
            "reconstruction_error": decomposition.reconstruction_error(matrix),
            "permutation_count": len(decomposition),
            "permutation_count_bound": max_permutation_count(matrix.d),
        }
        return ExperimentResult.success_result(
            f"{len(decomposition)} permutations (bound {max_permutation_count(matrix.d)})",
            columns=self.COLUMNS, rows=rows, payload=payload)
