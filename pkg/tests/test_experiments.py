"""Tests for the experiment factory and result rendering."""

import json
from fractions import Fraction

import pytest

from blind_bounds.core.config import ExperimentConfig
from blind_bounds.core.errors import UnsupportedInputError
from blind_bounds.experiments import (
    EXIT_INVARIANT,
    ExperimentFactory,
    ExperimentResult,
    OutputFormat,
)
from blind_bounds.experiments.rate_bounds import Example2x2Experiment


def test_factory_lists_every_command():
    assert ExperimentFactory.commands() == [
        "example-2x2", "separation", "protocol", "defect", "audit", "decompose",
        "ki-sensitivity",
    ]


def test_factory_creates_and_rejects():
    experiment = ExperimentFactory.create_experiment(ExperimentConfig(command="example-2x2"))
    assert isinstance(experiment, Example2x2Experiment)
    with pytest.raises(UnsupportedInputError):
        ExperimentFactory.create_experiment(ExperimentConfig(command="nonsense"))


def test_result_rendering():
    result = ExperimentResult.failure_result(
        "one violation", columns=["suite", "violations"],
        rows=[{"suite": "hull-distance", "violations": 1}],
        payload={"gain": Fraction(1, 36)})
    assert result.exit_code == EXIT_INVARIANT

    text = result.render(OutputFormat.CSV, "0.1.0", "audit", 9)
    assert text.splitlines() == ["# blind-bounds 0.1.0 seed=9 command=audit",
                                 "suite,violations", "hull-distance,1"]

    doc = json.loads(result.render(OutputFormat.JSON, "0.1.0", "audit", 9))
    assert doc["success"] is False
    assert doc["gain"] == "1/36"
    assert doc["seed"] == 9


def test_example_experiment_payload():
    experiment = Example2x2Experiment(ExperimentConfig(command="example-2x2", eps="1/144"))
    assert experiment.validate_config()
    result = experiment.run()
    assert result.payload["defect_bound"] == "1/10368"
    assert result.rows[0]["gain"] == Fraction(1, 36)
