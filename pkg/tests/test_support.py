"""
Tests for configuration loading, replicate execution, the multi-start
optimizer, error categories and report bundles
"""

import json

import numpy as np
import pytest
from pydantic import ValidationError

from config import AnalysisConfig, as_dict, load_config
from errors import FitDiverged, InsufficientData, MissingColumn, NonPositiveScore, TooFewSnapshots
from multistart import MultiStartOptimizer, StartStatus
from parallel import ExecutionMode, replicate_rng, run_replicates, select_mode
from reports import ReportBundle, ReportValidationError, validate_bundle


# Configuration

def test_default_config_file_matches_models():
    assert as_dict(load_config()) == as_dict(AnalysisConfig())


def test_missing_config_file_uses_defaults(tmp_path):
    config = load_config(tmp_path / "absent.json")
    assert config.bootstrap.n_bootstrap == 200
    assert config.walker.sigma_lower == 1e-4


def test_partial_config_keeps_other_defaults(tmp_path):
    path = tmp_path / "partial.json"
    path.write_text(json.dumps({"execution": {"workers": 4}}), encoding="utf-8")
    config = load_config(path)
    assert config.execution.workers == 4
    assert config.fitting.ftol == 1e-10


def test_invalid_config_values(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"execution": {"workers": 0}}), encoding="utf-8")
    with pytest.raises(ValidationError):
        load_config(path)


# Replicates

def test_replicate_streams_are_independent_and_stable():
    a = replicate_rng(7, 0).standard_normal(5)
    assert np.array_equal(a, replicate_rng(7, 0).standard_normal(5))
    assert not np.array_equal(a, replicate_rng(7, 1).standard_normal(5))
    assert not np.array_equal(a, replicate_rng(8, 0).standard_normal(5))


def test_run_replicates_keeps_index_order():
    assert run_replicates(lambda i: i * i, 6, workers=1) == [0, 1, 4, 9, 16, 25]
    assert run_replicates(lambda i: i * i, 6, workers=3) == [0, 1, 4, 9, 16, 25]
    assert run_replicates(lambda i: i, 3, mode="serial") == [0, 1, 2]
    with pytest.raises(ValueError):
        run_replicates(lambda i: i, 3, mode="processes")


def test_select_mode():
    assert select_mode(1) == ExecutionMode.SERIAL
    assert select_mode(4) == ExecutionMode.THREADS


# Multi-start optimizer

def test_multistart_picks_lowest_cost():
    # two local minima of (x^2 - 1)^2 + 0.1 x; the left one is lower
    def residuals(x):
        return np.array([x[0] ** 2 - 1.0, np.sqrt(0.1 * (x[0] + 2.0))])

    optimizer = MultiStartOptimizer(residuals, None, [-2.0], [2.0], label="double-well")
    best = optimizer.run([[0.9], [-0.9]])
    assert best.index == 1
    assert best.x[0] < 0
    stats = optimizer.get_statistics()
    assert stats["total_starts"] == 2
    assert stats["label"] == "double-well"


def test_multistart_skips_failed_starts():
    def residuals(x):
        return np.array([np.nan]) if x[0] > 0 else np.array([x[0] + 1.0])

    optimizer = MultiStartOptimizer(residuals, None, [-5.0], [5.0])
    best = optimizer.run([[1.0], [-3.0]])
    assert best.index == 1
    assert optimizer.results[0].status == StartStatus.FAILED
    assert best.x[0] == pytest.approx(-1.0)


def test_multistart_all_failed():
    optimizer = MultiStartOptimizer(lambda x: np.array([np.nan]), None, [-1.0], [1.0], label="broken")
    with pytest.raises(FitDiverged) as info:
        optimizer.run([[0.0], [0.5]])
    assert info.value.exit_code == 3
    assert optimizer.get_statistics()["failed"] == 2


# Errors

def test_error_categories_and_context():
    assert MissingColumn("rank").exit_code == 2
    assert TooFewSnapshots(1).exit_code == 4
    assert InsufficientData("need more ranks").exit_code == 3
    assert NonPositiveScore(5, 0.0).exit_code == 3
    payload = MissingColumn("rank").to_dict()
    assert payload["error"] == "MissingColumn"
    assert payload["category"] == "input"
    assert payload["context"] == {"column": "rank"}


# Report bundles

def test_empty_bundle_is_valid():
    bundle = ReportBundle.build({"command": "dynamics", "seed": None})
    data = json.loads(bundle.to_json_text())
    assert data["metadata"]["version"] == "1.0.0"
    assert data["fits"] == [] and data["dynamics"] is None


def test_non_finite_values_become_null():
    bundle = ReportBundle.build({"command": "fit"}, fit_summary={
        "m1": {"count": 1, "r_squared_mean": float("nan"), "r_squared_std": 0.0,
               "ks_p_mean": 0.5, "ks_p_std": float("inf")},
    })
    text = bundle.to_json_text()
    assert "NaN" not in text and "Infinity" not in text
    assert json.loads(text)["fit_summary"]["m1"]["r_squared_mean"] is None


def test_schema_rejects_bad_bundles():
    with pytest.raises(ReportValidationError):
        validate_bundle({"metadata": {"tool": "x", "version": "1", "command": "fit"}})
    with pytest.raises(ReportValidationError):
        ReportBundle.build({"command": "rank"}).to_json_text()
