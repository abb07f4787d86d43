"""Shared fixtures; puts src/ and the test helpers on sys.path"""

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR.parent / "src"))
sys.path.insert(0, str(TESTS_DIR))

from core_data import RankingSeries, parse_ranking_file  # noqa: E402
from helpers import SAMPLE_CSV, series_from_lists  # noqa: E402


@pytest.fixture
def sample_path() -> Path:
    return SAMPLE_CSV


@pytest.fixture
def sample_series() -> RankingSeries:
    return parse_ranking_file(SAMPLE_CSV)


@pytest.fixture
def alternating_series() -> RankingSeries:
    return series_from_lists([["A", "B"], ["B", "A"]] * 3)
