"""Builders for small ranking series used across the test modules"""

import io
from pathlib import Path

from core_data import RankingSeries, Snapshot, parse_ranking_csv

SAMPLE_CSV = Path(__file__).resolve().parent.parent / "data" / "fcwr_excerpt.csv"


def series_from_lists(rows, labels=None, scores=None) -> RankingSeries:
    """RankingSeries from lists of element ids, one list per snapshot"""
    labels = labels or [str(t) for t in range(len(rows))]
    return RankingSeries([
        Snapshot(label, elements, None if scores is None else scores[t])
        for t, (label, elements) in enumerate(zip(labels, rows))
    ])


def csv_series(text: str) -> RankingSeries:
    return parse_ranking_csv(io.BytesIO(text.encode("utf-8")))
