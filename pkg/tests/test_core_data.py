"""
Tests for ranking CSV ingestion, validation and indexing
"""

import io

import pytest

from core_data import (
    RankingSeries, Snapshot, element_at, parse_ranking_csv, ranking_csv_text,
    select_snapshot, snapshot_scores, truncate_top_n, write_ranking_csv,
)
from errors import (
    DuplicateElement, DuplicateRank, InsufficientDepth, MalformedRow, MissingColumn,
    MissingScores, NonContiguousRanks, OutOfRange, SnapshotNotFound, UnevenDepth,
    UnorderedScores,
)
from helpers import csv_series, series_from_lists

MINIMAL = "time,rank,element\n1,1,A\n1,2,B\n2,1,B\n2,2,A\n"


def test_minimal_series():
    series = csv_series(MINIMAL)
    assert series.T == 2
    assert series.N == 2
    assert not series.has_scores
    assert series.time_labels == ["1", "2"]


def test_rows_are_sorted_by_time_then_rank():
    series = csv_series("time,rank,element\n2,2,A\n1,2,B\n2,1,B\n1,1,A\n")
    assert series.snapshots[0].elements == ("A", "B")
    assert series.snapshots[1].elements == ("B", "A")


def test_duplicate_rank():
    with pytest.raises(DuplicateRank) as info:
        csv_series("time,rank,element\n1,1,A\n1,1,B\n")
    assert info.value.exit_code == 2


def test_non_contiguous_ranks():
    with pytest.raises(NonContiguousRanks):
        csv_series("time,rank,element\n1,1,A\n1,3,B\n")


def test_missing_column():
    with pytest.raises(MissingColumn) as info:
        csv_series("time,element\n1,A\n")
    assert "rank" in str(info.value)


def test_malformed_rank_names_line():
    with pytest.raises(MalformedRow) as info:
        csv_series("time,rank,element\n1,1,A\n1,two,B\n")
    assert info.value.context["line"] == 3
    assert info.value.context["field"] == "rank"


def test_comma_inside_element_is_rejected():
    with pytest.raises(MalformedRow) as info:
        csv_series("time,rank,element\n1,1,A,B\n")
    assert info.value.context["line"] == 2


def test_duplicate_element():
    with pytest.raises(DuplicateElement):
        csv_series("time,rank,element\n1,1,A\n1,2,A\n")


def test_scores_must_not_increase():
    with pytest.raises(UnorderedScores):
        csv_series("time,rank,element,score\n1,1,A,5\n1,2,B,7\n")


def test_negative_score_is_malformed():
    with pytest.raises(MalformedRow):
        csv_series("time,rank,element,score\n1,1,A,-1\n")


@pytest.mark.parametrize("text", ["time,rank,element,score\n", "time,rank,element\n\n\n"])
def test_header_without_rows_is_malformed(text):
    with pytest.raises(MalformedRow) as info:
        csv_series(text)
    assert info.value.context["line"] == 2
    assert info.value.exit_code == 2


def test_tied_scores_are_kept_in_rank_order():
    series = csv_series("time,rank,element,score\n1,1,B,3\n1,2,A,3\n")
    assert series.snapshots[0].elements == ("B", "A")
    assert snapshot_scores(series.snapshots[0]) == [(1, 3.0), (2, 3.0)]


def test_iso_dates_order_snapshots():
    series = csv_series("time,rank,element\n2020-02-01,1,A\n2019-12-30,1,B\n")
    assert series.time_labels == ["2019-12-30", "2020-02-01"]


def test_crlf_line_endings():
    series = csv_series(MINIMAL.replace("\n", "\r\n"))
    assert series.T == 2


def test_round_trip(sample_series):
    text = ranking_csv_text(sample_series)
    assert csv_series(text) == sample_series


def test_write_to_binary_stream(sample_series):
    buffer = io.BytesIO()
    write_ranking_csv(sample_series, buffer)
    buffer.seek(0)
    assert parse_ranking_csv(buffer) == sample_series
    assert buffer.getvalue().startswith(b"time,rank,element,score\n")


def test_truncate_prefix():
    series = series_from_lists([list("ABCDE"), list("EDCBA")])
    truncated = truncate_top_n(series, 3)
    assert truncated.N == 3
    assert truncated.snapshots[1].elements == ("E", "D", "C")


def test_truncate_identity_and_idempotence():
    series = series_from_lists([list("ABCDE"), list("EDCBA")])
    assert truncate_top_n(series, 5) == series
    once = truncate_top_n(series, 2)
    assert truncate_top_n(once, 2) == once


def test_truncate_insufficient_depth_names_time():
    series = series_from_lists([list("ABCDE"), list("EDCBA")], labels=["2001", "2002"])
    with pytest.raises(InsufficientDepth) as info:
        truncate_top_n(series, 6)
    assert "2001" in str(info.value)


def test_element_at():
    series = csv_series(MINIMAL)
    assert element_at(series, 1, 0) == "A"
    assert element_at(series, 2, 1) == "A"
    with pytest.raises(OutOfRange):
        element_at(series, 3, 0)


def test_element_at_matches_source_rows(sample_path, sample_series):
    for line in sample_path.read_text(encoding="utf-8").splitlines()[1:]:
        label, rank, element, _ = line.split(",")
        t = sample_series.time_labels.index(label)
        assert element_at(sample_series, int(rank), t) == element


def test_uneven_depth_needs_truncation():
    series = series_from_lists([list("ABC"), list("AB")])
    assert series.N is None
    with pytest.raises(UnevenDepth):
        series.occupancy_matrix()
    assert truncate_top_n(series, 2).N == 2


def test_uneven_depth_message_without_snapshots():
    error = UnevenDepth([])
    assert error.context["min_depth"] == 0
    assert error.context["max_depth"] == 0


def test_occupancy_matrix_codes():
    series = series_from_lists([["A", "B"], ["B", "C"]])
    matrix = series.occupancy_matrix()
    assert matrix.tolist() == [[0, 1], [1, 2]]
    assert list(series.element_names) == ["A", "B", "C"]


@pytest.mark.parametrize("selector,index", [("first", 0), ("last", 5), ("2", 2), ("-1", 5), ("2014-01-20", 2)])
def test_select_snapshot(sample_series, selector, index):
    found, snapshot = select_snapshot(sample_series, selector)
    assert found == index
    assert snapshot is sample_series.snapshots[index]


def test_select_snapshot_not_found(sample_series):
    with pytest.raises(SnapshotNotFound):
        select_snapshot(sample_series, "2099-01-01")
    with pytest.raises(SnapshotNotFound):
        select_snapshot(sample_series, "6")


def test_scores_required_for_fitting():
    series = csv_series(MINIMAL)
    with pytest.raises(MissingScores) as info:
        snapshot_scores(series.snapshots[0])
    assert "score" in str(info.value)


def test_from_matrix_builds_series():
    series = RankingSeries.from_matrix([[0, 1], [1, 0]], ["x", "y"])
    assert series.snapshots[1] == Snapshot("1", ["y", "x"])

