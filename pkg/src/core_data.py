"""
Time-series ranking tables

Parses and validates ranking CSV files into an immutable RankingSeries and
provides the X(k, t) accessor every dynamics measure is built on.

CSV format: header `time,rank,element,score` (score optional), comma
separated, no quoting.  Time labels are integer indexes or ISO-8601 dates;
only their order is used.
"""

import csv
import io
import logging
import re
from datetime import datetime
from pathlib import Path
from typing import IO, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from dateutil.parser import isoparse

from errors import (
    DuplicateElement, DuplicateRank, InsufficientDepth, MalformedRow, MissingColumn,
    MissingScores, NonContiguousRanks, OutOfRange, SnapshotNotFound, UnevenDepth,
    UnorderedScores,
)

logger = logging.getLogger(__name__)

ElementId = str
TimeKey = Union[int, datetime]

REQUIRED_COLUMNS = ("time", "rank", "element")
SCORE_COLUMN = "score"
_INT_PATTERN = re.compile(r"^[+-]?\d+$")
_LINE_PATTERN = re.compile(r"line (\d+)")


def parse_time_label(label: str) -> TimeKey:
    """Ordering key of a time label: integer index or ISO-8601 date"""
    text = label.strip()
    if _INT_PATTERN.match(text):
        return int(text)
    parsed = isoparse(text)
    # naive and aware datetimes cannot be compared; order on naive wall time
    return parsed.replace(tzinfo=None)


class Snapshot:
    """One ranking at one time: elements listed by rank 1..N_t"""

    def __init__(self, time_label: str, elements: Sequence[ElementId],
                 scores: Optional[Sequence[float]] = None, time_key: Optional[TimeKey] = None):
        self.time_label = str(time_label)
        self.time_key = parse_time_label(self.time_label) if time_key is None else time_key
        self.elements: Tuple[ElementId, ...] = tuple(elements)
        self.scores: Optional[Tuple[float, ...]] = None if scores is None else tuple(float(s) for s in scores)
        self._validate()

    def _validate(self):
        seen = set()
        for element in self.elements:
            if not element or "," in element or "\n" in element:
                raise MalformedRow(0, "element", f"invalid element id {element!r} at time '{self.time_label}'")
            if element in seen:
                raise DuplicateElement(self.time_label, element)
            seen.add(element)

        if self.scores is not None:
            if len(self.scores) != len(self.elements):
                raise MalformedRow(0, "score", f"{len(self.scores)} scores for {len(self.elements)} entries")
            for rank, score in enumerate(self.scores, start=1):
                if not np.isfinite(score) or score < 0:
                    raise MalformedRow(0, "score", f"score {score} at rank {rank} must be finite and non-negative")
                if rank > 1 and score > self.scores[rank - 2]:
                    raise UnorderedScores(self.time_label, rank)

    @property
    def depth(self) -> int:
        return len(self.elements)

    @property
    def entries(self) -> List[Tuple[int, ElementId, Optional[float]]]:
        scores = self.scores if self.scores is not None else (None,) * self.depth
        return [(rank, element, score)
                for rank, (element, score) in enumerate(zip(self.elements, scores), start=1)]

    def head(self, n: int) -> "Snapshot":
        scores = None if self.scores is None else self.scores[:n]
        return Snapshot(self.time_label, self.elements[:n], scores, time_key=self.time_key)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Snapshot):
            return NotImplemented
        return (self.time_label == other.time_label and self.elements == other.elements
                and self.scores == other.scores)

    def __repr__(self) -> str:
        return f"Snapshot(time_label={self.time_label!r}, depth={self.depth})"


class RankingSeries:
    """
    Ordered sequence of ranking snapshots, the empirical X(k, t)

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, snapshots: Sequence[Snapshot]):
        self.snapshots: Tuple[Snapshot, ...] = tuple(snapshots)
        self._matrix: Optional[np.ndarray] = None
        self._element_names: Optional[np.ndarray] = None

        for previous, current in zip(self.snapshots, self.snapshots[1:]):
            try:
                ordered = previous.time_key < current.time_key
            except TypeError:
                raise MalformedRow(0, "time", "time labels mix integer indexes and dates")
            if not ordered:
                raise MalformedRow(0, "time",
                                   f"time labels not strictly increasing: '{previous.time_label}' then '{current.time_label}'")

        scored = {s.scores is not None for s in self.snapshots}
        if len(scored) > 1:
            raise MalformedRow(0, "score", "either every snapshot has scores or none does")

    @property
    def T(self) -> int:
        return len(self.snapshots)

    @property
    def depths(self) -> List[int]:
        return [s.depth for s in self.snapshots]

    @property
    def N(self) -> Optional[int]:
        """Common depth, or None while snapshots have uneven depth"""
        depths = set(self.depths)
        return depths.pop() if len(depths) == 1 else None

    @property
    def has_scores(self) -> bool:
        return bool(self.snapshots) and self.snapshots[0].scores is not None

    @property
    def time_labels(self) -> List[str]:
        return [s.time_label for s in self.snapshots]

    def require_uniform(self) -> int:
        """Common depth N; raises UnevenDepth if the series is not truncated"""
        n = self.N
        if n is None:
            raise UnevenDepth(self.depths)
        return n

    def occupancy_matrix(self) -> np.ndarray:
        """
        T x N matrix of integer element codes: matrix[t, k-1] encodes X(k, t)

        Codes follow order of first appearance; the same ElementId always
        maps to the same code.
        """
        if self._matrix is None:
            n = self.require_uniform()
            flat = np.array([e for s in self.snapshots for e in s.elements], dtype=object)
            codes, uniques = pd.factorize(flat)
            matrix = codes.reshape(self.T, n).astype(np.int64)
            matrix.setflags(write=False)
            self._matrix = matrix
            self._element_names = np.asarray(uniques, dtype=object)
        return self._matrix

    @property
    def element_names(self) -> np.ndarray:
        self.occupancy_matrix()
        return self._element_names

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, element_names: Sequence[ElementId],
                    time_labels: Optional[Sequence[str]] = None) -> "RankingSeries":
        matrix = np.asarray(matrix)
        names = list(element_names)
        labels = time_labels if time_labels is not None else [str(t) for t in range(matrix.shape[0])]
        snapshots = [Snapshot(label, [names[code] for code in row]) for label, row in zip(labels, matrix)]
        return cls(snapshots)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RankingSeries):
            return NotImplemented
        return self.snapshots == other.snapshots

    def __iter__(self) -> Iterator[Snapshot]:
        return iter(self.snapshots)

    def __repr__(self) -> str:
        return f"RankingSeries(T={self.T}, N={self.N})"


def _malformed_from_parser_error(error: Exception) -> MalformedRow:
    match = _LINE_PATTERN.search(str(error))
    line = int(match.group(1)) if match else 0
    return MalformedRow(line, "row", f"wrong number of fields ({error})")


def _first_bad(mask: pd.Series) -> Optional[int]:
    hits = np.flatnonzero(mask.to_numpy())
    return int(hits[0]) if hits.size else None


def parse_ranking_csv(stream: Union[IO[bytes], IO[str]]) -> RankingSeries:
    """
    Parse a ranking CSV stream into a validated RankingSeries

    Rows are grouped by time and sorted by time then rank.

    Raises:
        MissingColumn, MalformedRow, DuplicateRank, NonContiguousRanks,
        DuplicateElement, UnorderedScores
    """
    raw = stream.read()
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedRow(raw[:e.start].count(b"\n") + 1, "row", "not valid UTF-8")

    raw = raw.replace("\r\n", "\n")

    # field counts are checked up front: element ids may not contain commas
    text_lines = raw.split("\n")
    expected_fields = text_lines[0].count(",") + 1
    for number, line in enumerate(text_lines[1:], start=2):
        if line.strip() and line.count(",") + 1 != expected_fields:
            raise MalformedRow(number, "row",
                               f"expected {expected_fields} fields, saw {line.count(',') + 1}")

    try:
        frame = pd.read_csv(
            io.StringIO(raw),
            index_col=False,
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            skip_blank_lines=False,
        )
    except pd.errors.EmptyDataError:
        raise MissingColumn(REQUIRED_COLUMNS[0])
    except pd.errors.ParserError as e:
        raise _malformed_from_parser_error(e)

    frame = frame.fillna("")
    # trailing blank lines
    filled = (frame != "").any(axis=1).to_numpy()
    last = int(np.flatnonzero(filled)[-1]) + 1 if filled.any() else 0
    frame = frame.iloc[:last]

    columns = list(frame.columns)
    for column in REQUIRED_COLUMNS:
        if column not in columns:
            raise MissingColumn(column)
    for column in columns:
        if column not in REQUIRED_COLUMNS and column != SCORE_COLUMN:
            raise MalformedRow(1, column, "unexpected column")
    has_scores = SCORE_COLUMN in columns
    if frame.empty:
        raise MalformedRow(2, "row", "no data rows after the header")

    lines = pd.Series(np.arange(len(frame)) + 2, index=frame.index)

    labels = frame["time"].str.strip()
    bad = _first_bad(labels == "")
    if bad is not None:
        raise MalformedRow(int(lines.iloc[bad]), "time", "empty time label")

    rank_text = frame["rank"].str.strip()
    bad = _first_bad(~rank_text.str.fullmatch(r"\d+"))
    if bad is not None:
        raise MalformedRow(int(lines.iloc[bad]), "rank", f"not a positive integer: {frame['rank'].iloc[bad]!r}")
    ranks = rank_text.astype(np.int64)
    bad = _first_bad(ranks <= 0)
    if bad is not None:
        raise MalformedRow(int(lines.iloc[bad]), "rank", "rank must be positive")

    elements = frame["element"]
    bad = _first_bad(elements == "")
    if bad is not None:
        raise MalformedRow(int(lines.iloc[bad]), "element", "empty element id")

    scores = None
    if has_scores:
        scores = pd.to_numeric(frame[SCORE_COLUMN].str.strip(), errors="coerce")
        bad = _first_bad(scores.isna() | ~np.isfinite(scores) | (scores < 0))
        if bad is not None:
            raise MalformedRow(int(lines.iloc[bad]), "score",
                               f"not a finite non-negative number: {frame[SCORE_COLUMN].iloc[bad]!r}")

    keys = {}
    for label in pd.unique(labels):
        try:
            keys[label] = parse_time_label(label)
        except (ValueError, OverflowError):
            line = int(lines[labels == label].iloc[0])
            raise MalformedRow(line, "time", f"not an integer index or ISO-8601 date: {label!r}")
    kinds = {isinstance(k, int) for k in keys.values()}
    if len(kinds) > 1:
        raise MalformedRow(int(lines.iloc[0]), "time", "time labels mix integer indexes and dates")

    table = pd.DataFrame({
        "label": labels,
        "rank": ranks,
        "element": elements,
        "line": lines,
    })
    if scores is not None:
        table["score"] = scores.astype(float)

    groups = dict(tuple(table.groupby("label", sort=False)))
    order = sorted(keys, key=lambda label: keys[label])
    snapshots = []
    seen_keys = {}
    for label in order:
        key = keys[label]
        group = groups[label].sort_values("rank", kind="mergesort")
        if key in seen_keys:
            raise MalformedRow(int(group["line"].iloc[0]), "time",
                               f"time label {label!r} duplicates {seen_keys[key]!r}")
        seen_keys[key] = label

        duplicated = group["rank"].duplicated()
        if duplicated.any():
            row = group[duplicated].iloc[0]
            raise DuplicateRank(label, int(row["rank"]), int(row["line"]))

        expected = np.arange(1, len(group) + 1)
        mismatch = np.flatnonzero(group["rank"].to_numpy() != expected)
        if mismatch.size:
            raise NonContiguousRanks(label, int(expected[mismatch[0]]))

        snapshot_scores = group["score"].tolist() if scores is not None else None
        snapshots.append(Snapshot(label, group["element"].tolist(), snapshot_scores, time_key=key))

    series = RankingSeries(snapshots)
    logger.info(f"Parsed ranking series: T={series.T}, depths {min(series.depths, default=0)}..{max(series.depths, default=0)}")
    return series


def parse_ranking_file(path: Union[str, Path]) -> RankingSeries:
    with open(path, "rb") as f:
        return parse_ranking_csv(f)


def ranking_csv_text(series: RankingSeries) -> str:
    """Serialize a series in the ranking CSV format"""
    rows = {"time": [], "rank": [], "element": []}
    if series.has_scores:
        rows["score"] = []
    for snapshot in series:
        for rank, element, score in snapshot.entries:
            rows["time"].append(snapshot.time_label)
            rows["rank"].append(rank)
            rows["element"].append(element)
            if series.has_scores:
                rows["score"].append(score)
    return pd.DataFrame(rows).to_csv(index=False, lineterminator="\n")


def write_ranking_csv(series: RankingSeries, stream: Union[IO[bytes], IO[str]]) -> None:
    text = ranking_csv_text(series)
    if isinstance(stream, (io.RawIOBase, io.BufferedIOBase)) or "b" in getattr(stream, "mode", ""):
        stream.write(text.encode("utf-8"))
    else:
        stream.write(text)


def truncate_top_n(series: RankingSeries, N: int) -> RankingSeries:
    """
    Keep the first N entries of every snapshot

    Raises:
        InsufficientDepth: naming the first snapshot with fewer than N entries
    """
    if N < 1:
        raise OutOfRange("N", N, 1, "inf")
    for snapshot in series:
        if snapshot.depth < N:
            raise InsufficientDepth(snapshot.time_label, snapshot.depth, N)
    if series.N == N:
        return series
    return RankingSeries([s.head(N) for s in series])


def element_at(series: RankingSeries, k: int, t: int) -> ElementId:
    """X(k, t): the element at rank k in snapshot t (0-based)"""
    if not 0 <= t < series.T:
        raise OutOfRange("t", t, 0, series.T - 1)
    snapshot = series.snapshots[t]
    if not 1 <= k <= snapshot.depth:
        raise OutOfRange("k", k, 1, snapshot.depth)
    return snapshot.elements[k - 1]


def select_snapshot(series: RankingSeries, selector: str) -> Tuple[int, Snapshot]:
    """
    Resolve `first`, `last`, an integer index (negative allowed) or an exact time label
    """
    text = str(selector).strip()
    if series.T == 0:
        raise SnapshotNotFound(text, 0)
    if text == "first":
        return 0, series.snapshots[0]
    if text == "last":
        return series.T - 1, series.snapshots[-1]
    if _INT_PATTERN.match(text):
        index = int(text)
        if -series.T <= index < series.T:
            index %= series.T
            return index, series.snapshots[index]
        raise SnapshotNotFound(text, series.T)
    for index, snapshot in enumerate(series):
        if snapshot.time_label == text:
            return index, snapshot
    raise SnapshotNotFound(text, series.T)


def snapshot_scores(snapshot: Snapshot) -> List[Tuple[int, float]]:
    """(rank, score) pairs of one snapshot"""
    if snapshot.scores is None:
        raise MissingScores(snapshot.time_label)
    return list(zip(range(1, snapshot.depth + 1), snapshot.scores))
