"""Panel-data ingestion: per-segment daily counts, populations, proportions.

Files are UTF-8 comma-separated with a mandatory header row. Counts arrive as
``date,segment_id,count`` rows with ISO-8601 dates, populations as
``segment_id,population``. The observed proportion of a segment on a date is
``count / population``. Missing dates inside a segment's range are gaps by
default; ``fill_missing_dates`` turns them into explicit zeros (reporting
holidays are common in this kind of data).

``export_response_table`` joins the weekly closeness distances (the cells
comparing each week against the previous one) with an external predictor
table keyed by week identifier, optionally shifting the predictors by one or
two weeks, producing input for downstream regression tooling.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass

import numpy as np

from .evolution import EvolutionMatrices


@dataclass(frozen=True)
class CountRow:
    date: dt.date
    segment_id: str
    count: int


@dataclass(frozen=True)
class CountPanel:
    """Validated count observations, sorted by (segment_id, date)."""

    rows: tuple[CountRow, ...]

    @property
    def segments(self) -> list[str]:
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.segment_id, None)
        return list(seen)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class PopulationTable:
    """Segment id -> population size."""

    sizes: dict[str, int]

    def __getitem__(self, segment_id: str) -> int:
        return self.sizes[segment_id]

    def __contains__(self, segment_id: str) -> bool:
        return segment_id in self.sizes


@dataclass(frozen=True)
class ProportionSeries:
    """Per segment, the ordered (date, observed proportion) series."""

    by_segment: dict[str, tuple[tuple[dt.date, ...], np.ndarray]]

    def segments(self) -> list[str]:
        return list(self.by_segment)

    def series(self, segment_id: str) -> tuple[tuple[dt.date, ...], np.ndarray]:
        return self.by_segment[segment_id]


def _open_rows(source):
    if hasattr(source, "read"):
        return csv.reader(source)
    return csv.reader(io.StringIO(_read_text(source)))


def _read_text(path) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def load_counts(source) -> CountPanel:
    """Parse and validate a ``date,segment_id,count`` CSV (path or stream)."""
    reader = _open_rows(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["date", "segment_id", "count"]:
        raise ValueError(f"expected header 'date,segment_id,count', got {header}")
    rows: list[CountRow] = []
    seen: dict[tuple[dt.date, str], int] = {}
    for line_no, record in enumerate(reader, start=2):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if len(record) != 3:
            raise ValueError(f"line {line_no}: expected 3 fields, got {len(record)}")
        raw_date, segment_id, raw_count = (f.strip() for f in record)
        try:
            date = dt.date.fromisoformat(raw_date)
        except ValueError as exc:
            raise ValueError(f"line {line_no}: bad date {raw_date!r}: {exc}") from exc
        try:
            count = int(raw_count)
        except ValueError as exc:
            raise ValueError(f"line {line_no}: bad count {raw_count!r}") from exc
        if count < 0:
            raise ValueError(f"line {line_no}: negative count {count}")
        key = (date, segment_id)
        if key in seen:
            raise ValueError(
                f"duplicate (date, segment_id) = ({date}, {segment_id!r}) "
                f"on lines {seen[key]} and {line_no}"
            )
        seen[key] = line_no
        rows.append(CountRow(date, segment_id, count))
    rows.sort(key=lambda r: (r.segment_id, r.date))
    return CountPanel(tuple(rows))


def load_populations(source) -> PopulationTable:
    """Parse and validate a ``segment_id,population`` CSV (path or stream)."""
    reader = _open_rows(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["segment_id", "population"]:
        raise ValueError(f"expected header 'segment_id,population', got {header}")
    sizes: dict[str, int] = {}
    first_line: dict[str, int] = {}
    for line_no, record in enumerate(reader, start=2):
        if not record or (len(record) == 1 and not record[0].strip()):
            continue
        if len(record) != 2:
            raise ValueError(f"line {line_no}: expected 2 fields, got {len(record)}")
        segment_id, raw_pop = (f.strip() for f in record)
        try:
            population = int(raw_pop)
        except ValueError as exc:
            raise ValueError(f"line {line_no}: bad population {raw_pop!r}") from exc
        if population <= 0:
            raise ValueError(f"line {line_no}: population must be positive, got {population}")
        if segment_id in sizes:
            raise ValueError(
                f"duplicate segment_id {segment_id!r} on lines "
                f"{first_line[segment_id]} and {line_no}"
            )
        sizes[segment_id] = population
        first_line[segment_id] = line_no
    return PopulationTable(sizes)


def proportions(
    panel: CountPanel,
    populations: PopulationTable,
    fill_missing_dates: bool = False,
) -> ProportionSeries:
    """Observed proportions ``count / population`` per segment and date."""
    missing = [s for s in panel.segments if s not in populations]
    if missing:
        raise ValueError(f"segments missing from the population table: {missing}")
    by_segment: dict[str, tuple[tuple[dt.date, ...], np.ndarray]] = {}
    for segment_id in panel.segments:
        seg_rows = [r for r in panel.rows if r.segment_id == segment_id]
        size = populations[segment_id]
        values: dict[dt.date, float] = {}
        for row in seg_rows:
            if row.count > size:
                raise ValueError(
                    f"segment {segment_id!r} on {row.date}: count {row.count} "
                    f"exceeds population {size}"
                )
            values[row.date] = row.count / size
        dates = sorted(values)
        if fill_missing_dates and dates:
            day = dates[0]
            while day <= dates[-1]:
                values.setdefault(day, 0.0)
                day += dt.timedelta(days=1)
            dates = sorted(values)
        by_segment[segment_id] = (
            tuple(dates),
            np.array([values[d] for d in dates]),
        )
    return ProportionSeries(by_segment)


def consecutive_pair_responses(matrices: EvolutionMatrices) -> list[tuple[str, float, float]]:
    """The weekly response series: for each segment t >= 1, the aggregated
    chi-squared statistic and total variation distance of the (t, t-1) cell.
    """
    out = []
    for t in range(1, matrices.n_segments):
        out.append(
            (matrices.labels[t], float(matrices.z[t, t - 1]), float(matrices.d[t, t - 1]))
        )
    return out


def export_response_table(
    matrices: EvolutionMatrices,
    predictors: list[dict[str, str]],
    delay: int = 0,
    key: str = "week",
) -> tuple[list[dict[str, str]], list[str]]:
    """Join weekly closeness responses with a predictor table.

    ``predictors`` holds one dict per row, keyed by column name, with a
    ``key`` column carrying the week identifier. With ``delay`` = k, the
    response of week t is matched to the predictors of the week k positions
    earlier in the response ordering. Returns the joined rows and the list of
    response weeks that found no predictor row (reported, never silently
    dropped).
    """
    if delay not in (0, 1, 2):
        raise ValueError(f"delay must be 0, 1 or 2 weeks, got {delay}")
    for row in predictors:
        if key not in row:
            raise ValueError(f"predictor rows must carry a {key!r} column")
    predictor_by_week = {row[key]: row for row in predictors}
    predictor_columns = [c for c in predictors[0] if c != key] if predictors else []

    responses = consecutive_pair_responses(matrices)
    joined: list[dict[str, str]] = []
    unmatched: list[str] = []
    for t, (week, z_value, d_value) in enumerate(responses):
        source_index = t - delay
        source_week = responses[source_index][0] if source_index >= 0 else None
        if source_week is None or source_week not in predictor_by_week:
            unmatched.append(week)
            continue
        row = {"week": week, "Z": repr(z_value), "D": repr(d_value)}
        for column in predictor_columns:
            row[column] = predictor_by_week[source_week][column]
        joined.append(row)
    return joined, unmatched
