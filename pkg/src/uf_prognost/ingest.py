"""Parse and validate raw UF sensor logs.

Input is delimiter-separated text with a header row. Timestamps are either
epoch seconds or RFC-3339 strings; the flavour is detected once per file from
the first non-empty timestamp cell. Columns not bound by the mapping are
carried along as opaque ``extras`` and never feed any computation.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Iterator

import numpy as np

from .config import REQUIRED_CHANNELS, ColumnMapping, ConfigError, DataError

log = logging.getLogger(__name__)

NUMERIC_CHANNELS = REQUIRED_CHANNELS[1:]


@dataclass(frozen=True)
class SensorRecord:
    timestamp: float
    feed_pressure: float
    filtrate_pressure: float
    filtrate_flow: float
    temperature: float
    backwash_flow: float
    extras: dict[str, str | None] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SensorSeries:
    """Column-oriented store of time-ordered sensor records.

    Records are held as parallel float arrays rather than a list of
    :class:`SensorRecord` objects; ``series[i]`` materialises one record and
    ``series[a:b]`` returns a sub-series sharing the underlying arrays.
    """

    timestamp: np.ndarray
    feed_pressure: np.ndarray
    filtrate_pressure: np.ndarray
    filtrate_flow: np.ndarray
    temperature: np.ndarray
    backwash_flow: np.ndarray
    extras: dict[str, np.ndarray] = field(default_factory=dict)
    source_id: str = ""
    sampling_hint: float = 0.0
    dropped_rows: int = 0

    def __len__(self) -> int:
        return len(self.timestamp)

    def __getitem__(self, key):
        if isinstance(key, slice):
            return SensorSeries(
                **{ch: getattr(self, ch)[key] for ch in REQUIRED_CHANNELS},
                extras={k: v[key] for k, v in self.extras.items()},
                source_id=self.source_id,
                sampling_hint=self.sampling_hint,
                dropped_rows=self.dropped_rows,
            )
        i = int(key)
        return SensorRecord(
            **{ch: float(getattr(self, ch)[i]) for ch in REQUIRED_CHANNELS},
            extras={k: v[i] for k, v in self.extras.items()},
        )

    def __iter__(self) -> Iterator[SensorRecord]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SensorSeries):
            return NotImplemented
        if len(self) != len(other) or self.extras.keys() != other.extras.keys():
            return False
        same = all(
            np.array_equal(getattr(self, ch), getattr(other, ch))
            for ch in REQUIRED_CHANNELS
        )
        return same and all(
            np.array_equal(self.extras[k], other.extras[k]) for k in self.extras
        )

    @property
    def records(self) -> list[SensorRecord]:
        return list(self)

    @classmethod
    def from_records(cls, records, source_id: str = "") -> "SensorSeries":
        records = list(records)
        cols = {
            ch: np.array([getattr(r, ch) for r in records], dtype=float)
            for ch in REQUIRED_CHANNELS
        }
        names = sorted({k for r in records for k in r.extras})
        extras = {
            k: np.array([r.extras.get(k) for r in records], dtype=object) for k in names
        }
        return cls(**cols, extras=extras, source_id=source_id)


def _parse_float(text: str) -> float | None:
    try:
        v = float(text)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def _parse_rfc3339(text: str) -> float | None:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        return None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def parse_sensor_csv(
    stream: IO[bytes] | IO[str] | bytes | str,
    mapping: ColumnMapping | None = None,
    *,
    delimiter: str = ",",
    source_id: str = "",
) -> SensorSeries:
    """Parse a delimited sensor log into a :class:`SensorSeries`.

    Rows whose required fields are missing, non-numeric or non-finite are
    dropped and counted in ``dropped_rows``. The returned series is *not*
    yet sorted; pass it through :func:`validate_series`.

    Raises ``ConfigError`` for unmapped or absent required columns and
    ``DataError`` when no valid row survives.
    """
    mapping = mapping or ColumnMapping()
    cols = mapping.require()

    if isinstance(stream, bytes):
        stream = stream.decode("utf-8")
    if isinstance(stream, str):
        text = io.StringIO(stream)
    elif isinstance(stream, io.TextIOBase):
        text = stream
    else:
        text = io.TextIOWrapper(stream, encoding="utf-8", newline="")

    reader = csv.reader(text, delimiter=delimiter)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{source_id or 'input'}: empty input (no header row)") from None
    pos = {name: i for i, name in enumerate(header)}
    for channel, col in cols.items():
        if col not in pos:
            raise ConfigError(f"{channel}: column {col!r} not found in header")
    bound = set(cols.values())
    extra_names = [h for h in header if h not in bound and h]

    time_parser = None
    values: dict[str, list[float]] = {ch: [] for ch in REQUIRED_CHANNELS}
    extras: dict[str, list[str | None]] = {k: [] for k in extra_names}
    dropped = 0
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))
        ts_text = row[pos[cols["timestamp"]]].strip()
        if time_parser is None and ts_text:
            time_parser = _parse_float if _parse_float(ts_text) is not None else _parse_rfc3339
        parsed = {"timestamp": time_parser(ts_text) if time_parser and ts_text else None}
        for ch in NUMERIC_CHANNELS:
            parsed[ch] = _parse_float(row[pos[cols[ch]]])
        if any(v is None for v in parsed.values()):
            dropped += 1
            continue
        for ch, v in parsed.items():
            values[ch].append(v)
        for k in extra_names:
            cell = row[pos[k]].strip()
            extras[k].append(cell if cell else None)

    if not values["timestamp"]:
        raise DataError(f"{source_id or 'input'}: empty input (no valid rows, {dropped} dropped)")
    if dropped:
        log.warning("%s: dropped %d rows with unparseable required fields", source_id or "input", dropped)
    return SensorSeries(
        **{ch: np.asarray(v, dtype=float) for ch, v in values.items()},
        extras={k: np.array(v, dtype=object) for k, v in extras.items()},
        source_id=source_id,
        dropped_rows=dropped,
    )


def validate_series(series: SensorSeries) -> SensorSeries:
    """Sort by time, collapse duplicate timestamps (last wins), set sampling_hint."""
    ts = series.timestamp
    order = np.argsort(ts, kind="stable")
    sorted_ts = ts[order]
    # among equal timestamps the stable sort keeps input order; keep the final one
    keep = np.ones(len(order), dtype=bool)
    keep[:-1] = sorted_ts[1:] != sorted_ts[:-1]
    idx = order[keep]
    cols = {ch: getattr(series, ch)[idx] for ch in REQUIRED_CHANNELS}
    gaps = np.diff(cols["timestamp"])
    hint = float(np.median(gaps)) if len(gaps) else 0.0
    return SensorSeries(
        **cols,
        extras={k: v[idx] for k, v in series.extras.items()},
        source_id=series.source_id,
        sampling_hint=hint,
        dropped_rows=series.dropped_rows,
    )


def read_series(path, mapping: ColumnMapping | None = None, delimiter: str = ",") -> SensorSeries:
    with open(path, "rb") as fh:
        series = parse_sensor_csv(fh, mapping, delimiter=delimiter, source_id=str(path))
    return validate_series(series)


def write_series_csv(series: SensorSeries, out: IO[str], mapping: ColumnMapping | None = None) -> None:
    """Write a series in the format :func:`parse_sensor_csv` reads back."""
    cols = (mapping or ColumnMapping()).require()
    writer = csv.writer(out, lineterminator="\n")
    extra_names = list(series.extras)
    writer.writerow([cols[ch] for ch in REQUIRED_CHANNELS] + extra_names)
    arrays = [getattr(series, ch) for ch in REQUIRED_CHANNELS]
    for i in range(len(series)):
        row = [repr(float(a[i])) for a in arrays]
        row += ["" if series.extras[k][i] is None else series.extras[k][i] for k in extra_names]
        writer.writerow(row)
