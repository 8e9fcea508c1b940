"""Science data products: geo-tagged records, cast profiles, depth summaries.

On disk a log is UTF-8 NDJSON, one record per line, stream-appendable. A
tabular CSV export with a fixed column order (timestamp, lat, lon, depth,
mode, then parameters alphabetically) is produced for spreadsheet work.
Run manifests are written with a write-then-rename so a crash never leaves
a truncated manifest behind.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

from .controller import ControllerMode

_CAST_MODES = {ControllerMode.DEPLOYING, ControllerMode.HOLDING,
               ControllerMode.RETRIEVING}


class DatalogError(ValueError):
    """Bad record ordering or malformed log content."""


@dataclass(frozen=True)
class SampleRecord:
    """One geo-tagged, depth-tagged multiparameter reading."""

    timestamp: float                 # s since simulation epoch
    lat: float
    lon: float
    depth: float                     # m, measured
    mode: ControllerMode
    values: dict[str, float]

    def __post_init__(self):
        if self.depth < 0:
            raise DatalogError(f"record depth must be >= 0, got {self.depth}")

    def to_json_obj(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "lat": self.lat,
            "lon": self.lon,
            "depth": self.depth,
            "mode": self.mode.value,
            "values": dict(sorted(self.values.items())),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SampleRecord":
        return cls(
            timestamp=obj["timestamp"], lat=obj["lat"], lon=obj["lon"],
            depth=obj["depth"], mode=ControllerMode(obj["mode"]),
            values=dict(obj["values"]))


class SampleLog:
    """Append-only record log, optionally mirrored to an NDJSON file."""

    def __init__(self, path: Path | None = None, flush_every: int = 32):
        self.records: list[SampleRecord] = []
        self._path = Path(path) if path is not None else None
        self._flush_every = max(1, flush_every)
        self._fh: io.TextIOWrapper | None = None
        self._pending = 0
        if self._path is not None:
            self._fh = open(self._path, "w", encoding="utf-8", newline="\n")

    def append(self, record: SampleRecord) -> None:
        if self.records and record.timestamp <= self.records[-1].timestamp:
            raise DatalogError(
                f"out-of-order record: {record.timestamp} after "
                f"{self.records[-1].timestamp}")
        self.records.append(record)
        if self._fh is not None:
            self._fh.write(encode_record(record))
            self._pending += 1
            if self._pending >= self._flush_every:
                self._fh.flush()
                self._pending = 0

    def close(self) -> None:
        if self._fh is not None:
            self._fh.flush()
            self._fh.close()
            self._fh = None

    def __len__(self) -> int:
        return len(self.records)


def encode_record(record: SampleRecord) -> str:
    return json.dumps(record.to_json_obj(), sort_keys=True,
                      separators=(",", ":")) + "\n"


def write_ndjson(records: list[SampleRecord], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(encode_record(record))


def read_ndjson(path: Path) -> list[SampleRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(SampleRecord.from_json_obj(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise DatalogError(f"{path}:{lineno}: bad record: {exc}") from exc
    return records


def csv_columns(records: list[SampleRecord]) -> list[str]:
    parameters = sorted({name for r in records for name in r.values})
    return ["timestamp", "lat", "lon", "depth", "mode"] + parameters


def write_csv(records: list[SampleRecord], path: Path) -> None:
    columns = csv_columns(records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in records:
            row = [repr(r.timestamp), repr(r.lat), repr(r.lon), repr(r.depth),
                   r.mode.value]
            row += [repr(r.values[c]) if c in r.values else ""
                    for c in columns[5:]]
            writer.writerow(row)


@dataclass(frozen=True)
class Profile:
    """One cast: ordered (depth, values) pairs from deploy through hold."""

    station: int
    records: tuple[SampleRecord, ...]

    @property
    def max_depth(self) -> float:
        return max((r.depth for r in self.records), default=0.0)


def assemble_profiles(records: list[SampleRecord]) -> list[Profile]:
    """Split a time-ordered log into casts.

    A cast opens when the controller enters DEPLOYING and collects records
    until the controller leaves the deployed-mode set (or the next cast
    opens). Underway / idle / fault records belong to no cast.
    """
    profiles: list[Profile] = []
    current: list[SampleRecord] = []
    in_cast = False
    previous_mode: ControllerMode | None = None

    def close():
        nonlocal current, in_cast
        if current:
            profiles.append(Profile(station=len(profiles), records=tuple(current)))
        current = []
        in_cast = False

    for record in records:
        entering_deploy = (record.mode is ControllerMode.DEPLOYING
                           and previous_mode is not ControllerMode.DEPLOYING)
        if entering_deploy and in_cast:
            close()
        if record.mode is ControllerMode.DEPLOYING:
            in_cast = True
        if in_cast and record.mode in _CAST_MODES:
            current.append(record)
        elif in_cast and record.mode not in _CAST_MODES:
            close()
        previous_mode = record.mode
    close()
    return profiles


def write_profiles_csv(profiles: list[Profile], path: Path) -> None:
    all_records = [r for p in profiles for r in p.records]
    columns = ["cast"] + csv_columns(all_records)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for p in profiles:
            for r in p.records:
                row = [p.station, repr(r.timestamp), repr(r.lat), repr(r.lon),
                       repr(r.depth), r.mode.value]
                row += [repr(r.values[c]) if c in r.values else ""
                        for c in columns[6:]]
                writer.writerow(row)


@dataclass(frozen=True)
class SummaryBin:
    depth_low: float
    depth_high: float
    count: int
    mean: float
    spread: float                    # population standard deviation


@dataclass(frozen=True)
class DepthSummary:
    parameter: str
    bins: tuple[SummaryBin, ...]
    constant_flagged: bool = False


def depth_normalized_summary(records: list[SampleRecord], parameter: str,
                             bin_width: float = 0.5) -> DepthSummary:
    """Min-max normalise one parameter over the dataset and bin by depth.

    A constant-valued parameter has no min-max scale; it is flagged and all
    bin means are reported as 0.5 by convention.
    """
    points = [(r.depth, r.values[parameter]) for r in records
              if parameter in r.values]
    if len(points) < 2:
        raise DatalogError(
            f"need >= 2 records carrying {parameter!r}, got {len(points)}")
    raw = [v for _, v in points]
    lo, hi = min(raw), max(raw)
    constant = (hi == lo)

    binned: dict[int, list[float]] = {}
    for depth, value in points:
        idx = int(depth // bin_width)
        norm = 0.5 if constant else (value - lo) / (hi - lo)
        binned.setdefault(idx, []).append(norm)

    bins = []
    for idx in sorted(binned):
        vals = binned[idx]
        mean = sum(vals) / len(vals)
        spread = math.sqrt(sum((v - mean) ** 2 for v in vals) / len(vals))
        bins.append(SummaryBin(
            depth_low=idx * bin_width, depth_high=(idx + 1) * bin_width,
            count=len(vals), mean=mean, spread=spread))
    return DepthSummary(parameter=parameter, bins=tuple(bins),
                        constant_flagged=constant)


def write_summary_csv(summary: DepthSummary, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["depth_low", "depth_high", "count",
                         "normalized_mean", "normalized_spread"])
        for b in summary.bins:
            writer.writerow([b.depth_low, b.depth_high, b.count,
                             repr(b.mean), repr(b.spread)])


def write_manifest(manifest: dict, path: Path) -> None:
    """Atomic manifest write: temp file in the same directory, then rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)
