"""Grid-benchmark file formats: map files, scenario files, solver results.

Map files follow the MovingAI ``.map`` layout (``type octile`` header, then
one character per cell). Scenario files follow MovingAI ``.scen`` version 1
(tab-separated, nine fields per entry). Solver runtimes travel in a CSV with
header ``grid,scenario,num_agents,solver,runtime_min,solved``; one row per
(instance, solver) pair. All parsers are pure functions over byte buffers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ParseError, ValidationError

PASSABLE_CHARS = frozenset(".GS")
BLOCKED_CHARS = frozenset("@OTW")

# Candidate solvers, in canonical order. This order also breaks ties when two
# solvers report identical runtimes.
DEFAULT_PORTFOLIO = ("ICTS", "EPEA*", "SAT-MDD", "CBSH", "Lazy CBS")

# Runs are capped at five minutes; timeouts are recorded as exactly the cap.
RUNTIME_CAP_MIN = 5.0

RESULTS_HEADER = ("grid", "scenario", "num_agents", "solver", "runtime_min", "solved")


@dataclass(frozen=True)
class GridMap:
    """A 2D passability grid. ``raw_rows`` keeps the original characters so
    that serialization reproduces the parsed bytes exactly."""

    width: int
    height: int
    raw_rows: tuple[str, ...]
    name: str = ""
    cells: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        if len(self.raw_rows) != self.height or any(len(r) != self.width for r in self.raw_rows):
            raise ValidationError("raw_rows shape does not match declared width/height")
        cells = np.empty((self.height, self.width), dtype=bool)
        for y, row in enumerate(self.raw_rows):
            for x, ch in enumerate(row):
                if ch in PASSABLE_CHARS:
                    cells[y, x] = True
                elif ch in BLOCKED_CHARS:
                    cells[y, x] = False
                else:
                    raise ValidationError(f"unknown map character {ch!r} at row {y}, column {x}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_passable(cls, passable, name: str = "") -> "GridMap":
        """Build a grid from a boolean matrix (True = passable)."""
        arr = np.asarray(passable, dtype=bool)
        rows = tuple("".join("." if p else "@" for p in row) for row in arr)
        return cls(width=arr.shape[1], height=arr.shape[0], raw_rows=rows, name=name)

    @property
    def passable_count(self) -> int:
        return int(self.cells.sum())

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def is_passable(self, x: int, y: int) -> bool:
        return self.in_bounds(x, y) and bool(self.cells[y, x])

    def cell_id(self, x: int, y: int) -> int:
        """Row-major cell id over the full grid (blocked cells included)."""
        return y * self.width + x

    def cell_xy(self, cid: int) -> tuple[int, int]:
        return cid % self.width, cid // self.width


@dataclass(frozen=True)
class ScenarioEntry:
    bucket: int
    map_name: str
    map_width: int
    map_height: int
    start: tuple[int, int]
    goal: tuple[int, int]
    optimal_length: float


@dataclass(frozen=True)
class RuntimeRecord:
    grid_name: str
    scenario_name: str
    num_agents: int
    solver_runtimes: dict[str, tuple[float, bool]]

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.grid_name, self.scenario_name, self.num_agents)


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.replace("\r\n", "\n")


def parse_map(data: bytes | str, name: str = "") -> GridMap:
    """Parse a MovingAI map file. Unknown characters, bad headers, and shape
    mismatches raise :class:`ParseError` naming the offending line/column."""
    lines = _decode(data).split("\n")
    if len(lines) < 4:
        raise ParseError("map header truncated: expected 4 header lines")
    if lines[0] != "type octile":
        raise ParseError(f"expected 'type octile', got {lines[0]!r}", line=1)
    if not lines[1].startswith("height "):
        raise ParseError(f"expected 'height H', got {lines[1]!r}", line=2)
    if not lines[2].startswith("width "):
        raise ParseError(f"expected 'width W', got {lines[2]!r}", line=3)
    try:
        height = int(lines[1][len("height "):])
        width = int(lines[2][len("width "):])
    except ValueError as exc:
        raise ParseError(f"non-integer map dimension: {exc}", line=2) from exc
    if height < 1 or width < 1:
        raise ParseError(f"map dimensions must be positive, got {width}x{height}", line=2)
    if lines[3] != "map":
        raise ParseError(f"expected 'map', got {lines[3]!r}", line=4)

    body = lines[4:]
    # Tolerate trailing empty lines, nothing else.
    while body and body[-1] == "":
        body.pop()
    if len(body) != height:
        raise ParseError(f"expected {height} map rows, found {len(body)}", line=5 + len(body))
    rows = []
    for y, row in enumerate(body):
        if len(row) != width:
            raise ParseError(f"row has {len(row)} characters, expected {width}", line=5 + y)
        for x, ch in enumerate(row):
            if ch not in PASSABLE_CHARS and ch not in BLOCKED_CHARS:
                raise ParseError(f"unknown map character {ch!r}", line=5 + y, column=x + 1)
        rows.append(row)
    return GridMap(width=width, height=height, raw_rows=tuple(rows), name=name)


def serialize_map(grid: GridMap) -> bytes:
    header = f"type octile\nheight {grid.height}\nwidth {grid.width}\nmap\n"
    return (header + "\n".join(grid.raw_rows) + "\n").encode("utf-8")


def parse_scen(data: bytes | str, grid: GridMap) -> list[ScenarioEntry]:
    """Parse a MovingAI version-1 scenario file, validating every start/goal
    against ``grid`` (in bounds and passable)."""
    lines = _decode(data).split("\n")
    if not lines or lines[0].strip() != "version 1":
        raise ParseError("scenario file must begin with 'version 1'", line=1)
    entries = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if raw.strip() == "":
            continue
        fields = raw.split("\t")
        if len(fields) != 9:
            raise ParseError(f"expected 9 tab-separated fields, got {len(fields)}", line=lineno)
        try:
            bucket = int(fields[0])
            map_w, map_h = int(fields[2]), int(fields[3])
            sx, sy, gx, gy = (int(f) for f in fields[4:8])
            length = float(fields[8])
        except ValueError as exc:
            raise ParseError(f"non-numeric field: {exc}", line=lineno) from exc
        if bucket < 0:
            raise ParseError(f"negative bucket {bucket}", line=lineno)
        if length < 0:
            raise ParseError(f"negative optimal length {length}", line=lineno)
        for label, (x, y) in (("start", (sx, sy)), ("goal", (gx, gy))):
            if not grid.in_bounds(x, y):
                raise ParseError(f"{label} ({x},{y}) out of bounds for {grid.width}x{grid.height} map",
                                 line=lineno)
            if not grid.cells[y, x]:
                raise ParseError(f"{label} ({x},{y}) lies on a blocked cell", line=lineno)
        entries.append(ScenarioEntry(bucket=bucket, map_name=fields[1], map_width=map_w,
                                     map_height=map_h, start=(sx, sy), goal=(gx, gy),
                                     optimal_length=length))
    return entries


def serialize_scen(entries: list[ScenarioEntry]) -> bytes:
    out = ["version 1"]
    for e in entries:
        out.append("\t".join(str(v) for v in (
            e.bucket, e.map_name, e.map_width, e.map_height,
            e.start[0], e.start[1], e.goal[0], e.goal[1], repr(e.optimal_length))))
    return ("\n".join(out) + "\n").encode("utf-8")


def load_results(data: bytes | str, portfolio=DEFAULT_PORTFOLIO, strict: bool = True) -> list[RuntimeRecord]:
    """Group per-(instance, solver) CSV rows into :class:`RuntimeRecord`s.

    Unsolved rows carry the 5-minute cap regardless of the stated runtime;
    solved runtimes above the cap are clamped to it. With ``strict`` a record
    missing any portfolio solver is an error, otherwise the missing solvers
    are completed as unsolved.
    """
    portfolio = tuple(portfolio)
    reader = csv.reader(io.StringIO(_decode(data)))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("results CSV is empty") from None
    if tuple(header) != RESULTS_HEADER:
        raise ParseError(f"bad results header {header!r}, expected {list(RESULTS_HEADER)}", line=1)

    grouped: dict[tuple[str, str, int], dict[str, tuple[float, bool]]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 6:
            raise ParseError(f"expected 6 columns, got {len(row)}", line=lineno)
        grid_name, scen_name, agents_s, solver, runtime_s, solved_s = row
        try:
            num_agents = int(agents_s)
            runtime = float(runtime_s)
        except ValueError as exc:
            raise ParseError(f"non-numeric field: {exc}", line=lineno) from exc
        if num_agents < 1:
            raise ParseError(f"num_agents must be positive, got {num_agents}", line=lineno)
        if solver not in portfolio:
            raise ParseError(f"unknown solver {solver!r} (portfolio: {', '.join(portfolio)})", line=lineno)
        if runtime < 0:
            raise ParseError(f"negative runtime {runtime}", line=lineno)
        solved_norm = solved_s.strip().lower()
        if solved_norm not in ("true", "false"):
            raise ParseError(f"solved must be true/false, got {solved_s!r}", line=lineno)
        solved = solved_norm == "true"
        runtime = RUNTIME_CAP_MIN if not solved else min(runtime, RUNTIME_CAP_MIN)

        key = (grid_name, scen_name, num_agents)
        bucket = grouped.setdefault(key, {})
        if solver in bucket:
            raise ParseError(f"duplicate result row for {key} / {solver}", line=lineno)
        bucket[solver] = (runtime, solved)

    records = []
    for key, runs in grouped.items():
        missing = [s for s in portfolio if s not in runs]
        if missing and strict:
            raise DataError(f"instance {key} is missing results for: {', '.join(missing)}")
        for s in missing:
            runs[s] = (RUNTIME_CAP_MIN, False)
        records.append(RuntimeRecord(grid_name=key[0], scenario_name=key[1],
                                     num_agents=key[2], solver_runtimes=runs))
    return records


def serialize_results(records: list[RuntimeRecord], portfolio=DEFAULT_PORTFOLIO) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULTS_HEADER)
    for rec in records:
        for solver in portfolio:
            runtime, solved = rec.solver_runtimes[solver]
            writer.writerow([rec.grid_name, rec.scenario_name, rec.num_agents,
                             solver, repr(float(runtime)), "true" if solved else "false"])
    return buf.getvalue().encode("utf-8")
