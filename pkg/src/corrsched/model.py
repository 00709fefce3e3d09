"""Core domain types, validation, and file formats.

All types freeze their arrays after construction, so instances are safe to
share across threads without synchronization.

File formats
------------
* joint activation matrix: JSON ``{"dim": N, "entries": [[...]]}`` or CSV
  (N rows of N comma-separated values, diagonal included)
* assignment: CSV with header ``device,channel``, one row per device
* schedule matrix (soft): JSON ``{"rows": N, "cols": L, "entries": [[...]]}``

Probabilities are written with 17 significant digits, which round-trips
IEEE doubles losslessly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

#: absolute tolerance for schedule row sums (rows are probability vectors)
ROW_SUM_TOL = 1e-9

_FLOAT_FMT = "%.17g"


class ShapeError(ValueError):
    """An input array has the wrong shape."""


class ParseError(ValueError):
    """A document does not conform to its schema."""


class ValidationError(ValueError):
    """A value-level invariant is violated."""


def _fmt(x: float) -> str:
    return _FLOAT_FMT % float(x)


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Violation:
    """One violated invariant, naming the rule and the offending indices."""

    rule: str
    indices: tuple
    message: str

    def __str__(self) -> str:
        where = ",".join(str(i) for i in self.indices)
        return f"{self.rule} at ({where}): {self.message}"


@dataclass(frozen=True)
class NetworkConfig:
    """Network size: N devices sharing L orthogonal channels.

    L >= N is accepted (the optimum is then trivially 0); ``bench`` warns
    about it since the interesting regime is L < N.
    """

    n_devices: int
    n_channels: int

    def __post_init__(self):
        if self.n_devices < 1:
            raise ValidationError("n_devices must be >= 1")
        if self.n_channels < 1:
            raise ValidationError("n_channels must be >= 1")


@dataclass(frozen=True)
class JointActivationMatrix:
    """Symmetric N x N matrix of pairwise joint activation probabilities.

    The diagonal stores each device's marginal activation probability; it
    is informational only and every objective computation ignores it.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def off_diagonal(self) -> np.ndarray:
        """Copy of the entries with the diagonal zeroed (writable)."""
        out = self.entries.copy()
        np.fill_diagonal(out, 0.0)
        return out


@dataclass(frozen=True)
class ScheduleMatrix:
    """N x L matrix of channel-selection probabilities (soft schedule)."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2:
            raise ShapeError(f"expected a 2-D matrix, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class Assignment:
    """Hard schedule: one channel index per device (0-based)."""

    channel_of: np.ndarray

    def __post_init__(self):
        arr = np.array(self.channel_of, dtype=np.int64)
        if arr.ndim != 1:
            raise ShapeError(f"expected a 1-D index vector, got shape {arr.shape}")
        if arr.size and arr.min() < 0:
            raise ValidationError("channel indices must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "channel_of", arr)

    @property
    def n_devices(self) -> int:
        return self.channel_of.shape[0]


@dataclass(frozen=True)
class CollisionReport:
    """Per-channel collision probabilities, their average, and the bound."""

    per_channel: np.ndarray
    network_average: float
    pairwise_bound: float

    def __post_init__(self):
        object.__setattr__(self, "per_channel", _frozen(self.per_channel, float))

    def to_dict(self) -> dict:
        return {
            "per_channel": [float(p) for p in self.per_channel],
            "network_average": float(self.network_average),
            "pairwise_bound": float(self.pairwise_bound),
        }


# ---------------------------------------------------------------------------
# validation


def validate_matrix(a) -> list[Violation]:
    """Check the JointActivationMatrix invariants.

    Returns one Violation per broken rule: ``symmetry`` per unordered pair,
    ``range`` per entry outside [0,1] (or non-finite), and ``consistency``
    per pair whose joint probability exceeds a marginal.  An empty list
    means the matrix satisfies every invariant.
    """
    if isinstance(a, JointActivationMatrix):
        arr = a.entries
    else:
        arr = np.asarray(a, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"expected a square matrix, got shape {arr.shape}")
    n = arr.shape[0]
    out: list[Violation] = []
    for i in range(n):
        for j in range(n):
            v = float(arr[i, j])
            if not (0.0 <= v <= 1.0) or not math.isfinite(v):
                out.append(
                    Violation("range", (i, j), f"entry {v!r} is not a probability in [0, 1]")
                )
    for i in range(n):
        for j in range(i + 1, n):
            if arr[i, j] != arr[j, i]:
                out.append(
                    Violation(
                        "symmetry",
                        (i, j),
                        f"entries {float(arr[i, j])!r} and {float(arr[j, i])!r} differ",
                    )
                )
    for i in range(n):
        for j in range(i + 1, n):
            cap = min(float(arr[i, i]), float(arr[j, j]))
            if arr[i, j] > cap:
                out.append(
                    Violation(
                        "consistency",
                        (i, j),
                        f"joint probability {float(arr[i, j])!r} exceeds marginal {cap!r}",
                    )
                )
    return out


def validate_schedule(e) -> list[Violation]:
    """Check ScheduleMatrix invariants: entries in [0,1], rows sum to 1."""
    arr = e.entries if isinstance(e, ScheduleMatrix) else np.asarray(e, dtype=float)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {arr.shape}")
    out: list[Violation] = []
    n, l = arr.shape
    for i in range(n):
        for j in range(l):
            v = arr[i, j]
            if not (0.0 <= v <= 1.0) or not math.isfinite(v):
                out.append(
                    Violation("range", (i, j), f"entry {v!r} is not a probability in [0, 1]")
                )
    sums = arr.sum(axis=1)
    for i in range(n):
        if not math.isfinite(sums[i]) or abs(sums[i] - 1.0) > ROW_SUM_TOL:
            out.append(
                Violation("row_sum", (i,), f"row sums to {sums[i]!r}, expected 1 +- {ROW_SUM_TOL}")
            )
    return out


# ---------------------------------------------------------------------------
# hard/soft bridge


def assignment_to_schedule(a: Assignment, l: int) -> ScheduleMatrix:
    """Binary schedule with a single 1 in row i at column channel_of[i]."""
    ch = a.channel_of
    if ch.size and ch.max() >= l:
        dev = int(np.argmax(ch >= l))
        raise ValidationError(
            f"device {dev} uses channel {int(ch[dev])}, but only {l} channels exist"
        )
    out = np.zeros((a.n_devices, l), dtype=float)
    out[np.arange(a.n_devices), ch] = 1.0
    return ScheduleMatrix(out)


def schedule_to_assignment(e: ScheduleMatrix) -> Assignment:
    """Inverse of assignment_to_schedule; requires exactly binary rows."""
    if not is_hard(e):
        raise ValidationError("schedule is not hard: rows must be exactly one-hot")
    return Assignment(np.argmax(e.entries, axis=1))


def is_hard(e: ScheduleMatrix) -> bool:
    """True iff every row is exactly one-hot (entries exactly 0.0 or 1.0)."""
    arr = e.entries
    binary = (arr == 0.0) | (arr == 1.0)
    return bool(binary.all() and (arr.sum(axis=1) == 1.0).all())


# ---------------------------------------------------------------------------
# file I/O


def _require_finite_probabilities(arr: np.ndarray, what: str):
    bad = ~np.isfinite(arr)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise ValidationError(f"{what} entry [{i}][{j}] is not finite")
    bad = (arr < 0.0) | (arr > 1.0)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise ValidationError(f"{what} entry [{i}][{j}] = {arr[i, j]!r} is outside [0, 1]")


def matrix_to_json(m: JointActivationMatrix) -> str:
    rows = ",\n    ".join(
        "[" + ", ".join(_fmt(v) for v in row) + "]" for row in m.entries
    )
    return '{\n  "dim": %d,\n  "entries": [\n    %s\n  ]\n}\n' % (m.dim, rows)


def matrix_to_csv(m: JointActivationMatrix) -> str:
    return "".join(",".join(_fmt(v) for v in row) + "\n" for row in m.entries)


def save_matrix(m: JointActivationMatrix, path) -> None:
    path = Path(path)
    text = matrix_to_csv(m) if path.suffix.lower() == ".csv" else matrix_to_json(m)
    path.write_text(text)


def matrix_from_json(text: str) -> JointActivationMatrix:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object with fields 'dim' and 'entries'")
    for field in ("dim", "entries"):
        if field not in doc:
            raise ParseError(f"missing field {field!r}")
    dim = doc["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"field 'dim' must be a positive integer, got {dim!r}")
    entries = doc["entries"]
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field 'entries' is not a numeric matrix: {exc}") from exc
    if arr.shape != (dim, dim):
        raise ParseError(f"field 'entries' has shape {arr.shape}, expected ({dim}, {dim})")
    _require_finite_probabilities(arr, "matrix")
    return JointActivationMatrix(arr)


def matrix_from_csv(text: str) -> JointActivationMatrix:
    rows = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    for lineno, line in enumerate(lines, start=1):
        cells = line.split(",")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        if len(rows[-1]) != len(lines):
            raise ParseError(
                f"line {lineno}: expected {len(lines)} values, got {len(rows[-1])}"
            )
    if not rows:
        raise ParseError("empty matrix document")
    arr = np.array(rows, dtype=float)
    _require_finite_probabilities(arr, "matrix")
    return JointActivationMatrix(arr)


def load_matrix(path) -> JointActivationMatrix:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return matrix_from_csv(text)
    return matrix_from_json(text)


def schedule_to_json(e: ScheduleMatrix) -> str:
    rows = ",\n    ".join(
        "[" + ", ".join(_fmt(v) for v in row) + "]" for row in e.entries
    )
    return '{\n  "rows": %d,\n  "cols": %d,\n  "entries": [\n    %s\n  ]\n}\n' % (
        e.rows,
        e.cols,
        rows,
    )


def save_schedule(e: ScheduleMatrix, path) -> None:
    Path(path).write_text(schedule_to_json(e))


def schedule_from_json(text: str) -> ScheduleMatrix:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object with fields 'rows', 'cols', 'entries'")
    for field in ("rows", "cols", "entries"):
        if field not in doc:
            raise ParseError(f"missing field {field!r}")
    try:
        arr = np.array(doc["entries"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field 'entries' is not a numeric matrix: {exc}") from exc
    if arr.shape != (doc["rows"], doc["cols"]):
        raise ParseError(
            f"field 'entries' has shape {arr.shape}, expected ({doc['rows']}, {doc['cols']})"
        )
    _require_finite_probabilities(arr, "schedule")
    return ScheduleMatrix(arr)


def load_schedule(path) -> ScheduleMatrix:
    return schedule_from_json(Path(path).read_text())


def assignment_to_csv(a: Assignment) -> str:
    lines = ["device,channel"]
    lines += [f"{i},{int(c)}" for i, c in enumerate(a.channel_of)]
    return "\n".join(lines) + "\n"


def save_assignment(a: Assignment, path) -> None:
    Path(path).write_text(assignment_to_csv(a))


def assignment_from_csv(text: str) -> Assignment:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty assignment document")
    if lines[0].replace(" ", "") != "device,channel":
        raise ParseError("line 1: expected header 'device,channel'")
    pairs = {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 2:
            raise ParseError(f"line {lineno}: expected 'device,channel'")
        try:
            dev, ch = int(cells[0]), int(cells[1])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        if dev in pairs:
            raise ParseError(f"line {lineno}: duplicate device {dev}")
        if ch < 0:
            raise ParseError(f"line {lineno}: negative channel {ch}")
        pairs[dev] = ch
    n = len(pairs)
    if set(pairs) != set(range(n)):
        raise ParseError(f"devices must be exactly 0..{n - 1}")
    return Assignment(np.array([pairs[i] for i in range(n)], dtype=np.int64))


def load_assignment(path) -> Assignment:
    return assignment_from_csv(Path(path).read_text())
