"""Input provisioning: synthetic moving-window frames and point-cloud files.

The synthetic stream drops uniform points on a square window that slides a
fixed distance per frame, which grows the mapped area linearly and makes
scaling runs reproducible from a single seed. File ingestion reads plain
whitespace tables and ASCII polygon-format files of world-frame points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .flat import InputPoint

# Normals further than this from unit length get renormalized (with a
# counter bump); anything closer passes through untouched.
_NORMAL_SLACK = 1e-3


class StreamFormatError(ValueError):
    """A point-cloud file or row set violates the expected format."""


@dataclass(frozen=True)
class SyntheticStreamConfig:
    """Moving uniform square window, defaults matching the benchmark setup."""

    square_size: float = 20.0
    translation_per_frame: float = 10.0
    points_per_frame: int = 4000
    direction: tuple[float, float] = (1.0, 0.0)
    z_value: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.square_size > 0.0:
            raise ValueError("square_size must be > 0")
        if self.translation_per_frame < 0.0:
            raise ValueError("translation_per_frame must be >= 0")
        if self.points_per_frame < 1:
            raise ValueError("points_per_frame must be >= 1")
        dx, dy = self.direction
        norm = math.sqrt(dx * dx + dy * dy)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("direction must be a unit 2-vector")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class Frame:
    """One frame of world-frame points, stored columnar.

    positions is (n, 3) float64; normals (n, 3) and traversability (n,)
    are present only when the source carried them. window_origin is set
    for synthetic frames (lower-left corner of the generating square).
    """

    positions: np.ndarray
    normals: np.ndarray | None = None
    traversability: np.ndarray | None = None
    frame_index: int = 0
    window_origin: tuple[float, float] | None = None
    renormalized_normals: int = 0

    def __len__(self) -> int:
        return self.positions.shape[0]

    def point(self, i: int) -> InputPoint:
        row = self.positions[i]
        normal = None
        if self.normals is not None:
            nr = self.normals[i]
            normal = (float(nr[0]), float(nr[1]), float(nr[2]))
        trav = None
        if self.traversability is not None:
            trav = int(self.traversability[i])
        return InputPoint(
            position=(float(row[0]), float(row[1]), float(row[2])),
            normal=normal,
            traversability=trav,
        )

    def iter_points(self):
        for i in range(len(self)):
            yield self.point(i)


def synthetic_frame(
    config: SyntheticStreamConfig,
    frame_index: int,
    rng: np.random.Generator | None = None,
) -> Frame:
    """Generate one synthetic frame, deterministic given (seed, frame_index)."""
    if frame_index < 0:
        raise ValueError("frame_index must be >= 0")
    if rng is None:
        rng = np.random.default_rng([config.seed, frame_index])
    shift = config.translation_per_frame * frame_index
    ox = config.direction[0] * shift
    oy = config.direction[1] * shift
    n = config.points_per_frame
    xy = rng.uniform(0.0, config.square_size, size=(n, 2))
    positions = np.empty((n, 3), dtype=np.float64)
    positions[:, 0] = xy[:, 0] + ox
    positions[:, 1] = xy[:, 1] + oy
    positions[:, 2] = config.z_value
    return Frame(positions=positions, frame_index=frame_index, window_origin=(ox, oy))


def sample_training_points(
    frame: Frame, count: int, rng: np.random.Generator
) -> list[InputPoint]:
    """Draw `count` points uniformly with replacement, order preserved."""
    n = len(frame)
    if n == 0:
        raise ValueError("cannot sample from an empty frame")
    indices = rng.integers(0, n, size=count)
    return [frame.point(int(i)) for i in indices]


def _finish_normals(
    normals: np.ndarray, line_numbers: list[int] | None
) -> tuple[np.ndarray, int]:
    """Validate row norms, renormalizing stray rows; returns the fix count."""
    norms = np.sqrt((normals * normals).sum(axis=1))
    degenerate = norms < 1e-12
    if degenerate.any():
        row = int(np.argmax(degenerate))
        where = f"line {line_numbers[row]}" if line_numbers else f"row {row}"
        raise StreamFormatError(f"zero-length normal at {where}")
    off = np.abs(norms - 1.0) > _NORMAL_SLACK
    count = int(off.sum())
    if count:
        normals = normals.copy()
        normals[off] /= norms[off, None]
    return normals, count


def frame_from_columns(
    rows: np.ndarray, frame_index: int = 0, line_numbers: list[int] | None = None
) -> Frame:
    """Build a Frame from an (n, k) float array with k in {3, 6, 7}.

    Columns: x y z [nx ny nz [traversability in {0, 1}]]. Normals off unit
    length by more than 1e-3 are renormalized and counted.
    """
    k = rows.shape[1] if rows.ndim == 2 else -1
    if k not in (3, 6, 7):
        raise StreamFormatError(f"rows must have 3, 6, or 7 columns, got {k}")
    positions = np.ascontiguousarray(rows[:, :3], dtype=np.float64)
    normals = None
    trav = None
    fixed = 0
    if k >= 6:
        normals, fixed = _finish_normals(
            np.ascontiguousarray(rows[:, 3:6], dtype=np.float64), line_numbers
        )
    if k == 7:
        raw = rows[:, 6]
        bad = ~np.isin(raw, (0.0, 1.0))
        if bad.any():
            row = int(np.argmax(bad))
            where = f"line {line_numbers[row]}" if line_numbers else f"row {row}"
            raise StreamFormatError(
                f"traversability must be 0 or 1, got {raw[row]} at {where}"
            )
        trav = raw.astype(np.int8)
    return Frame(
        positions=positions,
        normals=normals,
        traversability=trav,
        frame_index=frame_index,
        renormalized_normals=fixed,
    )


def _parse_float_row(parts: list[str], path: Path, line_number: int) -> list[float]:
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise StreamFormatError(f"{path}: line {line_number}: {exc}") from None


def _load_text(path: Path, lines: list[str], frame_index: int) -> Frame:
    rows: list[list[float]] = []
    numbers: list[int] = []
    arity: int | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if arity is None:
            if len(parts) not in (3, 6, 7):
                raise StreamFormatError(
                    f"{path}: line {lineno}: expected 3, 6, or 7 columns, "
                    f"got {len(parts)}"
                )
            arity = len(parts)
        elif len(parts) != arity:
            raise StreamFormatError(
                f"{path}: line {lineno}: expected {arity} columns, got {len(parts)}"
            )
        rows.append(_parse_float_row(parts, path, lineno))
        numbers.append(lineno)
    if not rows:
        raise StreamFormatError(f"{path}: no data rows")
    try:
        return frame_from_columns(
            np.asarray(rows, dtype=np.float64), frame_index, numbers
        )
    except StreamFormatError as exc:
        raise StreamFormatError(f"{path}: {exc}") from None


def _load_ply(path: Path, lines: list[str], frame_index: int) -> Frame:
    # Header: magic line, format declaration, element/property schema.
    if not lines or lines[0].strip() != "ply":
        raise StreamFormatError(f"{path}: line 1: not a polygon-format file")
    elements: list[tuple[str, int, list[str]]] = []
    header_end = None
    for lineno, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if len(parts) < 2 or parts[1] != "ascii":
                raise StreamFormatError(
                    f"{path}: line {lineno}: only ascii format is supported"
                )
        elif parts[0] == "element":
            if len(parts) != 3:
                raise StreamFormatError(f"{path}: line {lineno}: bad element line")
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise StreamFormatError(
                    f"{path}: line {lineno}: property before any element"
                )
            # A list property consumes the whole row downstream; record the
            # marker so vertex parsing can reject it.
            elements[-1][2].append(parts[-1] if parts[1] != "list" else "!list")
        elif parts[0] == "end_header":
            header_end = lineno
            break
        else:
            raise StreamFormatError(
                f"{path}: line {lineno}: unknown header keyword {parts[0]!r}"
            )
    if header_end is None:
        raise StreamFormatError(f"{path}: header never ends")

    vertex_schema = next((e for e in elements if e[0] == "vertex"), None)
    if vertex_schema is None:
        raise StreamFormatError(f"{path}: no vertex element")
    props = vertex_schema[2]
    if "!list" in props:
        raise StreamFormatError(f"{path}: list properties on vertices not supported")
    for needed in ("x", "y", "z"):
        if needed not in props:
            raise StreamFormatError(f"{path}: vertex element lacks property {needed}")
    has_normals = all(p in props for p in ("nx", "ny", "nz"))
    columns = [props.index("x"), props.index("y"), props.index("z")]
    if has_normals:
        columns += [props.index("nx"), props.index("ny"), props.index("nz")]

    rows: list[list[float]] = []
    numbers: list[int] = []
    cursor = header_end  # 0-based index into lines of the next data row
    for name, count, props_of in elements:
        for _ in range(count):
            if cursor >= len(lines):
                raise StreamFormatError(
                    f"{path}: line {len(lines)}: file ends inside element {name!r}"
                )
            lineno = cursor + 1
            parts = lines[cursor].split()
            cursor += 1
            if name != "vertex":
                continue
            if len(parts) != len(props_of):
                raise StreamFormatError(
                    f"{path}: line {lineno}: expected {len(props_of)} values, "
                    f"got {len(parts)}"
                )
            values = _parse_float_row(parts, path, lineno)
            rows.append([values[c] for c in columns])
            numbers.append(lineno)
    if not rows:
        raise StreamFormatError(f"{path}: vertex element is empty")
    try:
        return frame_from_columns(
            np.asarray(rows, dtype=np.float64), frame_index, numbers
        )
    except StreamFormatError as exc:
        raise StreamFormatError(f"{path}: {exc}") from None


def load_frame_file(path: str | Path, frame_index: int = 0) -> Frame:
    """Load one frame from a text or ASCII polygon-format file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StreamFormatError(f"{path}: {exc}") from None
    lines = text.splitlines()
    first = lines[0].strip() if lines else ""
    if first == "ply":
        return _load_ply(path, lines, frame_index)
    return _load_text(path, lines, frame_index)


def save_frame_file(frame: Frame, path: str | Path) -> None:
    """Write a frame in the whitespace text format (exact float round-trip)."""
    path = Path(path)
    if frame.traversability is not None and frame.normals is None:
        raise ValueError(
            "the text format cannot hold traversability without normals"
        )
    with path.open("w") as fh:
        for i in range(len(frame)):
            row = frame.positions[i]
            fields = [repr(float(row[0])), repr(float(row[1])), repr(float(row[2]))]
            if frame.normals is not None:
                nr = frame.normals[i]
                fields += [repr(float(nr[0])), repr(float(nr[1])), repr(float(nr[2]))]
            if frame.traversability is not None:
                fields.append(str(int(frame.traversability[i])))
            fh.write(" ".join(fields) + "\n")
