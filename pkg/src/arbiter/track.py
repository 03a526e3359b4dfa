"""
Grid-mat track parsing and lane geometry.

A track is a grid of square mats. Each non-empty mat carries one lane whose
centerline is either a straight through the cell center or a quarter circle
of radius ``cell_size / 2`` around the inner cell corner. Lanes are stored as
a directed graph: nodes are ports (the boundary point where a vehicle enters
a cell with a given heading), edges are centerline polylines through a cell.

World frame: x grows with column (east), y grows upward (north), so row 0 is
the northernmost row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import NamedTuple

import numpy as np

ARC_SAMPLES = 32
DEFAULT_CELL_SIZE = 10.0


class TrackError(ValueError):
    """Base class for track parsing problems."""


class TrackSyntaxError(TrackError):
    def __init__(self, message: str, line: int, row: int | None = None, col: int | None = None):
        self.line = line
        self.row = row
        self.col = col
        where = f"line {line}"
        if row is not None:
            where = f"row {row}, col {col} ({where})"
        super().__init__(f"{message} at {where}")


class GeometryError(TrackError):
    def __init__(self, message: str, line: int, row: int, col: int):
        self.line = line
        self.row = row
        self.col = col
        super().__init__(f"{message} at row {row}, col {col} (line {line})")


class EmptyTrack(TrackError):
    pass


class NodeNotOnRoute(LookupError):
    pass


def normalize_angle(angle: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.remainder(angle, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


class Direction(IntEnum):
    N = 0
    E = 1
    S = 2
    W = 3

    @property
    def heading(self) -> float:
        return (math.pi / 2, 0.0, -math.pi / 2, math.pi)[self]

    @property
    def unit(self) -> tuple[float, float]:
        return ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))[self]

    @property
    def grid_step(self) -> tuple[int, int]:
        return ((-1, 0), (0, 1), (1, 0), (0, -1))[self]

    def left(self) -> Direction:
        return Direction((self - 1) % 4)

    def right(self) -> Direction:
        return Direction((self + 1) % 4)

    def opposite(self) -> Direction:
        return Direction((self + 2) % 4)


class CellKind(Enum):
    STRAIGHT = "Straight"
    CORNER = "Corner"
    CROSSING = "Crossing"
    EMPTY = "Empty"


class Maneuver(Enum):
    STRAIGHT = "Straight"
    LEFT = "Left"
    RIGHT = "Right"


@dataclass(frozen=True)
class MatCell:
    kind: CellKind
    orientation: Direction
    grid_pos: tuple[int, int]
    left_hand: bool = False  # corners only

    @property
    def code(self) -> str:
        if self.kind is CellKind.EMPTY:
            return "."
        if self.kind is CellKind.CROSSING:
            return "X"
        if self.kind is CellKind.STRAIGHT:
            return f"S{int(self.orientation)}"
        return f"{'L' if self.left_hand else 'R'}{int(self.orientation)}"

    def open_sides(self) -> frozenset[Direction]:
        """Sides (outward directions) through which the lane leaves the cell."""
        if self.kind is CellKind.EMPTY:
            return frozenset()
        if self.kind is CellKind.CROSSING:
            return frozenset(Direction)
        if self.kind is CellKind.STRAIGHT:
            return frozenset({self.orientation, self.orientation.opposite()})
        return frozenset({self.orientation.opposite(), self.corner_exit()})

    def corner_exit(self) -> Direction:
        return self.orientation.left() if self.left_hand else self.orientation.right()

    def traversals(self) -> list[tuple[Direction, Direction]]:
        """(entry heading, exit heading) pairs the lane supports."""
        if self.kind is CellKind.EMPTY:
            return []
        if self.kind is CellKind.STRAIGHT:
            return [(self.orientation, self.orientation), (self.orientation.opposite(),) * 2]
        if self.kind is CellKind.CORNER:
            out = self.corner_exit()
            return [(self.orientation, out), (out.opposite(), self.orientation.opposite())]
        return [(h, o) for h in Direction for o in (h.left(), h, h.right())]


class Port(NamedTuple):
    """Boundary point where a vehicle enters cell (row, col) travelling ``heading``."""

    row: int
    col: int
    heading: Direction

    def __str__(self) -> str:
        return f"({self.row},{self.col},{self.heading.name})"


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", normalize_angle(float(self.heading)))


@dataclass(frozen=True)
class LaneProjection:
    lateral_deviation: float
    heading_error: float
    arc_position: float
    centerline_point: tuple[float, float]
    edge_index: int | None = None  # position within a route, when projected against one


@dataclass(frozen=True, eq=False)
class Polyline:
    """Centerline polyline with per-vertex tangent headings.

    Headings at vertices are the analytic tangents of the sampled curve;
    between vertices they are interpolated linearly.
    """

    points: np.ndarray
    headings: np.ndarray
    cumulative: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise ValueError("polyline needs at least two (x, y) points")
        seg = np.hypot(*np.diff(pts, axis=0).T)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "headings", np.asarray(self.headings, dtype=float))
        object.__setattr__(self, "cumulative", np.concatenate(([0.0], np.cumsum(seg))))

    @property
    def length(self) -> float:
        return float(self.cumulative[-1])

    def _heading_between(self, i: int, t: float) -> float:
        h0 = float(self.headings[i])
        h1 = float(self.headings[i + 1])
        return normalize_angle(h0 + t * normalize_angle(h1 - h0))

    def point_at(self, s: float) -> tuple[float, float, float]:
        """Point and tangent heading at arc length ``s``; extrapolates past either end."""
        pts = self.points
        if s <= 0.0:
            h = float(self.headings[0])
            return pts[0, 0] + s * math.cos(h), pts[0, 1] + s * math.sin(h), h
        if s >= self.length:
            h = float(self.headings[-1])
            extra = s - self.length
            return pts[-1, 0] + extra * math.cos(h), pts[-1, 1] + extra * math.sin(h), h
        i = int(np.searchsorted(self.cumulative, s, side="right")) - 1
        i = min(i, len(pts) - 2)
        seg_len = self.cumulative[i + 1] - self.cumulative[i]
        t = (s - self.cumulative[i]) / seg_len if seg_len > 0 else 0.0
        p = pts[i] + t * (pts[i + 1] - pts[i])
        return float(p[0]), float(p[1]), self._heading_between(i, t)

    def project(self, x: float, y: float) -> tuple[float, float, float, tuple[float, float]]:
        """Nearest point on the polyline.

        Returns (arc position, signed lateral offset (left positive),
        tangent heading, nearest point).
        """
        a = self.points[:-1]
        d = self.points[1:] - a
        seg_sq = np.einsum("ij,ij->i", d, d)
        rel = np.array([x, y]) - a
        t = np.clip(np.einsum("ij,ij->i", rel, d) / np.where(seg_sq > 0, seg_sq, 1.0), 0.0, 1.0)
        near = a + t[:, None] * d
        dist_sq = np.sum((np.array([x, y]) - near) ** 2, axis=1)
        i = int(np.argmin(dist_sq))
        ti = float(t[i])
        q = near[i]
        dist = math.sqrt(float(dist_sq[i]))
        cross = d[i, 0] * (y - q[1]) - d[i, 1] * (x - q[0])
        lateral = dist if cross >= 0 else -dist
        s = float(self.cumulative[i] + ti * math.sqrt(float(seg_sq[i])))
        return s, lateral, self._heading_between(i, ti), (float(q[0]), float(q[1]))

    def slice(self, s0: float, s1: float) -> Polyline:
        """Sub-polyline covering [s0, s1] (clamped to the polyline)."""
        s0 = max(0.0, s0)
        s1 = min(self.length, s1)
        inner = [i for i, c in enumerate(self.cumulative) if s0 < c < s1]
        x0, y0, h0 = self.point_at(s0)
        x1, y1, h1 = self.point_at(s1)
        pts = [(x0, y0)] + [tuple(self.points[i]) for i in inner] + [(x1, y1)]
        hs = [h0] + [float(self.headings[i]) for i in inner] + [h1]
        return Polyline(np.array(pts), np.array(hs))


@dataclass(frozen=True)
class Edge:
    id: int
    src: Port
    dst: Port
    cell: tuple[int, int]
    kind: CellKind
    maneuver: Maneuver
    polyline: Polyline

    @property
    def length(self) -> float:
        return self.polyline.length


@dataclass(frozen=True, eq=False)
class Track:
    cells: tuple[tuple[MatCell, ...], ...]
    cell_size: float
    edges: tuple[Edge, ...]
    out_edges: dict[Port, tuple[int, ...]]

    @property
    def rows(self) -> int:
        return len(self.cells)

    @property
    def cols(self) -> int:
        return len(self.cells[0])

    def cell(self, row: int, col: int) -> MatCell | None:
        if 0 <= row < self.rows and 0 <= col < self.cols:
            return self.cells[row][col]
        return None

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return ((col + 0.5) * self.cell_size, -(row + 0.5) * self.cell_size)

    def port_position(self, port: Port) -> tuple[float, float]:
        cx, cy = self.cell_center(port.row, port.col)
        ux, uy = port.heading.unit
        half = self.cell_size / 2
        return cx - ux * half, cy - uy * half


def _edge_polyline(cx: float, cy: float, cell_size: float, h_in: Direction, h_out: Direction) -> tuple[Polyline, Maneuver]:
    half = cell_size / 2
    ix, iy = h_in.unit
    ox, oy = h_out.unit
    entry = (cx - ix * half, cy - iy * half)
    if h_in == h_out:
        exit_ = (cx + ox * half, cy + oy * half)
        return Polyline(np.array([entry, exit_]), np.array([h_in.heading] * 2)), Maneuver.STRAIGHT
    left = h_out == h_in.left()
    # arc center is the inner cell corner, one half-cell from the entry toward the exit side
    ax, ay = entry[0] + ox * half, entry[1] + oy * half
    theta0 = math.atan2(entry[1] - ay, entry[0] - ax)
    sweep = math.pi / 2 if left else -math.pi / 2
    theta = theta0 + sweep * np.arange(ARC_SAMPLES + 1) / ARC_SAMPLES
    pts = np.column_stack((ax + half * np.cos(theta), ay + half * np.sin(theta)))
    tangent = theta + (math.pi / 2 if left else -math.pi / 2)
    headings = np.array([normalize_angle(float(h)) for h in tangent])
    return Polyline(pts, headings), (Maneuver.LEFT if left else Maneuver.RIGHT)


def build_track(cells: list[list[MatCell]], cell_size: float) -> Track:
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    edges: list[Edge] = []
    out: dict[Port, list[int]] = {}
    for row in cells:
        for cell in row:
            r, c = cell.grid_pos
            cx, cy = (c + 0.5) * cell_size, -(r + 0.5) * cell_size
            for h_in, h_out in cell.traversals():
                poly, man = _edge_polyline(cx, cy, cell_size, h_in, h_out)
                dr, dc = h_out.grid_step
                e = Edge(len(edges), Port(r, c, h_in), Port(r + dr, c + dc, h_out), (r, c), cell.kind, man, poly)
                edges.append(e)
                out.setdefault(e.src, []).append(e.id)
    grid = tuple(tuple(row) for row in cells)
    return Track(grid, float(cell_size), tuple(edges), {k: tuple(v) for k, v in out.items()})


_CODES = {"S": CellKind.STRAIGHT, "L": CellKind.CORNER, "R": CellKind.CORNER}


def _parse_code(code: str, pos: tuple[int, int], line: int) -> MatCell:
    if code == ".":
        return MatCell(CellKind.EMPTY, Direction.N, pos)
    if code == "X":
        return MatCell(CellKind.CROSSING, Direction.N, pos)
    if len(code) == 2 and code[0] in _CODES and code[1] in "0123":
        return MatCell(_CODES[code[0]], Direction(int(code[1])), pos, left_hand=code[0] == "L")
    raise TrackSyntaxError(f"unknown cell code {code!r}", line, pos[0] + 1, pos[1] + 1)


def parse_track(text: str, strict: bool = False) -> Track:
    """Parse track-file text into a :class:`Track`.

    Rows and columns in diagnostics are 1-based grid positions; ``line`` is
    the 1-based line in the file. With ``strict`` a corner whose exit side
    faces an empty cell (or the grid border) is rejected.
    """
    cell_size = DEFAULT_CELL_SIZE
    rows: list[list[MatCell]] = []
    row_lines: list[int] = []
    seen_cells = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0].lower() == "cellsize":
            if seen_cells:
                raise TrackSyntaxError("cellsize header after grid rows", lineno)
            if len(tokens) != 2:
                raise TrackSyntaxError("cellsize expects one value", lineno)
            try:
                cell_size = float(tokens[1])
            except ValueError:
                raise TrackSyntaxError(f"bad cellsize {tokens[1]!r}", lineno) from None
            if not math.isfinite(cell_size) or cell_size <= 0:
                raise TrackSyntaxError("cellsize must be a positive number", lineno)
            continue
        seen_cells = True
        r = len(rows)
        rows.append([_parse_code(tok, (r, c), lineno) for c, tok in enumerate(tokens)])
        row_lines.append(lineno)
        if len(rows[-1]) != len(rows[0]):
            raise TrackSyntaxError(
                f"ragged row: {len(rows[-1])} cells, expected {len(rows[0])}", lineno, r + 1, len(rows[-1])
            )
    if not rows or all(cell.kind is CellKind.EMPTY for row in rows for cell in row):
        raise EmptyTrack("track has no road cells")

    if strict:
        for r, row in enumerate(rows):
            for cell in row:
                if cell.kind is not CellKind.CORNER:
                    continue
                for side in cell.open_sides():
                    dr, dc = side.grid_step
                    rr, cc = r + dr, cell.grid_pos[1] + dc
                    inside = 0 <= rr < len(rows) and 0 <= cc < len(row)
                    if not inside or rows[rr][cc].kind is CellKind.EMPTY:
                        raise GeometryError(
                            f"corner side {side.name} faces an empty cell", row_lines[r], r + 1, cell.grid_pos[1] + 1
                        )
    return build_track(rows, cell_size)


def serialize_track(track: Track) -> str:
    lines = [f"cellsize {track.cell_size!r}"]
    for row in track.cells:
        lines.append(" ".join(cell.code for cell in row))
    return "\n".join(lines) + "\n"


def project_to_lane(track: Track, edge_id: int, pose: Pose) -> LaneProjection:
    """Project a pose onto one lane-graph edge; arc position is along that edge."""
    poly = track.edges[edge_id].polyline
    s, lateral, tangent, point = poly.project(pose.x, pose.y)
    return LaneProjection(lateral, normalize_angle(pose.heading - tangent), s, point)


def arc_distance(track: Track, route: list[int] | tuple[int, ...], from_arc: float, to_node: Port) -> float:
    """Along-centerline distance from ``from_arc`` to the first later visit of ``to_node``.

    Arc positions are measured from the start of ``route[0]``.
    """
    offset = 0.0
    for eid in route:
        e = track.edges[eid]
        if e.src == to_node and offset >= from_arc:
            return offset - from_arc
        offset += e.length
        if e.dst == to_node and offset >= from_arc:
            return offset - from_arc
    raise NodeNotOnRoute(f"node {to_node} not ahead of arc {from_arc:.3f} on route")
