"""Route planning over the lane graph and live progress along a route."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .track import CellKind, Edge, LaneProjection, Maneuver, Polyline, Pose, Port, Track, normalize_angle


class PlanningError(RuntimeError):
    pass


class NoPathExists(PlanningError):
    pass


class StartOffTrack(PlanningError):
    pass


class GoalOffTrack(PlanningError):
    pass


class RouteDeparture(RuntimeError):
    """The vehicle can no longer be matched to the planned route."""


class InstructionKind(Enum):
    TURN_LEFT = "TurnLeft"
    TURN_RIGHT = "TurnRight"
    CROSS_CROSSING = "CrossCrossing"
    STOP = "Stop"


class CrossingExit(Enum):
    STRAIGHT = "Straight"
    LEFT = "Left"
    RIGHT = "Right"


@dataclass(frozen=True)
class DrivingInstruction:
    kind: InstructionKind
    anchor: Port | None  # None for Stop, which sits at the goal projection
    exit: Port | None
    anchor_arc: float
    exit_arc: float
    crossing_exit: CrossingExit | None = None


@dataclass(frozen=True, eq=False)
class Route:
    edges: tuple[int, ...]
    instructions: tuple[DrivingInstruction, ...]
    total_length: float
    start_arc: float
    goal_arc: float
    edge_offsets: tuple[float, ...]  # arc position where each edge begins; one extra entry for the end
    centerline: Polyline
    goal: tuple[float, float]


@dataclass(frozen=True)
class RouteProgress:
    arc_position: float
    next_instruction_index: int
    distance_to_next: float
    in_maneuver: bool


def _instruction_for(edge: Edge) -> tuple[InstructionKind, CrossingExit | None] | None:
    if edge.kind is CellKind.CROSSING:
        return InstructionKind.CROSS_CROSSING, CrossingExit(edge.maneuver.value)
    if edge.maneuver is Maneuver.LEFT:
        return InstructionKind.TURN_LEFT, None
    if edge.maneuver is Maneuver.RIGHT:
        return InstructionKind.TURN_RIGHT, None
    return None


def _counts(edge: Edge) -> int:
    return 0 if _instruction_for(edge) is None else 1


def locate_start(track: Track, start: Pose) -> tuple[int, float]:
    """Edge and arc position the start pose sits on, matching the direction of travel."""
    best = None
    for e in track.edges:
        s, lat, tangent, _ = e.polyline.project(start.x, start.y)
        herr = abs(normalize_angle(start.heading - tangent))
        if abs(lat) > track.cell_size / 2 or herr >= math.pi / 2:
            continue
        key = (abs(lat), herr, e.id)
        if best is None or key < best[0]:
            best = (key, e.id, s)
    if best is None:
        raise StartOffTrack(f"start ({start.x:.3f}, {start.y:.3f}) is not on any lane")
    return best[1], best[2]


def goal_candidates(track: Track, goal: tuple[float, float]) -> dict[int, float]:
    """Edges whose centerline passes nearest to the goal, with the goal's arc position on each."""
    proj = {e.id: e.polyline.project(*goal) for e in track.edges}
    nearest = min(abs(p[1]) for p in proj.values())
    if nearest > track.cell_size / 2:
        raise GoalOffTrack(f"goal ({goal[0]:.3f}, {goal[1]:.3f}) is not on any lane")
    return {eid: p[0] for eid, p in proj.items() if abs(p[1]) <= nearest + 1e-9}


def _search(track: Track, start_edge: int, start_s: float, goals: dict[int, float]):
    """Uniform-cost search; keys are (length, instruction count, node path) for deterministic ties."""
    e0 = track.edges[start_edge]
    first = _counts(e0)
    candidates = []
    if start_edge in goals and goals[start_edge] >= start_s:
        candidates.append(((round(goals[start_edge] - start_s, 9), first, (e0.src,)), (start_edge,)))

    heap = [(round(e0.length - start_s, 9), first, (e0.src, e0.dst), (start_edge,))]
    settled: dict[Port, tuple] = {}
    while heap:
        cost, n, nodes, path = heapq.heappop(heap)
        node = nodes[-1]
        if node in settled:
            continue
        settled[node] = (cost, n, nodes, path)
        for eid in track.out_edges.get(node, ()):
            e = track.edges[eid]
            if eid in goals:
                candidates.append(((round(cost + goals[eid], 9), n + _counts(e), nodes), path + (eid,)))
            if e.dst not in settled:
                heapq.heappush(heap, (round(cost + e.length, 9), n + _counts(e), nodes + (e.dst,), path + (eid,)))
    if not candidates:
        raise NoPathExists("goal is unreachable from the start pose")
    return min(candidates)[1]


def plan_route(track: Track, start: Pose, goal: tuple[float, float]) -> Route:
    start_edge, start_s = locate_start(track, start)
    goals = goal_candidates(track, goal)
    path = _search(track, start_edge, start_s, goals)

    offsets = [0.0]
    for eid in path:
        offsets.append(offsets[-1] + track.edges[eid].length)
    goal_arc = offsets[-2] + goals[path[-1]]

    instructions = []
    for i, eid in enumerate(path):
        e = track.edges[eid]
        found = _instruction_for(e)
        if found is None or offsets[i] >= goal_arc:
            continue
        kind, cross = found
        instructions.append(DrivingInstruction(kind, e.src, e.dst, offsets[i], min(offsets[i + 1], goal_arc), cross))
    instructions.append(DrivingInstruction(InstructionKind.STOP, None, None, goal_arc, goal_arc))

    pts: list[np.ndarray] = []
    hs: list[np.ndarray] = []
    for i, eid in enumerate(path):
        poly = track.edges[eid].polyline
        skip = 0 if i == 0 else 1
        pts.append(poly.points[skip:])
        hs.append(poly.headings[skip:])
    centerline = Polyline(np.vstack(pts), np.concatenate(hs))
    return Route(
        edges=tuple(path),
        instructions=tuple(instructions),
        total_length=goal_arc - start_s,
        start_arc=start_s,
        goal_arc=goal_arc,
        edge_offsets=tuple(offsets),
        centerline=centerline,
        goal=(float(goal[0]), float(goal[1])),
    )


def project_to_route(track: Track, route: Route, pose: Pose, hint: int = 0, window: int = 2) -> LaneProjection:
    """Project onto route edges near ``hint``; arc position is route-level."""
    lo = max(0, hint - 1)
    hi = min(len(route.edges), hint + window + 1)
    best = None
    for i in range(lo, hi):
        poly = track.edges[route.edges[i]].polyline
        s, lat, tangent, point = poly.project(pose.x, pose.y)
        if best is None or abs(lat) < abs(best[1]):
            best = (i, lat, tangent, route.edge_offsets[i] + s, point)
    i, lat, tangent, arc, point = best
    return LaneProjection(lat, normalize_angle(pose.heading - tangent), arc, point, edge_index=i)


def initial_progress(route: Route) -> RouteProgress:
    first = route.instructions[0]
    d = max(first.anchor_arc - route.start_arc, 0.0)
    return RouteProgress(route.start_arc, 0, d, d == 0.0)


def update_progress(route: Route, progress: RouteProgress, projection: LaneProjection) -> RouteProgress:
    if projection.edge_index is None or not 0 <= projection.edge_index < len(route.edges):
        raise RouteDeparture("projection is not on a route edge")
    arc = projection.arc_position
    idx = progress.next_instruction_index
    last = len(route.instructions) - 1
    while idx < last and arc >= route.instructions[idx].exit_arc:
        idx += 1
    instr = route.instructions[idx]
    if arc >= instr.anchor_arc:
        return RouteProgress(arc, idx, 0.0, True)
    return replace(progress, arc_position=arc, next_instruction_index=idx,
                   distance_to_next=instr.anchor_arc - arc, in_maneuver=False)


def maneuver_geometry(route: Route, index: int) -> Polyline | None:
    """Centerline of instruction ``index`` in route arc coordinates (offset by its anchor)."""
    instr = route.instructions[index]
    if instr.kind is InstructionKind.STOP:
        return None
    return route.centerline.slice(instr.anchor_arc, instr.exit_arc)
