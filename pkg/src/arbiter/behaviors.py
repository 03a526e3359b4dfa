"""
Scripted driving behaviors.

Each behavior maps an :class:`Observation` to a :class:`ControlCommand`.
Lane tracking is pure pursuit; the auxiliary Transition and Stop behaviors
reuse the Follow Lane steering and override only the speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .track import LaneProjection, Polyline, Pose


class MissingManeuverGeometry(ValueError):
    pass


class BehaviorKind(Enum):
    FOLLOW_LANE = "FollowLane"
    TURN_LEFT = "TurnLeft"
    TURN_RIGHT = "TurnRight"
    CROSS_CROSSING = "CrossCrossing"
    TRANSITION = "Transition"
    STOP = "Stop"

    @property
    def is_maneuver(self) -> bool:
        return self in MANEUVERS


MANEUVERS = frozenset({BehaviorKind.TURN_LEFT, BehaviorKind.TURN_RIGHT, BehaviorKind.CROSS_CROSSING})


@dataclass(frozen=True)
class ControlCommand:
    desired_speed: float
    steering: float


@dataclass(frozen=True)
class Observation:
    pose: Pose
    projection: LaneProjection
    speed: float
    distance_to_next: float
    in_maneuver: bool
    centerline: Polyline  # route centerline; projection.arc_position indexes into it
    maneuver_geometry: Polyline | None = None

    def __post_init__(self) -> None:
        if self.speed < 0:
            raise ValueError("speed must be non-negative")


@dataclass(frozen=True)
class BehaviorParams:
    v_follow: float = 8.0
    v_turn: float = 1.0
    transition_speed: float = 1.0
    stop_speed: float = 0.0
    lookahead_gain: float = 0.5  # seconds
    lookahead_min: float = 1.5
    turn_lookahead_gain: float = 0.5  # seconds
    turn_lookahead_min: float = 1.5
    wheelbase: float = 0.6
    max_steering: float = 0.6

    @classmethod
    def for_cell_size(cls, cell_size: float, **overrides) -> BehaviorParams:
        base = dict(
            lookahead_min=0.15 * cell_size,
            turn_lookahead_min=0.15 * cell_size,
            wheelbase=0.06 * cell_size,
        )
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class CompetenceEnvelope:
    max_entry_speed: float
    max_heading_error: float
    max_lateral_deviation: float

    def __post_init__(self) -> None:
        if min(self.max_entry_speed, self.max_heading_error, self.max_lateral_deviation) <= 0:
            raise ValueError("envelope bounds must be positive")


@dataclass(frozen=True)
class EnvelopeCheck:
    kind: BehaviorKind
    within: bool
    violations: tuple[str, ...] = field(default_factory=tuple)


def default_envelope(kind: BehaviorKind, cell_size: float) -> CompetenceEnvelope:
    if kind.is_maneuver:
        return CompetenceEnvelope(2.0, 0.3, 0.1 * cell_size)
    return CompetenceEnvelope(15.0, math.pi / 2, 0.35 * cell_size)


def pure_pursuit(pose: Pose, path: Polyline, s: float, lookahead: float, wheelbase: float, max_steering: float) -> float:
    """Front-wheel angle steering toward the path point ``lookahead`` ahead of arc ``s``."""
    tx, ty, _ = path.point_at(s + lookahead)
    dx, dy = tx - pose.x, ty - pose.y
    dist = math.hypot(dx, dy)
    if dist < 1e-12:
        return 0.0
    alpha = math.atan2(dy, dx) - pose.heading
    steer = math.atan2(2.0 * wheelbase * math.sin(alpha), dist)
    return max(-max_steering, min(max_steering, steer))


def _follow_steering(obs: Observation, params: BehaviorParams) -> float:
    lookahead = max(params.lookahead_gain * obs.speed, params.lookahead_min)
    return pure_pursuit(obs.pose, obs.centerline, obs.projection.arc_position, lookahead,
                        params.wheelbase, params.max_steering)


def _maneuver_steering(obs: Observation, params: BehaviorParams) -> float:
    # Tracks the maneuver centerline only: before the anchor the projection
    # clamps to the arc start, so a long (fast) lookahead reaches into the arc.
    geom = obs.maneuver_geometry
    if geom is None:
        if obs.in_maneuver:
            raise MissingManeuverGeometry("turn behaviors need the maneuver centerline while in the maneuver")
        path, s = obs.centerline, obs.projection.arc_position
    else:
        path = geom
        s = geom.project(obs.pose.x, obs.pose.y)[0]
    lookahead = max(params.turn_lookahead_gain * obs.speed, params.turn_lookahead_min)
    return pure_pursuit(obs.pose, path, s, lookahead, params.wheelbase, params.max_steering)


def behavior_control(kind: BehaviorKind, obs: Observation, params: BehaviorParams) -> ControlCommand:
    if kind is BehaviorKind.FOLLOW_LANE:
        return ControlCommand(params.v_follow, _follow_steering(obs, params))
    if kind is BehaviorKind.TRANSITION:
        return ControlCommand(params.transition_speed, _follow_steering(obs, params))
    if kind is BehaviorKind.STOP:
        return ControlCommand(params.stop_speed, _follow_steering(obs, params))
    return ControlCommand(params.v_turn, _maneuver_steering(obs, params))


def check_envelope(kind: BehaviorKind, obs: Observation, env: CompetenceEnvelope) -> EnvelopeCheck:
    """Whether the observed state lies inside the behavior's competence envelope.

    Telemetry only; control output never depends on it.
    """
    violations = []
    if obs.speed > env.max_entry_speed:
        violations.append("speed")
    if abs(obs.projection.heading_error) > env.max_heading_error:
        violations.append("alignment")
    if abs(obs.projection.lateral_deviation) > env.max_lateral_deviation:
        violations.append("lateral")
    return EnvelopeCheck(kind, not violations, tuple(violations))


class ControllerBank:
    """Lazily evaluates behaviors for one observation and counts invocations."""

    def __init__(self, obs: Observation, params: BehaviorParams):
        self.obs = obs
        self.params = params
        self._cache: dict[BehaviorKind, ControlCommand] = {}

    def __call__(self, kind: BehaviorKind) -> ControlCommand:
        if kind not in self._cache:
            self._cache[kind] = behavior_control(kind, self.obs, self.params)
        return self._cache[kind]

    @property
    def invoked(self) -> int:
        return len(self._cache)
