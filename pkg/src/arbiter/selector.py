"""
Behavior selection and blending.

Four strategies decide, every tick, which behavior drives the vehicle:

* ``basic``: Follow Lane until the next instruction is within the turn
  distance, then the instruction's behavior.
* ``transition``: like basic, but a speed-adaptive zone before the turn
  distance hands control to the Transition behavior so the vehicle slows
  down before the maneuver.
* ``interpolation``: blends Follow Lane with the next behavior using a
  coefficient that grows as the instruction approaches.
* ``hybrid``: interpolation that also treats Transition as a behavior to
  blend toward ahead of the transition zone.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .behaviors import MANEUVERS, BehaviorKind, ControlCommand, Observation
from .planner import DrivingInstruction, InstructionKind, RouteProgress

FL = BehaviorKind.FOLLOW_LANE
TR = BehaviorKind.TRANSITION


class Strategy(Enum):
    BASIC = "basic"
    TRANSITION = "transition"
    INTERPOLATION = "interpolation"
    HYBRID = "hybrid"


class CoefficientMode(Enum):
    TURN_DISTANCE = "turn"
    INTERPOLATION_DISTANCE = "distance"


class BlendMode(Enum):
    SPEED_ONLY = "speed"
    SPEED_AND_STEERING = "both"


@dataclass(frozen=True)
class SelectorConfig:
    strategy: Strategy = Strategy.BASIC
    turn_distance: float = 5.0
    transition_factor: float = 3.0 / 8.0
    interpolation_distance: float = 10.0
    coefficient_mode: CoefficientMode = CoefficientMode.TURN_DISTANCE
    blend_mode: BlendMode = BlendMode.SPEED_AND_STEERING

    def __post_init__(self) -> None:
        if self.turn_distance <= 0 or self.interpolation_distance <= 0:
            raise ValueError("turn_distance and interpolation_distance must be positive")
        if self.transition_factor <= 0:
            raise ValueError("transition_factor must be positive")


@dataclass(frozen=True)
class SelectorState:
    previous_active: BehaviorKind = FL
    previous_instruction_index: int = 0
    # instruction index approached straight out of a maneuver; Transition is suppressed for it
    transition_blocked: int | None = None


@dataclass(frozen=True)
class SelectorDecision:
    active: BehaviorKind
    blending_with: BehaviorKind | None
    coefficient: float
    command: ControlCommand
    switch_event: bool


_INSTRUCTION_BEHAVIOR = {
    InstructionKind.TURN_LEFT: BehaviorKind.TURN_LEFT,
    InstructionKind.TURN_RIGHT: BehaviorKind.TURN_RIGHT,
    InstructionKind.CROSS_CROSSING: BehaviorKind.CROSS_CROSSING,
    InstructionKind.STOP: BehaviorKind.STOP,
}


def instruction_behavior(instr: DrivingInstruction | InstructionKind) -> BehaviorKind:
    kind = instr if isinstance(instr, InstructionKind) else instr.kind
    return _INSTRUCTION_BEHAVIOR[kind]


def transition_distance(speed: float, cfg: SelectorConfig) -> float:
    return cfg.transition_factor * speed


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def interpolation_coefficient(d: float, cfg: SelectorConfig) -> float:
    """Weight of the next behavior at distance ``d`` from it: 1 at the anchor, 0 at the region edge."""
    reach = cfg.turn_distance if cfg.coefficient_mode is CoefficientMode.TURN_DISTANCE else cfg.interpolation_distance
    return _clamp01(1.0 - d / reach)


def blend(current: ControlCommand, nxt: ControlCommand, c: float, mode: BlendMode) -> ControlCommand:
    speed = (1.0 - c) * current.desired_speed + c * nxt.desired_speed
    if mode is BlendMode.SPEED_ONLY:
        return ControlCommand(speed, current.steering)
    return ControlCommand(speed, (1.0 - c) * current.steering + c * nxt.steering)


Controls = Callable[[BehaviorKind], ControlCommand]


def _mix(controls: Controls, current: BehaviorKind, nxt: BehaviorKind, c: float, mode: BlendMode):
    """Blend two behaviors, invoking only the ones whose output is used."""
    if c <= 0.0:
        return current, None, 0.0, controls(current)
    if c >= 1.0 and mode is BlendMode.SPEED_AND_STEERING:
        return nxt, current, 1.0, controls(nxt)
    cmd = blend(controls(current), controls(nxt), c, mode)
    return (nxt if c >= 0.5 else current), current if c >= 0.5 else nxt, c, cmd


def select(
    cfg: SelectorConfig,
    state: SelectorState,
    progress: RouteProgress,
    obs: Observation,
    controls: Controls,
    upcoming: BehaviorKind,
) -> tuple[SelectorDecision, SelectorState]:
    """One arbitration tick.

    ``upcoming`` is the behavior of the next (or current) instruction. Returns
    the decision and the state for the following tick.
    """
    d = progress.distance_to_next
    td = cfg.turn_distance
    trd = transition_distance(obs.speed, cfg)
    in_region = progress.in_maneuver or d <= td
    idx = progress.next_instruction_index

    # Transition applies before maneuvers, never straight out of one: the first
    # time an instruction becomes the target, latch it as blocked if the vehicle
    # leaves a maneuver already inside the zone where Transition would act.
    blocked = state.transition_blocked
    if idx != state.previous_instruction_index:
        blocked = None
        reach = td + trd
        if cfg.strategy is Strategy.HYBRID:
            reach = max(reach, trd + cfg.interpolation_distance)
        if state.previous_active in MANEUVERS and d <= reach and not progress.in_maneuver:
            blocked = idx
    eligible = upcoming in MANEUVERS and blocked != idx

    strategy = cfg.strategy
    blending_with = None
    c = 0.0
    if strategy is Strategy.BASIC:
        active = upcoming if in_region else FL
        command = controls(active)
    elif strategy is Strategy.TRANSITION:
        if in_region:
            active = upcoming
        elif eligible and d <= td + trd:
            active = TR
        else:
            active = FL
        command = controls(active)
    elif strategy is Strategy.INTERPOLATION or not eligible and not progress.in_maneuver:
        if progress.in_maneuver:
            active, blending_with, c, command = upcoming, FL, 1.0, controls(upcoming)
        else:
            active, blending_with, c, command = _mix(controls, FL, upcoming, interpolation_coefficient(d, cfg),
                                                     cfg.blend_mode)
    else:  # hybrid, with Transition as an interpolation source
        if progress.in_maneuver:
            active, blending_with, c, command = upcoming, TR, 1.0, controls(upcoming)
        elif d <= td + trd:
            active, blending_with, c, command = _mix(controls, TR, upcoming, interpolation_coefficient(d, cfg),
                                                     cfg.blend_mode)
        else:
            # ahead of the transition zone, blend toward Transition by its own distance
            d_trans = max(d - trd, 0.0)
            c_pre = _clamp01(1.0 - d_trans / cfg.interpolation_distance)
            active, blending_with, c, command = _mix(controls, FL, TR, c_pre, cfg.blend_mode)

    decision = SelectorDecision(active, blending_with, c, command, active != state.previous_active)
    new_state = SelectorState(active, idx, blocked)
    return decision, new_state
