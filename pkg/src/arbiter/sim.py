"""Kinematic bicycle vehicle and the fixed-timestep closed loop."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .behaviors import BehaviorKind, BehaviorParams, ControlCommand, ControllerBank, Observation
from .planner import (
    Route,
    RouteDeparture,
    RouteProgress,
    initial_progress,
    maneuver_geometry,
    project_to_route,
    update_progress,
)
from .selector import SelectorConfig, SelectorDecision, SelectorState, instruction_behavior, select
from .track import Pose, Track


@dataclass(frozen=True)
class VehicleParams:
    wheelbase: float = 0.6
    max_steering: float = 0.6
    max_steering_rate: float = 2.0
    max_accel: float = 3.0
    max_decel: float = 6.0
    max_speed: float = 15.0

    def __post_init__(self) -> None:
        if min(self.wheelbase, self.max_steering, self.max_steering_rate, self.max_accel,
               self.max_decel, self.max_speed) <= 0:
            raise ValueError("vehicle parameters must be positive")
        if self.max_decel < self.max_accel:
            raise ValueError("max_decel must be at least max_accel")

    @classmethod
    def for_cell_size(cls, cell_size: float, **overrides) -> VehicleParams:
        return cls(**{"wheelbase": 0.06 * cell_size, **overrides})


@dataclass(frozen=True)
class VehicleState:
    pose: Pose
    speed: float = 0.0
    steering_actual: float = 0.0


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.05
    max_duration: float = 120.0
    off_route_threshold: float = 3.5
    stop_speed_epsilon: float = 0.05
    goal_tolerance: float = 2.5

    def __post_init__(self) -> None:
        if min(self.dt, self.max_duration, self.off_route_threshold, self.stop_speed_epsilon,
               self.goal_tolerance) <= 0:
            raise ValueError("simulation settings must be positive")

    @classmethod
    def for_cell_size(cls, cell_size: float, **overrides) -> SimConfig:
        base = {"off_route_threshold": 0.35 * cell_size, "goal_tolerance": cell_size / 4}
        return cls(**{**base, **overrides})


class RunStatus(Enum):
    SUCCESS = "Success"
    OFF_ROUTE = "OffRoute"
    TIMEOUT = "Timeout"


@dataclass(frozen=True)
class StepRecord:
    t: float
    vehicle: VehicleState
    decision: SelectorDecision
    distance_to_next: float
    squared_speed_error: float
    lateral_deviation: float
    controllers_invoked: int


@dataclass
class RunOutcome:
    status: RunStatus
    completion_time: float
    records: list[StepRecord] = field(default_factory=list)
    strategy: str = ""


def vehicle_step(state: VehicleState, cmd: ControlCommand, params: VehicleParams, dt: float) -> VehicleState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    target_steer = max(-params.max_steering, min(params.max_steering, cmd.steering))
    max_turn = params.max_steering_rate * dt
    steer = state.steering_actual + max(-max_turn, min(max_turn, target_steer - state.steering_actual))

    target_speed = max(0.0, min(params.max_speed, cmd.desired_speed))
    dv = max(-params.max_decel * dt, min(params.max_accel * dt, target_speed - state.speed))
    speed = max(0.0, state.speed + dv)

    p = state.pose
    heading = p.heading + speed / params.wheelbase * math.tan(steer) * dt
    x = p.x + speed * dt * math.cos(heading)
    y = p.y + speed * dt * math.sin(heading)
    return VehicleState(Pose(x, y, heading), speed, steer)


def start_pose(route: Route) -> Pose:
    x, y, h = route.centerline.point_at(route.start_arc)
    return Pose(x, y, h)


def run_simulation(
    track: Track,
    route: Route,
    selector_cfg: SelectorConfig,
    behavior_params: BehaviorParams,
    vehicle_params: VehicleParams,
    sim_cfg: SimConfig,
    start: Pose | None = None,
) -> RunOutcome:
    """Drive the route closed-loop until success, leaving the lane, or timeout.

    Each tick: project onto the route, update progress, select a command,
    record, then integrate the vehicle. Records hold the state the decision
    was made from.
    """
    vehicle = VehicleState(start if start is not None else start_pose(route))
    progress: RouteProgress = initial_progress(route)
    sel_state = SelectorState()
    hint = 0
    records: list[StepRecord] = []
    max_steps = int(math.floor(sim_cfg.max_duration / sim_cfg.dt + 1e-9))
    outcome = RunStatus.TIMEOUT

    for k in range(max_steps + 1):
        t = k * sim_cfg.dt
        pose = vehicle.pose
        proj = project_to_route(track, route, pose, hint)
        if abs(proj.lateral_deviation) > sim_cfg.off_route_threshold:
            outcome = RunStatus.OFF_ROUTE
            break
        try:
            progress = update_progress(route, progress, proj)
        except RouteDeparture:
            outcome = RunStatus.OFF_ROUTE
            break
        hint = proj.edge_index

        idx = progress.next_instruction_index
        upcoming = instruction_behavior(route.instructions[idx])
        obs = Observation(
            pose=pose,
            projection=proj,
            speed=vehicle.speed,
            distance_to_next=progress.distance_to_next,
            in_maneuver=progress.in_maneuver,
            centerline=route.centerline,
            maneuver_geometry=maneuver_geometry(route, idx),
        )
        bank = ControllerBank(obs, behavior_params)
        decision, sel_state = select(selector_cfg, sel_state, progress, obs, bank, upcoming)
        err = (decision.command.desired_speed - vehicle.speed) ** 2
        records.append(StepRecord(t, vehicle, decision, progress.distance_to_next, err,
                                  proj.lateral_deviation, bank.invoked))

        to_goal = math.hypot(pose.x - route.goal[0], pose.y - route.goal[1])
        reached = upcoming is BehaviorKind.STOP and to_goal < sim_cfg.goal_tolerance
        if reached and vehicle.speed < sim_cfg.stop_speed_epsilon:
            outcome = RunStatus.SUCCESS
            break
        if k == max_steps:
            break
        vehicle = vehicle_step(vehicle, decision.command, vehicle_params, sim_cfg.dt)

    completion = records[-1].t if records else 0.0
    return RunOutcome(outcome, completion, records, selector_cfg.strategy.value)

