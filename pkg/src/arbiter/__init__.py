"""Behavior selection and blending for scripted driving behaviors on a grid-mat track."""

from .behaviors import BehaviorKind, BehaviorParams, ControlCommand, Observation, behavior_control
from .metrics import RunSummary, emit_chart, emit_comparison, emit_csv, parse_csv, summarize
from .planner import DrivingInstruction, InstructionKind, Route, RouteProgress, plan_route, update_progress
from .scenario import Scenario, load_scenario, prepare
from .selector import (
    BlendMode,
    CoefficientMode,
    SelectorConfig,
    SelectorDecision,
    SelectorState,
    Strategy,
    blend,
    interpolation_coefficient,
    select,
    transition_distance,
)
from .sim import RunOutcome, RunStatus, SimConfig, VehicleParams, VehicleState, run_simulation, vehicle_step
from .track import Pose, Track, parse_track, project_to_lane, serialize_track

__all__ = [
    "BehaviorKind", "BehaviorParams", "BlendMode", "CoefficientMode", "ControlCommand", "DrivingInstruction",
    "InstructionKind", "Observation", "Pose", "Route", "RouteProgress", "RunOutcome", "RunStatus", "RunSummary",
    "Scenario", "SelectorConfig", "SelectorDecision", "SelectorState", "SimConfig", "Strategy", "Track",
    "VehicleParams", "VehicleState", "behavior_control", "blend", "emit_chart", "emit_comparison", "emit_csv",
    "interpolation_coefficient", "load_scenario", "parse_csv", "parse_track", "plan_route", "prepare",
    "project_to_lane", "run_simulation", "select", "serialize_track", "summarize", "transition_distance",
    "update_progress", "vehicle_step",
]

__version__ = "0.1.0"
