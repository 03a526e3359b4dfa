"""
Scenario files: flat ``key=value`` lines describing one reproducible run.

Recognised keys::

    track=<path>                      relative to the scenario file
    start=x,y,heading
    goal=x,y
    selector.<field>=...              SelectorConfig fields
    vehicle.<field>=...               VehicleParams fields
    sim.<field>=...                   SimConfig fields
    behavior.<Kind>.<param>=...       e.g. behavior.FollowLane.speed=6
    out_dir=<path>
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .behaviors import BehaviorParams
from .planner import Route, plan_route
from .selector import BlendMode, CoefficientMode, SelectorConfig, Strategy
from .sim import SimConfig, VehicleParams
from .track import Pose, Track, parse_track


class ScenarioError(ValueError):
    pass


BENCHMARK = "benchmark"

# behavior.<Kind>.<param> -> BehaviorParams field
_BEHAVIOR_KEYS = {
    ("FollowLane", "speed"): "v_follow",
    ("FollowLane", "lookahead_gain"): "lookahead_gain",
    ("FollowLane", "lookahead_min"): "lookahead_min",
    ("Transition", "speed"): "transition_speed",
    ("Stop", "speed"): "stop_speed",
}
for _kind in ("TurnLeft", "TurnRight", "CrossCrossing", "Turn"):
    _BEHAVIOR_KEYS[(_kind, "speed")] = "v_turn"
    _BEHAVIOR_KEYS[(_kind, "lookahead_gain")] = "turn_lookahead_gain"
    _BEHAVIOR_KEYS[(_kind, "lookahead_min")] = "turn_lookahead_min"


@dataclass
class Scenario:
    track_path: Path
    start: tuple[float, float, float]
    goal: tuple[float, float]
    selector: dict[str, str] = field(default_factory=dict)
    vehicle: dict[str, str] = field(default_factory=dict)
    sim: dict[str, str] = field(default_factory=dict)
    behavior: dict[str, str] = field(default_factory=dict)
    out_dir: Path | None = None


def _floats(value: str, n: int, key: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(p) for p in value.split(","))
    except ValueError:
        raise ScenarioError(f"{key}: expected {n} comma-separated numbers, got {value!r}") from None
    if len(parts) != n:
        raise ScenarioError(f"{key}: expected {n} numbers, got {len(parts)}")
    return parts


def parse_scenario(text: str, base_dir: Path = Path(".")) -> Scenario:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        values[key] = value
    for required in ("track", "start", "goal"):
        if required not in values:
            raise ScenarioError(f"missing key {required!r}")

    sc = Scenario(
        track_path=(base_dir / values.pop("track")),
        start=_floats(values.pop("start"), 3, "start"),
        goal=_floats(values.pop("goal"), 2, "goal"),
    )
    if "out_dir" in values:
        sc.out_dir = Path(values.pop("out_dir"))
    for key, value in values.items():
        section, _, rest = key.partition(".")
        if section not in ("selector", "vehicle", "sim", "behavior") or not rest:
            raise ScenarioError(f"unknown key {key!r}")
        getattr(sc, section)[rest] = value
    return sc


def load_scenario(path: str | Path) -> Scenario:
    if str(path) == BENCHMARK:
        ref = resources.files("arbiter") / "data" / "benchmark.scenario"
        with resources.as_file(ref) as p:
            return parse_scenario(p.read_text(encoding="utf-8"), p.parent)
    p = Path(path)
    return parse_scenario(p.read_text(encoding="utf-8"), p.parent)


def _coerce(cls, overrides: dict[str, str], **base):
    names = {f.name: f.type for f in dataclasses.fields(cls)}
    kwargs = dict(base)
    for key, raw in overrides.items():
        if key not in names:
            raise ScenarioError(f"{cls.__name__} has no field {key!r}")
        kwargs[key] = raw
    return kwargs


def selector_config(overrides: dict[str, str]) -> SelectorConfig:
    kwargs: dict = {}
    for key, raw in overrides.items():
        if key == "strategy":
            kwargs[key] = Strategy(raw.lower())
        elif key == "coefficient_mode":
            kwargs[key] = CoefficientMode(raw)
        elif key == "blend_mode":
            kwargs[key] = BlendMode(raw)
        elif key in ("turn_distance", "transition_factor", "interpolation_distance"):
            kwargs[key] = float(raw)
        else:
            raise ScenarioError(f"SelectorConfig has no field {key!r}")
    return SelectorConfig(**kwargs)


def vehicle_params(cell_size: float, overrides: dict[str, str]) -> VehicleParams:
    kwargs = {k: float(v) for k, v in _coerce(VehicleParams, overrides).items()}
    return VehicleParams.for_cell_size(cell_size, **kwargs)


def sim_config(cell_size: float, overrides: dict[str, str]) -> SimConfig:
    kwargs = {k: float(v) for k, v in _coerce(SimConfig, overrides).items()}
    return SimConfig.for_cell_size(cell_size, **kwargs)


def behavior_params(cell_size: float, vehicle: VehicleParams, overrides: dict[str, str]) -> BehaviorParams:
    kwargs = {"wheelbase": vehicle.wheelbase, "max_steering": vehicle.max_steering}
    for key, raw in overrides.items():
        kind, _, param = key.partition(".")
        target = _BEHAVIOR_KEYS.get((kind, param))
        if target is None:
            raise ScenarioError(f"unknown behavior parameter behavior.{key}")
        kwargs[target] = float(raw)
    return BehaviorParams.for_cell_size(cell_size, **kwargs)


@dataclass
class Prepared:
    track: Track
    route: Route
    selector: SelectorConfig
    behavior: BehaviorParams
    vehicle: VehicleParams
    sim: SimConfig
    start: Pose


def prepare(sc: Scenario) -> Prepared:
    """Parse the track, plan the route and resolve every configuration block."""
    track = parse_track(sc.track_path.read_text(encoding="utf-8"))
    start = Pose(*sc.start)
    route = plan_route(track, start, sc.goal)
    vehicle = vehicle_params(track.cell_size, sc.vehicle)
    return Prepared(
        track=track,
        route=route,
        selector=selector_config(sc.selector),
        behavior=behavior_params(track.cell_size, vehicle, sc.behavior),
        vehicle=vehicle,
        sim=sim_config(track.cell_size, sc.sim),
        start=start,
    )
