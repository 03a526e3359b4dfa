import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arbiter.behaviors import MANEUVERS, BehaviorKind, ControlCommand, Observation
from arbiter.planner import InstructionKind, RouteProgress, initial_progress, update_progress
from arbiter.selector import (
    BlendMode,
    CoefficientMode,
    SelectorConfig,
    SelectorState,
    Strategy,
    blend,
    instruction_behavior,
    interpolation_coefficient,
    select,
    transition_distance,
)
from arbiter.track import LaneProjection, Polyline, Pose

FL, TR, STOP = BehaviorKind.FOLLOW_LANE, BehaviorKind.TRANSITION, BehaviorKind.STOP
TL = BehaviorKind.TURN_LEFT

SPEEDS = {FL: 8.0, TR: 1.0, STOP: 0.0}
STRAIGHT = Polyline(np.array([[0.0, 0.0], [100.0, 0.0]]), np.array([0.0, 0.0]))


class FakeControls:
    """Per-kind constant commands; steering encodes the kind so blends are traceable."""

    def __init__(self):
        self.calls: list[BehaviorKind] = []

    def __call__(self, kind):
        self.calls.append(kind)
        steer = {FL: 0.0, TR: 0.1}.get(kind, 0.5)
        return ControlCommand(SPEEDS.get(kind, 1.0), steer)


def obs_at(speed=8.0):
    proj = LaneProjection(0.0, 0.0, 0.0, (0.0, 0.0), edge_index=0)
    return Observation(Pose(0, 0, 0), proj, speed, 0.0, False, STRAIGHT)


def tick(strategy, d, speed=8.0, upcoming=TL, in_maneuver=False, state=None, **cfg):
    config = SelectorConfig(strategy=strategy, **cfg)
    progress = RouteProgress(0.0, 0, 0.0 if in_maneuver else d, in_maneuver)
    controls = FakeControls()
    decision, new_state = select(config, state or SelectorState(), progress, obs_at(speed), controls, upcoming)
    return decision, new_state, controls


class TestFormulas:
    @pytest.mark.parametrize("speed,expected", [(12.0, 4.5), (4.0, 1.5), (0.0, 0.0)])
    def test_transition_distance(self, speed, expected):
        assert transition_distance(speed, SelectorConfig()) == expected

    def test_coefficient_examples(self):
        cfg = SelectorConfig()
        assert interpolation_coefficient(5.0, cfg) == 0.0
        assert interpolation_coefficient(0.0, cfg) == 1.0
        assert interpolation_coefficient(2.5, cfg) == 0.5
        dist = SelectorConfig(coefficient_mode=CoefficientMode.INTERPOLATION_DISTANCE)
        assert interpolation_coefficient(0.0, dist) == 1.0
        assert interpolation_coefficient(20.0, dist) == 0.0

    def test_blend_examples(self):
        a, b = ControlCommand(8.0, 0.2), ControlCommand(1.0, -0.4)
        assert blend(a, b, 0.0, BlendMode.SPEED_AND_STEERING) == a
        assert blend(a, b, 1.0, BlendMode.SPEED_AND_STEERING) == b
        assert blend(a, b, 0.5, BlendMode.SPEED_AND_STEERING).desired_speed == 4.5
        assert blend(a, b, 0.5, BlendMode.SPEED_ONLY).steering == 0.2

    @pytest.mark.parametrize("kind", list(InstructionKind))
    def test_instruction_behavior(self, kind):
        assert instruction_behavior(kind).value == kind.value

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SelectorConfig(turn_distance=0)
        with pytest.raises(ValueError):
            SelectorConfig(transition_factor=-1)


class TestSelectExamples:
    def test_basic_far_away(self):
        decision, _, _ = tick(Strategy.BASIC, 100.0)
        assert decision.active is FL and decision.coefficient == 0.0

    def test_transition_zone(self):
        decision, _, controls = tick(Strategy.TRANSITION, 8.0, speed=12.0)
        assert decision.active is TR
        assert decision.command.desired_speed == 1.0
        assert controls.calls == [TR]

    def test_transition_after_zone_is_follow_lane(self):
        decision, _, _ = tick(Strategy.TRANSITION, 9.6, speed=12.0)
        assert decision.active is FL

    def test_interpolation_midpoint(self):
        decision, _, controls = tick(Strategy.INTERPOLATION, 2.5)
        assert decision.coefficient == 0.5
        assert decision.command.desired_speed == 4.5
        assert decision.active is TL and decision.blending_with is FL
        assert sorted(k.value for k in controls.calls) == ["FollowLane", "TurnLeft"]

    @pytest.mark.parametrize("strategy", list(Strategy))
    def test_stop_in_maneuver(self, strategy):
        decision, _, _ = tick(strategy, 0.0, upcoming=STOP, in_maneuver=True)
        assert decision.command.desired_speed == 0.0
        assert decision.active is STOP

    def test_hybrid_preblend(self):
        # d - TrD = 5 with ID = 10 gives a half-way blend toward Transition
        decision, _, _ = tick(Strategy.HYBRID, 8.0, speed=8.0, turn_distance=0.5)
        assert decision.coefficient == pytest.approx(0.5)
        assert decision.command.desired_speed == pytest.approx(4.5)

    def test_hybrid_inside_zone_blends_transition_with_turn(self):
        decision, _, _ = tick(Strategy.HYBRID, 2.5)
        assert decision.coefficient == 0.5
        assert decision.command.desired_speed == pytest.approx(0.5 * 1.0 + 0.5 * 1.0)
        assert decision.command.steering == pytest.approx(0.5 * 0.1 + 0.5 * 0.5)

    def test_switch_event(self):
        d1, s1, _ = tick(Strategy.BASIC, 10.0)
        assert not d1.switch_event
        d2, _, _ = tick(Strategy.BASIC, 4.0, state=s1)
        assert d2.switch_event and d2.active is TL

    def test_no_transition_straight_after_a_turn(self):
        # the previous instruction just finished and the next turn is inside the zone
        state = SelectorState(previous_active=BehaviorKind.TURN_RIGHT, previous_instruction_index=0)
        config = SelectorConfig(strategy=Strategy.TRANSITION)
        progress = RouteProgress(0.0, 1, 8.0, False)
        decision, new_state = select(config, state, progress, obs_at(12.0), FakeControls(), TL)
        assert decision.active is FL
        again, _ = select(config, new_state, RouteProgress(0.0, 1, 7.5, False), obs_at(12.0), FakeControls(), TL)
        assert again.active is FL


distances = st.floats(0.0, 200.0)
configs = st.builds(
    SelectorConfig,
    turn_distance=st.floats(0.5, 20.0),
    transition_factor=st.floats(0.05, 1.0),
    interpolation_distance=st.floats(0.5, 30.0),
    coefficient_mode=st.sampled_from(list(CoefficientMode)),
    blend_mode=st.sampled_from(list(BlendMode)),
)


class TestSelectorProperties:
    @given(configs, distances, distances)
    def test_coefficient_monotone_and_clamped(self, cfg, a, b):
        lo, hi = sorted((a, b))
        ca, cb = interpolation_coefficient(lo, cfg), interpolation_coefficient(hi, cfg)
        assert 0.0 <= cb <= ca <= 1.0
        bound = cfg.turn_distance if cfg.coefficient_mode is CoefficientMode.TURN_DISTANCE else cfg.interpolation_distance
        if hi >= bound:
            assert cb == 0.0
        assert interpolation_coefficient(0.0, cfg) == 1.0

    @given(st.floats(0, 20), st.floats(0, 20), st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 1),
           st.sampled_from(list(BlendMode)))
    def test_blend_convex(self, v1, v2, s1, s2, c, mode):
        out = blend(ControlCommand(v1, s1), ControlCommand(v2, s2), c, mode)
        assert min(v1, v2) - 1e-12 <= out.desired_speed <= max(v1, v2) + 1e-12
        assert min(s1, s2) - 1e-12 <= out.steering <= max(s1, s2) + 1e-12

    @given(configs, st.floats(0, 15), st.floats(0.001, 100), st.sampled_from(sorted(MANEUVERS, key=str) + [STOP]))
    def test_strategies_agree_far_from_instructions(self, cfg, speed, extra, upcoming):
        d = cfg.turn_distance + transition_distance(speed, cfg) + cfg.interpolation_distance + extra
        commands = set()
        for strategy in Strategy:
            decision, _, _ = tick(strategy, d, speed=speed, upcoming=upcoming, **_fields(cfg))
            assert decision.active is FL
            commands.add(decision.command)
        assert commands == {FakeControls()(FL)}

    @given(st.floats(0.5, 20.0), st.floats(0, 15), st.floats(0.0, 100.0), st.sampled_from(sorted(MANEUVERS, key=str)))
    def test_basic_matches_interpolation_outside_and_at_anchor(self, td, speed, extra, upcoming):
        # d = TD itself is excluded: there Basic already hands over while the coefficient is still 0
        for d, in_m in ((td + extra + 1e-6, False), (0.0, True)):
            b, _, _ = tick(Strategy.BASIC, d, speed=speed, upcoming=upcoming, in_maneuver=in_m, turn_distance=td)
            i, _, _ = tick(Strategy.INTERPOLATION, d, speed=speed, upcoming=upcoming, in_maneuver=in_m, turn_distance=td)
            assert b.command == i.command and b.active is i.active

    @given(configs, distances, st.floats(0, 15))
    def test_controller_counts(self, cfg, d, speed):
        for strategy in (Strategy.BASIC, Strategy.TRANSITION):
            _, _, controls = tick(strategy, d, speed=speed, **_fields(cfg))
            assert len(set(controls.calls)) == 1
        for strategy in (Strategy.INTERPOLATION, Strategy.HYBRID):
            _, _, controls = tick(strategy, d, speed=speed, **_fields(cfg))
            assert 1 <= len(set(controls.calls)) <= 2


def _fields(cfg):
    return dict(turn_distance=cfg.turn_distance, transition_factor=cfg.transition_factor,
                interpolation_distance=cfg.interpolation_distance, coefficient_mode=cfg.coefficient_mode,
                blend_mode=cfg.blend_mode)


def replay(route, strategy, steps, speeds):
    """Drive select along the route with synthetic forward progress; returns (state, decision) pairs."""
    cfg = SelectorConfig(strategy=strategy)
    state, progress, arc = SelectorState(), initial_progress(route), route.start_arc
    out = []
    for step, speed in zip(steps, speeds):
        arc = min(arc + step, route.goal_arc + 1.0)
        i = max(k for k, off in enumerate(route.edge_offsets[:-1]) if off <= arc)
        x, y, h = route.centerline.point_at(arc)
        proj = LaneProjection(0.0, 0.0, arc, (x, y), edge_index=i)
        progress = update_progress(route, progress, proj)
        obs = Observation(Pose(x, y, h), proj, speed, progress.distance_to_next, progress.in_maneuver,
                          route.centerline)
        upcoming = instruction_behavior(route.instructions[progress.next_instruction_index])
        decision, new_state = select(cfg, state, progress, obs, FakeControls(), upcoming)
        out.append((state, decision))
        state = new_state
    return out


trajectories = st.integers(20, 300).flatmap(lambda n: st.tuples(
    st.lists(st.floats(0.0, 0.8), min_size=n, max_size=n),
    st.lists(st.floats(0.0, 12.0), min_size=n, max_size=n)))


class TestRunInvariants:
    @given(trajectories, st.sampled_from(list(Strategy)))
    @settings(max_examples=80, deadline=None)
    def test_transition_never_follows_a_maneuver(self, benchmark, traj, strategy):
        for state, decision in replay(benchmark.route, strategy, *traj):
            if state.previous_active in MANEUVERS:
                assert decision.active is not TR
                assert decision.blending_with is not TR or decision.active in MANEUVERS

    @given(trajectories, st.sampled_from(list(Strategy)))
    @settings(max_examples=40, deadline=None)
    def test_switch_events_and_replay(self, benchmark, traj, strategy):
        first = replay(benchmark.route, strategy, *traj)
        for state, decision in first:
            assert decision.switch_event == (decision.active is not state.previous_active)
        assert [d for _, d in replay(benchmark.route, strategy, *traj)] == [d for _, d in first]
