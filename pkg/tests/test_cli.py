import subprocess
import sys

import pytest

from arbiter.cli import main
from arbiter.planner import InstructionKind
from arbiter.scenario import ScenarioError, load_scenario, parse_scenario, prepare
from arbiter.selector import Strategy
from arbiter.track import CellKind


@pytest.fixture
def l_scenario(tmp_path):
    (tmp_path / "l.track").write_text(". S0\nS1 L1\n")
    path = tmp_path / "l.scenario"
    path.write_text("track=l.track\nstart=0,-15,0\ngoal=15,-2\n")
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestPlan:
    def test_l_track(self, capsys, l_scenario):
        code, out, _ = run(capsys, "plan", "--scenario", l_scenario)
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("0 TurnLeft at 10.000m")
        assert lines[1].startswith("1 Stop at ")

    def test_goal_off_track(self, capsys, l_scenario):
        code, _, err = run(capsys, "plan", "--scenario", l_scenario, "--goal", "2,-2")
        assert code == 2
        assert "GoalOffTrack" in err

    def test_benchmark_matches_oracle(self, capsys, benchmark):
        from test_planner import brute_force_length

        code, out, _ = run(capsys, "plan")
        assert code == 0
        kinds = [line.split()[1] for line in out.splitlines()]
        assert kinds == ["TurnRight", "CrossCrossing", "Stop"]
        route = benchmark.route
        track = benchmark.track
        goal_edges = {e.id: e.polyline.project(*route.goal)[0] for e in track.edges
                      if abs(e.polyline.project(*route.goal)[1]) < 1e-9}
        oracle = brute_force_length(track, route.edges[0], route.start_arc, goal_edges)
        assert route.total_length == pytest.approx(oracle, abs=1e-9)
        special = [track.edges[e].kind for e in route.edges if track.edges[e].kind is not CellKind.STRAIGHT]
        assert special == [CellKind.CORNER, CellKind.CROSSING]

    def test_track_and_pose_flags(self, capsys, tmp_path):
        (tmp_path / "t.track").write_text("S1 S1 S1\n")
        code, out, _ = run(capsys, "plan", "--track", tmp_path / "t.track", "--start", "0,-5,0", "--goal", "25,-5")
        assert code == 0 and out.strip() == "0 Stop at 25.000m"

    def test_bad_scenario(self, capsys, tmp_path):
        bad = tmp_path / "bad.scenario"
        bad.write_text("track=x.track\nstart=0,0\ngoal=1,1\n")
        code, _, err = run(capsys, "plan", "--scenario", bad)
        assert code == 1 and "start" in err


class TestSimulate:
    @pytest.mark.parametrize("strategy,expected", [("transition", 0), ("basic", 3)])
    def test_exit_codes(self, capsys, tmp_path, strategy, expected):
        code, out, _ = run(capsys, "simulate", "--strategy", strategy, "--out-dir", tmp_path)
        assert code == expected
        assert (tmp_path / f"run_{strategy}.csv").exists()
        assert (tmp_path / f"run_{strategy}.svg").read_text().startswith("<svg")
        assert f"strategy: {strategy}" in out

    def test_timeout_code(self, capsys, tmp_path, l_scenario):
        # interpolation keeps rolling into the goal; basic halts a turn distance short after the slow corner
        code, _, _ = run(capsys, "simulate", "--scenario", l_scenario, "--strategy", "interpolation",
                         "--out-dir", tmp_path)
        assert code == 0
        code, _, _ = run(capsys, "simulate", "--scenario", l_scenario, "--strategy", "basic", "--out-dir", tmp_path)
        assert code == 4
        with l_scenario.open("a") as fh:
            fh.write("sim.max_duration=1.0\n")
        code, out, _ = run(capsys, "simulate", "--scenario", l_scenario, "--strategy", "interpolation",
                           "--out-dir", tmp_path)
        assert code == 4 and "completion_time: 1.00 s" in out

    def test_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run(capsys, "simulate", "--strategy", "interpolation", "--dt", "0.05", "--seedless", "--out-dir", out)
        assert (a / "run_interpolation.csv").read_bytes() == (b / "run_interpolation.csv").read_bytes()

    def test_env_out_dir(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("ARBITER_OUT", str(tmp_path / "env"))
        run(capsys, "simulate", "--strategy", "basic")
        assert (tmp_path / "env" / "run_basic.csv").exists()

    def test_selector_flags_reach_config(self, capsys, tmp_path):
        code, out, _ = run(capsys, "simulate", "--strategy", "interpolation", "--coeff", "distance",
                           "--blend", "speed", "--out-dir", tmp_path)
        assert "strategy: interpolation" in out
        assert code in (0, 3, 4)


class TestCompare:
    def test_four_rows(self, capsys, tmp_path):
        code, out, _ = run(capsys, "compare", "--out-dir", tmp_path)
        assert code == 0
        rows = {line.split()[0]: line.split() for line in out.splitlines()[2:]}
        assert set(rows) == {s.value for s in Strategy}
        assert rows["basic"][1] == "OffRoute"
        for s in ("transition", "interpolation", "hybrid"):
            assert rows[s][1] == "Success"
        assert float(rows["interpolation"][2]) < float(rows["transition"][2])
        assert float(rows["hybrid"][4]) > max(float(rows["transition"][4]), float(rows["interpolation"][4]))
        for s in Strategy:
            assert (tmp_path / f"run_{s.value}.csv").exists()
        assert (tmp_path / "comparison.txt").read_text() == out


class TestScenario:
    def test_overrides(self, tmp_path):
        text = ("track=b.track\nstart=0,-1.25,0\ngoal=1,2\nselector.strategy=hybrid\nselector.turn_distance=4\n"
                "vehicle.max_accel=2\nsim.dt=0.02\nbehavior.FollowLane.speed=6\nbehavior.TurnRight.speed=1.5\n")
        sc = parse_scenario(text, tmp_path)
        assert sc.track_path == tmp_path / "b.track"
        assert sc.selector == {"strategy": "hybrid", "turn_distance": "4"}
        bench = load_scenario("benchmark")
        sc.track_path, sc.goal = bench.track_path, bench.goal
        p = prepare(sc)
        assert p.selector.strategy is Strategy.HYBRID and p.selector.turn_distance == 4.0
        assert p.vehicle.max_accel == 2.0 and p.sim.dt == 0.02
        assert p.behavior.v_follow == 6.0 and p.behavior.v_turn == 1.5
        assert p.behavior.wheelbase == p.vehicle.wheelbase

    @pytest.mark.parametrize("line", ["bogus=1", "selector.nope=1", "behavior.Fly.speed=2", "vehicle.wings=2"])
    def test_unknown_keys(self, line):
        bench = load_scenario("benchmark")
        with pytest.raises(ScenarioError):
            sc = parse_scenario(f"track=x\nstart=0,0,0\ngoal=0,0\n{line}\n")
            sc.track_path = bench.track_path
            prepare(sc)

    def test_bundled_benchmark_layout(self, benchmark):
        kinds = [i.kind for i in benchmark.route.instructions]
        assert kinds == [InstructionKind.TURN_RIGHT, InstructionKind.CROSS_CROSSING, InstructionKind.STOP]
        assert benchmark.route.instructions[0].anchor_arc >= 12 * benchmark.track.cell_size


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "arbiter", "plan"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0].startswith("0 TurnRight at ")
