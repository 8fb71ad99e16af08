import csv
import json
import math
import subprocess
import sys

import pytest

from ctmdp_reach import Query, dump_model, gu_solve, load_model
from ctmdp_reach.cli import SWEEP_COLUMNS, main
from conftest import make_m1, make_race


@pytest.fixture
def m1_files(tmp_path):
    model, goal = make_m1()
    model_path = tmp_path / "m1.json"
    dump_model(model, model_path)
    goal_path = tmp_path / "m1.goal.json"
    goal_path.write_text(json.dumps({"goal": sorted(goal.goal_states)}))
    return str(model_path), str(goal_path)


@pytest.fixture
def race_files(tmp_path):
    model, goal = make_race()
    model_path = tmp_path / "race.json"
    dump_model(model, model_path)
    return str(model_path), sorted(goal.goal_states)


class TestSolve:
    def test_happy_path(self, m1_files, capsys):
        model_path, _ = m1_files
        code = main(["solve", model_path, "--goal", "1", "-T", "1",
                     "--eps", "1e-3", "--variant", "late"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["value"]["0"] - (1 - math.exp(-1))) <= 1e-3
        assert doc["variant"] == "late"
        assert doc["objective"] == "max"

    def test_goal_file_and_output_files(self, m1_files, tmp_path, capsys):
        model_path, goal_path = m1_files
        out = tmp_path / "result.json"
        sched_out = tmp_path / "sched.json"
        code = main(["solve", model_path, "--goal-file", goal_path, "-T", "1",
                     "--eps", "1e-3", "--out", str(out),
                     "--scheduler-out", str(sched_out)])
        assert code == 0
        assert capsys.readouterr().out == ""
        doc = json.loads(out.read_text())
        assert abs(doc["value"]["0"] - (1 - math.exp(-1))) <= 1e-3
        sched = json.loads(sched_out.read_text())
        assert set(sched) == {"depth", "tail", "decisions"}

    def test_missing_goal_is_input_error(self, m1_files, capsys):
        model_path, _ = m1_files
        code = main(["solve", model_path, "-T", "1"])
        assert code == 1
        assert "goal set required" in capsys.readouterr().err

    def test_zero_eps_is_input_error(self, m1_files, capsys):
        model_path, _ = m1_files
        code = main(["solve", model_path, "--goal", "1", "-T", "1", "--eps", "0"])
        assert code == 1
        assert "epsilon" in capsys.readouterr().err

    def test_malformed_model_is_input_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{не json")
        code = main(["solve", str(bad), "--goal", "0", "-T", "1"])
        assert code == 1
        assert "not valid JSON" in capsys.readouterr().err

    def test_rate_cap_abort_prints_bounds_and_exits_2(self, race_files, capsys):
        model_path, goal = race_files
        code = main(["solve", model_path, "--goal", "1", "-T", "1",
                     "--eps", "1e-4", "--lambda-cap-doublings", "1"])
        captured = capsys.readouterr()
        assert code == 2
        assert "lambda cap exceeded" in captured.err
        doc = json.loads(captured.out)
        assert doc["lower"]["0"] <= doc["upper"]["0"]


class TestGenAndRoundTrip:
    def test_gen_writes_model_and_goal(self, tmp_path, capsys):
        out = tmp_path / "sjs.json"
        code = main(["gen", "sjs", "--processors", "2", "--rates", "1,2,3",
                     "--out", str(out)])
        assert code == 0
        model = load_model(out)
        assert model.num_states == 8
        goal_doc = json.loads((tmp_path / "sjs.goal.json").read_text())
        assert goal_doc["goal"] == [7]

    def test_gen_to_stdout(self, capsys):
        code = main(["gen", "grid", "--states", "3", "--rate", "1.0"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["states"] == 3

    def test_gen_solve_round_trip_matches_in_memory(self, tmp_path, capsys):
        out = tmp_path / "sjs.json"
        main(["gen", "sjs", "--processors", "2", "--rates", "1,2,3", "--out", str(out)])
        capsys.readouterr()
        code = main(["solve", str(out), "--goal-file", str(tmp_path / "sjs.goal.json"),
                     "-T", "1", "--eps", "1e-6"])
        assert code == 0
        from_cli = json.loads(capsys.readouterr().out)["value"]["0"]

        from ctmdp_reach import SjsParams, generate_sjs
        model, goal = generate_sjs(SjsParams(2, (1.0, 2.0, 3.0)))
        result, _ = gu_solve(model, goal, Query(time_bound=1.0, epsilon=1e-6))
        assert from_cli == float(result.lower[0])

    def test_gen_size_guard_is_input_error(self, capsys):
        code = main(["gen", "sjs", "--processors", "2", "--rates",
                     ",".join(["1"] * 9), "--max-states", "100"])
        assert code == 1
        assert "too large" in capsys.readouterr().err


class TestSweep:
    def test_row_count_matches_grid(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--gen", "grid:3:1.0", "--gen", "sjs:1:2,1",
                     "--T-grid", "0.5,1.0,2.0", "--eps-grid", "1e-3,1e-6",
                     "--variants", "late,early", "--objectives", "max",
                     "--out", str(out)])
        assert code == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[0] == SWEEP_COLUMNS
        assert len(rows) - 1 == 2 * 3 * 2 * 2

    def test_values_in_the_csv_solve_correctly(self, tmp_path):
        out = tmp_path / "sweep.csv"
        main(["sweep", "--gen", "grid:3:1.0", "--T-grid", "1.0",
              "--eps-grid", "1e-6", "--out", str(out)])
        rows = list(csv.DictReader(out.read_text().splitlines()))
        assert len(rows) == 1
        assert abs(float(rows[0]["value"]) - 0.2642411176571153) <= 1e-6
        assert float(rows[0]["gap"]) <= 1e-6
        assert rows[0]["model"] == "grid:3:1.0"

    def test_reruns_are_byte_identical_modulo_wall_seconds(self, tmp_path):
        args = ["sweep", "--gen", "sjs:2:1,2,3", "--gen", "grid:4:2.0",
                "--T-grid", "0.5,1.0", "--eps-grid", "1e-4",
                "--variants", "late,early", "--objectives", "max,min"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        strip = lambda text: [
            ",".join(line.split(",")[:-1]) for line in text.splitlines()
        ]
        a, b = strip(out1.read_text()), strip(out2.read_text())
        assert a == b
        assert out1.read_text() != out2.read_text()  # wall clock did differ

    def test_empty_sweep_is_input_error(self, capsys):
        code = main(["sweep", "--T-grid", "1.0"])
        assert code == 1
        assert "nothing to sweep" in capsys.readouterr().err


class TestUniformiseCommand:
    def test_dumps_model_and_mapping(self, tmp_path, capsys):
        from conftest import make_m2
        from ctmdp_reach import dump_model, load_model, validate, exit_rate, enabled_actions
        model, _ = make_m2()
        model_path = tmp_path / "m2.json"
        dump_model(model, model_path)
        out = tmp_path / "uni.json"
        code = main(["uniformise", str(model_path), "--goal", "1",
                     "--variant", "early", "--rate", "4.0", "--out", str(out)])
        assert code == 0
        uni = load_model(out)
        assert not validate(uni)
        for s in range(uni.num_states):
            for a in enabled_actions(uni, s):
                assert exit_rate(uni, s, a) == pytest.approx(4.0, rel=1e-9)
        mapping = json.loads((tmp_path / "uni.map.json").read_text())
        assert mapping["lambda"] == 4.0
        assert mapping["variant"] == "early"
        assert mapping["entry_state_of"] == [0, 1]
        assert len(mapping["origin_of"]) == uni.num_states

    def test_defaults_to_max_exit_rate_on_stdout(self, m1_files, capsys):
        model_path, _ = m1_files
        code = main(["uniformise", model_path, "--goal", "1"])
        assert code == 0
        captured = capsys.readouterr()
        doc = json.loads(captured.out)
        assert doc["states"] == 2
        assert "mapping" in captured.err


class TestSimulateCommand:
    def test_scheduler_policy(self, m1_files, capsys):
        model_path, _ = m1_files
        code = main(["simulate", model_path, "--goal", "1", "-T", "1",
                     "--eps", "1e-3", "--runs", "20000", "--seed", "9"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["estimate"] - (1 - math.exp(-1))) <= 3 * doc["half_width"] + 1e-3
        assert doc["runs"] == 20000 and doc["seed"] == 9

    def test_fixed_policy_with_table(self, tmp_path, capsys):
        from ctmdp_reach import dump_model
        from conftest import make_m2
        model, _ = make_m2()
        model_path = tmp_path / "m2.json"
        dump_model(model, model_path)
        table = tmp_path / "policy.json"
        table.write_text(json.dumps({"0": 1, "1": 0}))
        code = main(["simulate", str(model_path), "--goal", "1", "-T", "1",
                     "--policy", "fixed", "--policy-table", str(table),
                     "--runs", "20000", "--seed", "3"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["estimate"] - (1 - math.exp(-1))) <= 3 * doc["half_width"]

    def test_csv_row_appended(self, m1_files, tmp_path, capsys):
        model_path, _ = m1_files
        csv_path = tmp_path / "sim.csv"
        for _ in range(2):
            assert main(["simulate", model_path, "--goal", "1", "-T", "1",
                         "--eps", "1e-3", "--runs", "100", "--seed", "1",
                         "--csv", str(csv_path)]) == 0
        capsys.readouterr()
        rows = csv_path.read_text().splitlines()
        assert len(rows) == 2
        assert rows[0] == rows[1]

    def test_early_variant_scheduler_policy(self, tmp_path, capsys):
        from ctmdp_reach import dump_model
        from conftest import make_m2
        model, _ = make_m2()
        model_path = tmp_path / "m2.json"
        dump_model(model, model_path)
        code = main(["simulate", str(model_path), "--goal", "1", "-T", "1",
                     "--variant", "early", "--eps", "1e-3",
                     "--runs", "20000", "--seed", "17"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["estimate"] - (1 - math.exp(-2.0))) <= 3 * doc["half_width"] + 1e-3

    def test_initial_state_flag(self, m1_files, capsys):
        model_path, _ = m1_files
        code = main(["simulate", model_path, "--goal", "1", "-T", "1",
                     "--eps", "1e-3", "--runs", "50", "--seed", "2",
                     "--initial", "1"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["estimate"] == 1.0  # starts inside the goal set

    def test_identical_seeds_identical_output(self, m1_files, capsys):
        model_path, _ = m1_files
        args = ["simulate", model_path, "--goal", "1", "-T", "1",
                "--eps", "1e-3", "--runs", "5000", "--seed", "31"]
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        assert capsys.readouterr().out == first


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "ctmdp_reach.cli", "poisson",
         "--rate-time", "1.0", "--delta", "1e-6"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    lines = proc.stdout.splitlines()
    assert lines[0] == "i,weight"
    assert len(lines) == 23  # header plus 22 weights
    assert float(lines[1].split(",")[1]) == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert "depth=22" in proc.stderr
