import json

import numpy as np
import pytest
import yaml

from lrsync.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, main
from lrsync.graphs import gen_path
from lrsync.scenario import load_scenario, parse_scenario, preset_text

from conftest import EXAMPLE_A, EXAMPLE_B, EXAMPLE_E
from oracles import example_costate_exact


def write_scenario(tmp_path, name="s.yaml", **overrides):
    raw = {
        "dynamics": {"A": EXAMPLE_A, "B": EXAMPLE_B, "E": EXAMPLE_E, "s": [1.0, 1.0]},
        "protocol": {"beta": 1.0, "gamma": 13.0},
        "graph": {"kind": "random_regular", "n": 20, "d": 5, "seed": 3},
        "sim": {"t_end": 2.0, "dt": 0.001, "output_stride": 100, "init": {"kind": "random", "scale": 5.0, "seed": 3}},
        "outputs": str(tmp_path / "out"),
    }
    for key, value in overrides.items():
        raw[key] = value
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return str(path)


class TestScenarioParsing:
    def test_presets_parse(self):
        for name in ("paper-d5", "paper-d7"):
            sc = load_scenario(name)
            assert sc.protocol == {"beta": 1.0, "gamma": 13.0, "rho": 1.0}
            assert sc.graph["n"] == 150
        assert load_scenario("paper-d7").graph["d"] == 7

    def test_rho_default(self, tmp_path):
        sc = load_scenario(write_scenario(tmp_path, protocol={"beta": 2.0, "gamma": 4.0}))
        assert sc.protocol["rho"] == 0.5

    @pytest.mark.parametrize("field, value, fragment", [
        ("dynamics", {"A": [[-1, -2], [0, -1]], "B": [[1], [0]], "E": [[1, 1]], "s": [1, 1]}, "dynamics.A[0][1]"),
        ("dynamics", {"A": [[-1, 0], [0, -1]], "B": [[1], [0]], "E": [[1, 1, 1]], "s": [1, 1]}, "dynamics.E"),
        ("dynamics", {"A": [[-1, 0], [0, -1]], "B": [[1], [0]], "E": [[1, 1]], "s": [1, 0]}, "dynamics.s[1]"),
        ("protocol", {"beta": 3.0, "gamma": 2.0}, "protocol.beta"),
        ("graph", {"kind": "star", "n": 4}, "graph.kind"),
        ("sim", {"t_end": -1.0}, "sim.t_end"),
        ("sim", {"dtt": 0.1}, "sim.dtt"),
    ])
    def test_field_errors(self, tmp_path, capsys, field, value, fragment):
        path = write_scenario(tmp_path, **{field: value})
        assert main(["check", "--scenario", path]) == EXIT_ERROR
        assert fragment in capsys.readouterr().err

    def test_missing_file(self, capsys):
        assert main(["check", "--scenario", "/nonexistent/x.yaml"]) == EXIT_ERROR
        assert "--scenario" in capsys.readouterr().err

    def test_graph_file_relative(self, tmp_path):
        gen_path(3).save(tmp_path / "p3.txt")
        sc = load_scenario(write_scenario(tmp_path, graph={"file": "p3.txt"}))
        assert sc.build_graph() == gen_path(3)


class TestCheck:
    def test_example_preset(self, capsys):
        assert main(["check", "--scenario", "paper-d5"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "alpha = 14.81481481" in out
        assert "all hypotheses hold" in out

    def test_gamma_twenty(self, tmp_path, capsys):
        path = write_scenario(tmp_path, protocol={"beta": 1.0, "gamma": 20.0})
        assert main(["check", "--scenario", path]) == EXIT_FAIL
        assert "some hypotheses FAIL" in capsys.readouterr().out

    def test_non_metzler_names_entry(self, tmp_path, capsys):
        bad = {"A": [[-2.21, 2.40], [-0.43, -0.44]], "B": EXAMPLE_B, "E": EXAMPLE_E, "s": [1.0, 1.0]}
        assert main(["check", "--scenario", write_scenario(tmp_path, dynamics=bad)]) == EXIT_ERROR
        err = capsys.readouterr().err
        assert "dynamics.A[1][0]" in err and "Metzler" in err

    def test_report_file(self, tmp_path):
        out = tmp_path / "chk"
        assert main(["check", "--scenario", "paper-d5", "--out", str(out)]) == EXIT_OK
        report = json.loads((out / "check.json").read_text())
        assert report["ok"] and report["positivity"] is True


class TestSolve:
    def test_example_gain(self, tmp_path, capsys):
        out = tmp_path / "solve"
        assert main(["solve", "--scenario", "paper-d5", "--out", str(out)]) == EXIT_OK
        assert "K == E/rho: yes" in capsys.readouterr().out
        doc = json.loads((out / "regulator.json").read_text())
        assert doc["K"] == [[0.06, 0.6]]
        assert doc["K_equals_E_tilde"] is True
        assert doc["residual"] <= 1e-7
        np.testing.assert_allclose(doc["p"], [float(v) for v in example_costate_exact()], rtol=1e-9)
        assert set(doc) >= {"p", "zeta", "K", "residual", "lp_objective"}

    def test_scalar_agent(self, tmp_path):
        dyn = {"A": [[-2.0]], "B": [[1.0]], "E": [[1.0]], "s": [1.0]}
        path = write_scenario(tmp_path, dynamics=dyn, graph={"kind": "complete", "n": 2})
        assert main(["solve", "--scenario", path]) == EXIT_OK
        doc = json.loads((tmp_path / "out" / "regulator.json").read_text())
        assert doc["p"][0] == pytest.approx(1 / 3, abs=1e-12)

    def test_unstabilizable(self, tmp_path, capsys):
        dyn = {"A": [[1.0]], "B": [[1.0]], "E": [[0.0]], "s": [1.0]}
        path = write_scenario(tmp_path, dynamics=dyn, graph={"kind": "complete", "n": 2})
        assert main(["solve", "--scenario", path]) == EXIT_ERROR
        assert "stabiliz" in capsys.readouterr().err


class TestSimulate:
    ARTIFACTS = ("trajectory.csv", "metrics.json", "summary.json")

    def test_artifacts_and_verdicts(self, tmp_path):
        path = write_scenario(tmp_path)
        assert main(["simulate", "--scenario", path]) == EXIT_OK
        out = tmp_path / "out"
        for name in self.ARTIFACTS:
            assert (out / name).exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["ok"]
        assert summary["verdicts"]["modes_certified"] == 19
        assert summary["metrics"]["min_coordinate"] >= -1e-9
        assert summary["seed"] == {"graph": 3, "init": 3}
        assert len(summary["graph_sha256"]) == 64
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics) >= {"disagreement", "min_coordinate", "sync_error_vs_reference", "half_life"}

    def test_deterministic(self, tmp_path):
        path = write_scenario(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--scenario", path, "--out", str(a)]) == EXIT_OK
        assert main(["simulate", "--scenario", path, "--out", str(b)]) == EXIT_OK
        for name in self.ARTIFACTS:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_seed_override(self, tmp_path):
        path = write_scenario(tmp_path)
        assert main(["simulate", "--scenario", path, "--seed", "11", "--out", str(tmp_path / "o")]) == EXIT_OK
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["seed"] == {"graph": 11, "init": 11}

    def test_summary_round_trip(self, tmp_path):
        path = write_scenario(tmp_path)
        main(["simulate", "--scenario", path])
        echo = json.loads((tmp_path / "out" / "summary.json").read_text())["scenario"]
        assert parse_scenario(echo) == load_scenario(path)

    def test_preset_round_trip(self):
        sc = load_scenario("paper-d5")
        assert parse_scenario(yaml.safe_load(preset_text("paper-d5"))) == sc
        assert parse_scenario(json.loads(json.dumps(sc.to_dict()))) == sc

    def test_single_agent(self, tmp_path):
        path = write_scenario(tmp_path, graph={"kind": "complete", "n": 1})
        assert main(["simulate", "--scenario", path]) == EXIT_OK
        metrics = json.loads((tmp_path / "out" / "metrics.json").read_text())
        assert max(metrics["disagreement"]) == 0.0
        assert metrics["half_life"] == 0.0

    def test_batch(self, tmp_path):
        sim = {"t_end": 15.0, "output_stride": 100, "init": {"kind": "random", "seed": 0}}
        path = write_scenario(tmp_path, sim=sim)
        assert main(["simulate", "--scenario", path, "--batch", "3", "--seed", "5"]) == EXIT_OK
        batch = json.loads((tmp_path / "out" / "batch.json").read_text())
        assert [r["seed"] for r in batch["runs"]] == [5, 6, 7]
        assert batch["median_half_life"] == sorted(r["half_life"] for r in batch["runs"])[1]
        assert (tmp_path / "out" / "run-0006" / "summary.json").exists()

    def test_bad_batch(self, capsys):
        assert main(["simulate", "--scenario", "paper-d5", "--batch", "0"]) == EXIT_ERROR

    def test_hypothesis_failure_aborts(self, tmp_path, capsys):
        path = write_scenario(tmp_path, protocol={"beta": 1.0, "gamma": 20.0})
        assert main(["simulate", "--scenario", path]) == EXIT_ERROR
        assert not (tmp_path / "out" / "trajectory.csv").exists()


class TestBounds:
    def test_k4(self, capsys, tmp_path):
        assert main(["bounds", "--kind", "complete", "--n", "4", "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "bounds.json").read_text())
        assert rep["lambda2"] == pytest.approx(4, abs=1e-10)
        assert rep["lambdaN"] == pytest.approx(4, abs=1e-10)
        assert rep["anderson_morley"] == 6.0

    def test_p3(self, tmp_path):
        gen_path(3).save(tmp_path / "p3.txt")
        assert main(["bounds", "--graph-file", str(tmp_path / "p3.txt"), "--out", str(tmp_path)]) == EXIT_OK
        rep = json.loads((tmp_path / "bounds.json").read_text())
        assert rep["lambda2"] == pytest.approx(1, abs=1e-10)
        assert rep["lambdaN"] == pytest.approx(3, abs=1e-10)
        assert rep["anderson_morley"] == 3.0

    def test_regular_150(self, tmp_path, capsys):
        args = ["bounds", "--kind", "random_regular", "--n", "150", "--d", "5", "--beta", "1", "--gamma", "13", "--out", str(tmp_path)]
        assert main(args) == EXIT_OK
        rep = json.loads((tmp_path / "bounds.json").read_text())
        assert rep["anderson_morley"] == 10.0 and rep["two_d"] == 10.0
        assert rep["lambdaN"] <= 10.0 and rep["in_family"]

    def test_disconnected(self, tmp_path, capsys):
        (tmp_path / "g.txt").write_text("n 4\n0 1 1.0\n2 3 1.0\n")
        args = ["bounds", "--graph-file", str(tmp_path / "g.txt"), "--beta", "0.5", "--gamma", "3", "--out", str(tmp_path)]
        assert main(args) == EXIT_FAIL
        rep = json.loads((tmp_path / "bounds.json").read_text())
        assert abs(rep["lambda2"]) <= 1e-9 and rep["in_family"] is False and rep["connected"] is False

    def test_needs_a_graph(self, capsys):
        assert main(["bounds"]) == EXIT_ERROR
