import json

import numpy as np
import pytest
import yaml
from hypothesis import given, strategies as st

from fracreset.cli import main, run_scenario, worker_count
from fracreset.errors import SchemaViolation
from fracreset.reproduction import collect, scenario_path
from fracreset.scenario import load_scenario, parse_scenario

BUNDLED = ["example1_linear", "example1_fore", "example1_ci", "example1_fci", "example1_fi",
           "example2", "example3_fore", "example3_ci", "example3_fci"]


def minimal(**extra):
    d = {"name": "t", "plant": {"num": [1.0], "den": [1.0, 1.0]},
         "reset_element": {"kind": "CI"}, "analyses": ["stability"]}
    d.update(extra)
    return d


def write(tmp_path, data, name="s.scenario"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(data))
    return p


class TestSchema:
    @pytest.mark.parametrize("name", BUNDLED)
    def test_bundled_round_trip(self, name):
        scn = load_scenario(scenario_path(name))
        again = parse_scenario(yaml.safe_load(scn.dump()))
        assert again == scn
        assert again.dump() == scn.dump()

    @given(st.sampled_from(["CI", "FORE", "FCI", "FI"]), st.floats(0.05, 1.0),
           st.floats(0.1, 5.0), st.floats(-2, 2).filter(lambda k: abs(k) > 1e-3),
           st.lists(st.floats(0.01, 100), min_size=1, max_size=4),
           st.sampled_from(["offset", "clear", "keep"]))
    def test_round_trip(self, kind, alpha, b, K, omegas, mode):
        d = minimal(reset_element={"kind": kind, "alpha": alpha, "b": b, "K": K},
                    df={"omegas": omegas}, simulation={"memory_mode": mode, "step": 0.01},
                    analyses=["df", "stability"])
        scn = parse_scenario(d)
        assert parse_scenario(yaml.safe_load(scn.dump())) == scn

    def test_unknown_key(self):
        with pytest.raises(SchemaViolation, match="alhpa"):
            parse_scenario(minimal(reset_element={"kind": "FCI", "alhpa": 0.5}))

    def test_unknown_top_level(self):
        with pytest.raises(SchemaViolation):
            parse_scenario(minimal(extra=1))

    @pytest.mark.parametrize("alpha", [0.0, 1.5, -0.2])
    def test_order_range(self, alpha):
        with pytest.raises(SchemaViolation):
            parse_scenario(minimal(reset_element={"kind": "FCI", "alpha": alpha}))

    def test_empty_analyses(self):
        with pytest.raises(SchemaViolation):
            parse_scenario(minimal(analyses=[]))

    def test_plant_needs_one_form(self):
        with pytest.raises(SchemaViolation):
            parse_scenario(minimal(plant={"num": [1.0], "den": [1.0, 1.0], "A": [[0.0]]}))

    def test_state_space_plant(self):
        scn = parse_scenario(minimal(plant={"A": [[-1.0]], "B": [[1.0]], "C": [[1.0]]}))
        assert scn.system().n == 2

    def test_folded_controller_matches_manual(self):
        scn = load_scenario(scenario_path("example3_fore"))
        np.testing.assert_array_equal(scn.system().A_cl,
                                      [[0, 1, 0], [0, -0.2, 1], [-1, -1, -1]])


class TestRun:
    def test_alpha_out_of_range_exit_2(self, tmp_path, capsys):
        p = write(tmp_path, minimal(reset_element={"kind": "FCI", "alpha": 1.5}))
        assert main(["run", str(p), "--out-dir", str(tmp_path)]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "SchemaViolation"

    def test_io_error_exit_3(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code = main(["stability", str(scenario_path("example2")), "--out-dir",
                     str(blocker / "sub")])
        assert code == 3
        assert "error" in json.loads(capsys.readouterr().err)

    def test_missing_file_exit_3(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.scenario")]) == 3

    def test_example1_fci_metrics(self, tmp_path):
        code, res = run_scenario(scenario_path("example1_fci"), tmp_path)
        assert code == 0
        m = json.loads((tmp_path / "example1_fci_metrics.json").read_text())
        assert m["overshoot"] == pytest.approx(0.19, abs=0.05)
        assert (tmp_path / "example1_fci_trajectory.csv").exists()
        header = (tmp_path / "example1_fci_trajectory.csv").read_text().splitlines()[0]
        assert header.startswith("t,y,u_r,x_0")
        assert (tmp_path / "example1_fci_df.csv").exists()
        assert isinstance(json.loads((tmp_path / "example1_fci_resets.json").read_text()), list)

    def test_example2_stability(self, tmp_path):
        assert main(["stability", str(scenario_path("example2")), "--out-dir", str(tmp_path)]) == 0
        d = json.loads((tmp_path / "example2_stability.json").read_text())
        lo, hi = d["beta_interval"]
        assert lo == pytest.approx(-0.53, abs=0.05) and hi == pytest.approx(0.79, abs=0.05)
        assert (tmp_path / "example2_phase.csv").exists()

    def test_beta_range_override(self, tmp_path):
        main(["stability", str(scenario_path("example2")), "--beta-range", "0,0.5",
              "--out-dir", str(tmp_path)])
        d = json.loads((tmp_path / "example2_stability.json").read_text())
        assert d["beta_interval"] == [0.0, 0.5]

    def test_simulate_overrides(self, tmp_path):
        code = main(["simulate", str(scenario_path("example1_ci")), "--horizon", "2",
                     "--step", "0.01", "--memory-mode", "clear", "--out-dir", str(tmp_path)])
        assert code == 0
        m = json.loads((tmp_path / "example1_ci_metrics.json").read_text())
        assert m["horizon"] == 2.0 and m["memory_mode"] == "clear"
        assert len((tmp_path / "example1_ci_trajectory.csv").read_text().splitlines()) == 202

    def test_df_command(self, tmp_path):
        assert main(["df", "fci", "--alpha", "0.5", "--omega-range", "0.1,10,5",
                     "--out-dir", str(tmp_path)]) == 0
        rows = (tmp_path / "fci_alpha0.5_df.csv").read_text().splitlines()
        assert rows[0] == "kind,alpha,omega,re,im,mag_db,phase_deg" and len(rows) == 6

    def test_outputs_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            run_scenario(scenario_path("example3_fci"), d)
            run_scenario(scenario_path("example1_fore"), d, ["simulate", "metrics"],
                         horizon=3.0)
        for f in a.iterdir():
            ta, tb = f.read_text(), (b / f.name).read_text()
            if f.name.endswith("_stability.json"):
                ja, jb = json.loads(ta), json.loads(tb)
                ja.pop("timestamp"), jb.pop("timestamp")
                assert ja == jb
            else:
                assert ta == tb


def test_worker_count(monkeypatch):
    monkeypatch.setenv("FRAC_RESET_THREADS", "2")
    assert worker_count(9) == 2
    assert worker_count(1) == 1
    monkeypatch.delenv("FRAC_RESET_THREADS")
    assert worker_count(4) >= 1


def test_reproduce_subset_filters(tmp_path):
    rows, code = collect(["props"], tmp_path)
    assert code == 0 and rows and {r.group for r in rows} == {"props"}
    assert all(r.passed for r in rows)


def test_reproduce_exit_code_reflects_rows(tmp_path, capsys):
    code = main(["reproduce-paper", "--subset", "stab", "--out-dir", str(tmp_path)])
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert lines and all("[stab]" in l for l in lines)
    assert code == (1 if any(l.startswith("FAIL") for l in lines) else 0)
