import csv
import gzip
import json
from pathlib import Path

import pytest

from jumpwheel import COLUMNS
from jumpwheel.cli import main
from jumpwheel.config import default_config, load_config, resolve

GOLDEN = Path(__file__).parent / "golden" / "vertical_dt1e-3.csv.gz"
FAST = ["--set", "sim.dt=0.001"]


def run(tmp_path, *argv):
    out = tmp_path / "out"
    return main(["run", *argv, "--out", str(out)]), out


def test_run_vertical(tmp_path, capsys):
    code, out = run(tmp_path, "--scenario", "vertical", *FAST)
    assert code == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("jumps=1 ") and "end=first landing" in line
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["jumps"][0]["takeoff_time"] > 5.2
    assert metrics["terminated_by"] == "first landing"
    assert metrics["impact_model"] is False
    diag = json.loads((out / "diagnostics.json").read_text())
    assert diag["flight_parabola_residual_m"] < 1e-6  # coarse dt


def test_run_horizontal(tmp_path, capsys):
    code, out = run(tmp_path, "--scenario", "horizontal", *FAST)
    assert code == 0
    assert "wheel_speed@3.75s=" in capsys.readouterr().out
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["ramp_end_time"] == 3.75
    assert abs(metrics["ramp_end_wheel_speed"]) == pytest.approx(23, abs=3)


def test_negative_mass(tmp_path, capsys):
    code, out = run(tmp_path, "--set", "robot.m_o=-0.5")
    assert code == 2
    assert "m_o" in capsys.readouterr().err
    assert not out.exists()


@pytest.mark.parametrize(
    "argv, key",
    [
        (["--set", "robot.mass=1"], "robot.mass"),
        (["--set", "profile.segments.0.kind=\"sine\""], "profile.segments.0.kind"),
        (["--set", "sim.dt"], "sim.dt"),
    ],
)
def test_config_errors_name_key(tmp_path, capsys, argv, key):
    code, _ = run(tmp_path, *argv)
    assert code == 2
    assert key in capsys.readouterr().err


def test_unknown_key_in_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"controller": {"gain": 1.0}}))
    code, _ = run(tmp_path, "--config", str(cfg))
    assert code == 2
    assert "controller.gain" in capsys.readouterr().err


def test_numerical_failure_exit(tmp_path):
    code, _ = run(tmp_path, "--set", "sim.max_events=0", *FAST)
    assert code == 3


@pytest.mark.parametrize("scenario", ["vertical", "horizontal"])
def test_dump_config_round_trip(tmp_path, capsys, scenario):
    assert main(["run", "--scenario", scenario, "--set", "controller.kp=0.05", "--dump-config"]) == 0
    dumped = capsys.readouterr().out
    path = tmp_path / "echo.json"
    path.write_text(dumped)
    assert main(["run", "--config", str(path), "--dump-config"]) == 0
    assert capsys.readouterr().out == dumped
    assert resolve(load_config(path)) == resolve(json.loads(dumped))


def test_csv_schema(tmp_path):
    _, out = run(tmp_path, *FAST)
    with open(out / "trajectory.csv") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        first = next(reader)
    assert tuple(header) == COLUMNS
    assert first[COLUMNS.index("phase")] == "0"
    assert first[COLUMNS.index("lambda2")] == "5.8860000000000001"


def test_golden_file(tmp_path):
    _, out = run(tmp_path, "--scenario", "vertical", *FAST)
    assert (out / "trajectory.csv").read_bytes() == gzip.decompress(GOLDEN.read_bytes())


def test_outputs_can_be_disabled(tmp_path):
    _, out = run(tmp_path, *FAST, "--set", "output.trajectory_csv=false", "--set", "output.diagnostics_json=false")
    assert sorted(p.name for p in out.iterdir()) == ["metrics.json"]


class TestSweep:
    def read(self, out):
        with open(out / "sweep.csv") as fh:
            return list(csv.DictReader(fh))

    def test_single_cell_matches_run(self, tmp_path):
        out = tmp_path / "sweep"
        argv = ["--scenario", "vertical", *FAST, "--grid", "controller.kp=0.03", "--out", str(out), "--workers", "1"]
        assert main(["sweep", *argv]) == 0
        (row,) = self.read(out)
        _, run_out = run(tmp_path, "--scenario", "vertical", *FAST)
        jump = json.loads((run_out / "metrics.json").read_text())["jumps"][0]
        assert row["status"] == "ok" and row["n_jumps"] == "1"
        for key in ("takeoff_time", "apex_height_bl", "horizontal_span_m"):
            assert float(row[key]) == jump[key]

    def test_spike_grid(self, tmp_path):
        out = tmp_path / "sweep"
        argv = ["--grid", "profile.segments.2.value=100,150,200", *FAST, "--out", str(out), "--workers", "2"]
        assert main(["sweep", *argv]) == 0
        rows = self.read(out)
        assert [r["profile.segments.2.value"] for r in rows] == ["100", "150", "200"]
        assert all(r["status"] == "ok" for r in rows)

    def test_parallel_matches_serial(self, tmp_path):
        grid = ["--grid", "controller.kp=0.02,0.03", "--grid", "robot.mu=0.5,0.8", *FAST]
        main(["sweep", *grid, "--out", str(tmp_path / "a"), "--workers", "1"])
        main(["sweep", *grid, "--out", str(tmp_path / "b"), "--workers", "3"])
        assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()

    def test_failed_cells_recorded(self, tmp_path):
        out = tmp_path / "sweep"
        argv = ["--grid", "robot.m_o=-1,0.475", *FAST, "--out", str(out), "--workers", "1"]
        assert main(["sweep", *argv]) == 0
        bad, good = self.read(out)
        assert bad["status"] == "error" and "m_o" in bad["error"]
        assert good["status"] == "ok"

    def test_all_cells_fail(self, tmp_path):
        argv = ["--grid", "robot.m_o=-1,-2", "--out", str(tmp_path / "s"), "--workers", "1"]
        assert main(["sweep", *argv]) == 1

    def test_string_values(self, tmp_path):
        out = tmp_path / "sweep"
        argv = ["--grid", "profile.name=vertical,horizontal", *FAST, "--out", str(out), "--workers", "1"]
        assert main(["sweep", *argv]) == 0
        assert [r["status"] for r in self.read(out)] == ["ok", "ok"]

    @pytest.mark.parametrize("argv", [[], ["--grid", "controller.kp="], ["--grid", "kp"]])
    def test_bad_grid(self, tmp_path, argv):
        assert main(["sweep", *argv, "--out", str(tmp_path / "s")]) == 2

    def test_spec_file(self, tmp_path):
        spec = tmp_path / "grid.json"
        spec.write_text(json.dumps({"controller.kp": [0.03]}))
        out = tmp_path / "sweep"
        assert main(["sweep", "--spec", str(spec), *FAST, "--out", str(out), "--workers", "1"]) == 0
        assert len(self.read(out)) == 1


def test_default_config_is_complete():
    cfg = default_config("horizontal")
    assert set(cfg) == {"robot", "controller", "profile", "sim", "output"}
    assert resolve(cfg).profile_name == "horizontal"
