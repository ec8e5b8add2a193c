"""Command-line interface: outputs, overrides, exit codes, determinism."""

import json
import subprocess
import sys

import pytest
import yaml
from click.testing import CliRunner

from trackgame.cli import main, parse_selector
from trackgame.errors import ScenarioError

SMALL_SCN = """
radars: [[-10.0, 0.0], [3.0, 0.0], [10.0, 0.0]]
targets:
  - [1.0, 6.0, 0.5, 0.1]
  - [0.5, 7.0, 0.35, -0.1]
  - [1.5, 3.0, -0.3, 0.0]
  - [2.0, 4.0, -0.2, 0.1]
m: 1
seed: 7
horizon: 10
realizations: 2
"""


@pytest.fixture
def scn(tmp_path):
    p = tmp_path / "small.scn"
    p.write_text(SMALL_SCN)
    return p


def invoke(args, **kw):
    return CliRunner().invoke(main, args, **kw)


class TestParseSelector:
    def test_shorthands(self):
        assert parse_selector("lcbrd-K10").kind == "lcbrd"
        assert parse_selector("lcbrd-K10").K == 10
        assert parse_selector("eps-lcbrd").epsilon == pytest.approx(0.02)
        assert parse_selector("rm").kind == "rm"
        assert parse_selector("random").K == 1
        assert parse_selector("random-K10").K == 10
        assert parse_selector("standalone").kind == "standalone"
        ex = parse_selector("exhaustive-K10")
        assert ex.kind == "centralized" and ex.K == 10
        assert parse_selector("exhaustive").K == 1

    def test_rejects_unknown(self):
        with pytest.raises(ScenarioError):
            parse_selector("clairvoyant")


class TestRun:
    def test_writes_csv_and_manifest(self, scn, tmp_path):
        out = tmp_path / "out"
        res = invoke(["run", "--scenario", str(scn), "--out", str(out)])
        assert res.exit_code == 0, res.output
        csv_path = out / "lcbrd_aggregate.csv"
        assert csv_path.exists()
        header = csv_path.read_text().splitlines()[0]
        assert header == "k,metric,u_0,u_1,u_2,nash_flag,max_avg_regret"
        assert len(csv_path.read_text().splitlines()) == 11
        manifest = yaml.safe_load((out / "manifest.yaml").read_text())
        assert manifest["command"] == "run"
        assert manifest["config"]["seed"] == 7
        assert manifest["config"]["m"] == 1
        assert "lcbrd_aggregate.csv" in manifest["outputs"]

    def test_overrides_recorded(self, scn, tmp_path):
        out = tmp_path / "out"
        res = invoke([
            "run", "--scenario", str(scn), "--out", str(out),
            "--selector", "random-K1", "--seed", "11", "--horizon", "5",
            "--realizations", "1",
        ])
        assert res.exit_code == 0, res.output
        manifest = yaml.safe_load((out / "manifest.yaml").read_text())
        assert manifest["overrides"] == {
            "selector": "random-K1", "seed": 11, "horizon": 5, "realizations": 1,
        }
        assert manifest["config"]["seed"] == 11
        assert (out / "random-K1_aggregate.csv").exists()

    def test_byte_identical_repeat(self, scn, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            res = invoke(["run", "--scenario", str(scn), "--out", str(out)])
            assert res.exit_code == 0, res.output
        assert (a / "lcbrd_aggregate.csv").read_bytes() == (
            b / "lcbrd_aggregate.csv"
        ).read_bytes()

    def test_save_realizations(self, scn, tmp_path):
        out = tmp_path / "out"
        res = invoke([
            "run", "--scenario", str(scn), "--out", str(out), "--save-realizations",
        ])
        assert res.exit_code == 0, res.output
        assert (out / "lcbrd_r000.csv").exists()
        assert (out / "lcbrd_r001.csv").exists()

    def test_env_var_out_dir(self, scn, tmp_path, monkeypatch):
        env_out = tmp_path / "envout"
        res = invoke(
            ["run", "--scenario", str(scn)],
            env={"TRACKGAME_OUT": str(env_out)},
        )
        assert res.exit_code == 0, res.output
        assert (env_out / "manifest.yaml").exists()


class TestCompareAndSweep:
    def test_compare_menu(self, scn, tmp_path):
        out = tmp_path / "out"
        res = invoke([
            "compare", "--scenario", str(scn), "--out", str(out),
            "--selector", "standalone,random-K1",
        ])
        assert res.exit_code == 0, res.output
        assert (out / "standalone_aggregate.csv").exists()
        assert (out / "random-K1_aggregate.csv").exists()
        assert "ordering (best first):" in res.output

    def test_sweep_csv(self, tmp_path):
        out = tmp_path / "out"
        res = invoke([
            "sweep", "--out", str(out), "--spreads", "1,2",
            "--selector", "random-K1", "--horizon", "5", "--realizations", "1",
        ])
        assert res.exit_code == 0, res.output
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "spread,random-K1"
        assert len(lines) == 3


class TestAnalyze:
    def test_reports_equilibria(self, scn):
        res = invoke(["analyze", "--scenario", str(scn)])
        assert res.exit_code == 0, res.output
        assert "pure Nash equilibria:" in res.output
        assert "welfare optimum:" in res.output
        assert "price of anarchy:" in res.output

    def test_check_profile(self, scn, tmp_path):
        prof = tmp_path / "prof.json"
        prof.write_text(json.dumps([[1, 0, 0, 0]] * 3))
        res = invoke(["analyze", "--scenario", str(scn), "--check-profile", str(prof)])
        assert res.exit_code == 0, res.output
        assert "checked profile:" in res.output


class TestExitCodes:
    def run_entry(self, args, cwd):
        return subprocess.run(
            [sys.executable, "-m", "trackgame.cli", *args],
            capture_output=True, text=True, cwd=cwd,
        )

    def test_config_error_is_2(self, tmp_path):
        bad = tmp_path / "bad.scn"
        bad.write_text("radars: []\nm: 1\n")
        r = self.run_entry(["run", "--scenario", str(bad)], tmp_path)
        assert r.returncode == 2
        assert "configuration error" in r.stderr

    def test_missing_file_is_2(self, tmp_path):
        r = self.run_entry(["run", "--scenario", str(tmp_path / "nope.scn")], tmp_path)
        assert r.returncode == 2

    def test_unknown_preset_is_2(self, tmp_path):
        r = self.run_entry(["run", "--preset", "fig99"], tmp_path)
        assert r.returncode == 2

    def test_too_large_is_4(self, tmp_path):
        # 5 radars x 12 targets with exhaustive centralized planning blows
        # past the joint-enumeration cap
        big = {
            "radars": [[float(x), 0.0] for x in range(5)],
            "targets": [[float(j), 5.0, 0.1, 0.0] for j in range(12)],
            "m": 4,
            "horizon": 2,
            "selector": {"kind": "centralized", "K": 1},
        }
        p = tmp_path / "big.scn"
        p.write_text(yaml.safe_dump(big))
        r = self.run_entry(["run", "--scenario", str(p)], tmp_path)
        assert r.returncode == 4
        assert "instance too large" in r.stderr

    def test_numerical_failure_is_3(self, scn, tmp_path, monkeypatch, capsys):
        import trackgame.cli as cli
        from trackgame.errors import NumericalSingularityError

        def boom(*a, **k):
            raise NumericalSingularityError("innovation covariance singular")

        monkeypatch.setattr(cli, "run_monte_carlo", boom)
        monkeypatch.setattr(
            sys, "argv",
            ["trackgame", "run", "--scenario", str(scn), "--out", str(tmp_path / "o")],
        )
        assert cli.entry() == 3
        assert "numerical failure" in capsys.readouterr().err
