import json
import shutil
import subprocess

import numpy as np
import pytest

import rootflow.harness
from rootflow.cli import main
from rootflow.errors import NumericalFailure

UNIFORM = '{"kind": "cdf", "knots": [[0, 0], [1, 1]]}'


def _config(tmp_path, **doc):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return str(path)


class TestRun:
    def test_passing_check(self, tmp_path, capsys):
        cfg = _config(tmp_path, experiment="circular", n=3, m=4, steps=[0, 3])
        assert main(["run", cfg, "--check"]) == 0
        out = capsys.readouterr().out
        assert "PASS geometric_mean_drift" in out
        assert out.rstrip().endswith("circular: passed (3 checks)")

    def test_threshold_failure(self, tmp_path, capsys):
        # eight circles are far too few for the limit law
        cfg = _config(tmp_path, experiment="radial", n=8, m=2, t=0.75)
        assert main(["run", cfg, "--check"]) == 4
        assert "FAIL" in capsys.readouterr().out
        assert main(["run", cfg]) == 0

    def test_config_error(self, tmp_path, capsys):
        assert main(["run", _config(tmp_path, experiment="radial", t=2.0)]) == 2
        assert "config error" in capsys.readouterr().err
        assert main(["run", str(tmp_path / "missing.json")]) == 2

    def test_numerical_failure(self, tmp_path, monkeypatch, capsys):
        def broken(config):
            raise NumericalFailure("no convergence")

        monkeypatch.setattr(rootflow.harness, "run_experiment", broken)
        assert main(["run", _config(tmp_path, experiment="circular")]) == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_writes_outputs(self, tmp_path):
        out = tmp_path / "out"
        cfg = _config(tmp_path, experiment="circular", n=2, m=3, steps=[0, 1], output_dir=str(out))
        assert main(["run", cfg]) == 0
        assert (out / "report.json").exists() and (out / "manifest.json").exists()


class TestQuantile:
    def test_uniform_grid(self, capsys):
        assert main(["quantile", "--measure", UNIFORM, "--t", "0.5", "--grid", "4"]) == 0
        lines = capsys.readouterr().out.split()
        assert lines[0] == "x,quantile"
        rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        np.testing.assert_allclose(rows[:, 0], [0.0, 0.125, 0.25, 0.375, 0.5])
        # the uniform law is a fixed point: q(x) = x
        np.testing.assert_allclose(rows[:, 1], rows[:, 0], atol=1e-12)

    def test_measure_from_file(self, tmp_path, capsys):
        path = tmp_path / "mu.json"
        path.write_text('{"kind": "dirac", "at": 1.0}')
        assert main(["quantile", "--measure", str(path), "--t", "0.5", "--grid", "2"]) == 0
        last = capsys.readouterr().out.split()[-1]
        # q(x) = x / (x + t) at x = 1 - t
        assert last == "0.5,0.5"

    @pytest.mark.parametrize(
        "args",
        [
            ["--measure", "{bad", "--t", "0.5", "--grid", "4"],
            ["--measure", '{"kind": "dirac", "at": -1}', "--t", "0.5", "--grid", "4"],
            ["--measure", UNIFORM, "--t", "1.0", "--grid", "4"],
            ["--measure", UNIFORM, "--t", "0.5", "--grid", "0"],
        ],
    )
    def test_bad_arguments(self, args):
        assert main(["quantile", *args]) == 2


class TestLevy:
    def test_shifted_samples(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        a.write_text("radius\n0.0\n1.0\n")
        b.write_text("radius\n0.25\n1.25\n")
        assert main(["levy", str(a), str(b)]) == 0
        assert float(capsys.readouterr().out) == pytest.approx(0.25)

    def test_missing_file(self, tmp_path):
        a = tmp_path / "a.csv"
        a.write_text("1\n")
        assert main(["levy", str(a), str(tmp_path / "b.csv")]) == 2


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


@pytest.mark.skipif(shutil.which("rootflow") is None, reason="console script not installed")
def test_console_script(tmp_path):
    cfg = _config(tmp_path, experiment="radial", n=8, m=2, t=0.75)
    done = subprocess.run(["rootflow", "run", cfg, "--check"], capture_output=True, text=True)
    assert done.returncode == 4
