import csv
import json

import numpy as np
import pytest

from conftest import EXAMPLE1, EXAMPLE1_PI
from stairsolve import main
from stairsolve.bench import read_json
from stairsolve.mmio import load_matrix_market, write_matrix_market


@pytest.fixture
def example_file(tmp_path):
    """The 4-state example chain as a Matrix Market file."""
    path = tmp_path / "example.mtx"
    write_matrix_market(EXAMPLE1, path)
    return path


def _last_json_line(text: str) -> dict:
    return json.loads(text.strip().splitlines()[-1])


@pytest.mark.integration
class TestCli:
    """Test suite for the command-line front end."""

    def test_generate_mutex(self, tmp_path):
        """Test generate writing the matrix and its sidecar."""
        out = tmp_path / "mutex.mtx"
        main(["--out", str(out), "generate", "--model", "mutex", "--params", "n=3", "--params", "r=2"])
        assert load_matrix_market(out).shape == (7, 7)
        sidecar = json.loads((tmp_path / "mutex.mtx.json").read_text())
        assert sidecar["model"] == "mutex"
        assert sidecar["N"] == 7
        assert sidecar["params"]["lam"] == [1.0, 1.0, 1.0]

    def test_generate_mutex_per_process_rates(self, tmp_path):
        """Test per-process rates separated by semicolons on the command line."""
        out = tmp_path / "mutex.mtx"
        main(["--out", str(out), "generate", "--model", "mutex", "--params", "n=3", "--params", "r=2", "--params", "lam=1;2;3"])
        sidecar = json.loads((tmp_path / "mutex.mtx.json").read_text())
        assert sidecar["params"]["lam"] == [1.0, 2.0, 3.0]

    def test_generate_hess_uses_global_seed(self, tmp_path):
        """Test that --seed feeds random models."""
        out = tmp_path / "hess.mtx"
        main(["--seed", "11", "--out", str(out), "generate", "--model", "hess", "--params", "k=2", "--params", "n=3"])
        sidecar = json.loads((tmp_path / "hess.mtx.json").read_text())
        assert sidecar["seed"] == 11
        assert sidecar["N"] == 6

    def test_generate_from_params_file(self, tmp_path):
        """Test a YAML parameter file overridden by --params."""
        params = tmp_path / "ncd.yaml"
        params.write_text("groups: 3\ngroup_size: 4\ncoupling: 1.0e-3\n")
        out = tmp_path / "ncd.mtx"
        main(["--out", str(out), "generate", "--model", "ncd", "--params-file", str(params), "--params", "groups=2"])
        assert load_matrix_market(out).shape == (8, 8)

    def test_generate_needs_out(self):
        """Test exit code 1 without --out."""
        with pytest.raises(SystemExit) as e:
            main(["generate", "--model", "mutex", "--params", "n=2", "--params", "r=1"])
        assert e.value.code == 1

    def test_solve(self, example_file, tmp_path, capsys):
        """Test solve writing pi and a JSON summary."""
        pi_path = tmp_path / "pi.txt"
        history = tmp_path / "history.csv"
        main([
            "--block-size", "1", "--threads", "2", "--out", str(pi_path),
            "solve", "--matrix", str(example_file), "--method", "stair1", "--history", str(history),
        ])
        summary = _last_json_line(capsys.readouterr().out)
        assert summary["converged"] is True
        assert summary["method"] == "stair1"
        assert summary["blocks"] == 4
        np.testing.assert_allclose(np.loadtxt(pi_path), EXAMPLE1_PI, atol=1e-9)
        assert history.exists()

    def test_solve_clips_block_size(self, example_file):
        """Test that a block size above N becomes a single block, which cannot be factored."""
        with pytest.raises(SystemExit) as e:
            main(["--block-size", "64", "solve", "--matrix", str(example_file)])
        assert e.value.code == 1

    def test_solve_not_converged_is_not_an_error(self, example_file, capsys):
        """Test exit code 0 when maxit is reached."""
        main(["--block-size", "1", "--maxit", "2", "--tol", "1e-15", "solve", "--matrix", str(example_file), "--method", "stair1"])
        summary = _last_json_line(capsys.readouterr().out)
        assert summary["converged"] is False
        assert summary["iterations"] == 2

    def test_solve_missing_file(self, tmp_path):
        """Test exit code 1 for a missing matrix file."""
        with pytest.raises(SystemExit) as e:
            main(["solve", "--matrix", str(tmp_path / "nope.mtx")])
        assert e.value.code == 1

    def test_solve_rejects_bad_chain(self, tmp_path):
        """Test exit code 1 for a matrix that is not a generator."""
        path = tmp_path / "bad.mtx"
        write_matrix_market(np.array([[1.0, 0.5], [-1.0, -0.5]]), path)
        with pytest.raises(SystemExit) as e:
            main(["--block-size", "1", "solve", "--matrix", str(path)])
        assert e.value.code == 1

    def test_spectrum(self, example_file, tmp_path):
        """Test the spectrum report."""
        out = tmp_path / "spectrum.json"
        main(["--block-size", "1", "--out", str(out), "spectrum", "--matrix", str(example_file), "--methods", "bgs", "--methods", "bj"])
        payload = json.loads(out.read_text())
        gammas = {r["method"]: r["gamma"] for r in payload["reports"]}
        assert gammas["bgs"] == pytest.approx(0.25, abs=1e-10)
        assert gammas["bj"] == pytest.approx(1.0, abs=1e-10)

    def test_table1(self, tmp_path):
        """Test a tiny table1 run."""
        out = tmp_path / "table1.csv"
        main(["--out", str(out), "table1", "--trials", "2", "-k", "3", "-n", "4", "--kp", "3", "--lower-bandwidth", "2"])
        with open(out) as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["kp", "k", "n", "trials", "max_rho1", "max_rho2"]
        assert rows[1][:4] == ["3", "3", "4", "2"]

    def test_bench(self, tmp_path):
        """Test bench rows for two methods and two worker counts."""
        matrix = tmp_path / "hess.mtx"
        main(["--out", str(matrix), "generate", "--model", "hess", "--params", "k=4", "--params", "n=6"])
        out = tmp_path / "bench.json"
        main([
            "--block-size", "4", "--maxit", "300", "--out", str(out),
            "bench", "--matrix", str(matrix), "--methods", "bgs", "--methods", "stair1",
            "--threads-list", "1", "--threads-list", "2", "--repeats", "1",
        ])
        records = read_json(out)
        assert [(r.method, r.m) for r in records] == [("bgs", 1), ("bgs", 2), ("stair1", 1), ("stair1", 2)]
        assert all(r.matrix == "hess" for r in records)
