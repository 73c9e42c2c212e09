import json

import numpy as np
import pytest

from smallball.cli import main, parse_config_text
from smallball.grids import read_sample_csv


def run_cli(*argv) -> int:
    return main(list(argv))


class TestConfigParsing:
    def test_parses_pairs_and_comments(self):
        cfg = parse_config_text("# comment\nprocess = sine\nn=50 # trailing\n\nseed = 7\n")
        assert cfg == {"process": "sine", "n": "50", "seed": "7"}

    def test_rejects_bare_line(self):
        from smallball.cli import CliError

        with pytest.raises(CliError, match="line 2"):
            parse_config_text("a = 1\nnot a pair\n")


class TestSimulate:
    def test_writes_sample_and_manifest(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("process = wiener\nJ = 20\nn = 15\n")
        out = tmp_path / "run"
        assert run_cli("simulate", "--config", str(cfg), "--seed", "3", "--out", str(out)) == 0
        sample = read_sample_csv(out / "sample.csv")
        assert sample.n == 15 and sample.grid.size == 100
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 3
        assert "sample.csv" in manifest["outputs"]

    def test_requires_seed(self, tmp_path, capsys):
        out = tmp_path / "run"
        assert run_cli("simulate", "--out", str(out)) == 1
        assert "seed" in capsys.readouterr().err

    def test_same_seed_same_bytes(self, tmp_path):
        blobs = []
        for name in ("a", "b"):
            out = tmp_path / name
            run_cli("simulate", "--seed", "11", "--out", str(out), "--n", "8")
            blobs.append((out / "sample.csv").read_bytes())
        assert blobs[0] == blobs[1]


class TestFpcaCommand:
    def test_rank_one_sample(self, tmp_path):
        out = tmp_path / "sim"
        run_cli("simulate", "--seed", "4", "--out", str(out), "--n", "40")  # sine by default
        fp = tmp_path / "fpca"
        assert run_cli("fpca", "--input", str(out / "sample.csv"), "--d", "3", "--out", str(fp)) == 0
        rows = (fp / "eigensystem.csv").read_text().strip().split("\n")
        lambdas = [float(r.split(",")[0]) for r in rows[1:]]
        assert lambdas[1] < 1e-10 * lambdas[0]
        scores = np.loadtxt(fp / "scores.csv", delimiter=",", skiprows=1)
        assert scores.shape == (40, 3)

    def test_missing_input_is_reported(self, tmp_path, capsys):
        assert run_cli("fpca", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")) == 1
        assert "error:" in capsys.readouterr().err


class TestDensityCommand:
    def test_pipeline(self, tmp_path):
        sim = tmp_path / "sim"
        run_cli("simulate", "--seed", "9", "--out", str(sim), "--n", "200")
        dens = tmp_path / "dens"
        code = run_cli(
            "density",
            "--input", str(sim / "sample.csv"),
            "--targets", str(sim / "sample.csv"),
            "--d", "1",
            "--kernel", "gaussian-radial",
            "--out", str(dens),
        )
        assert code == 0
        rows = (dens / "density.csv").read_text().strip().split("\n")
        assert rows[0] == "target,score_1,f_hat"
        values = np.array([float(r.split(",")[-1]) for r in rows[1:]])
        assert values.shape == (200,)
        assert np.all(values >= 0)


class TestSmbpCommand:
    def test_factorization_json(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("process = wiener\nJ = 30\n")
        sim = tmp_path / "sim"
        run_cli("simulate", "--config", str(cfg), "--seed", "21", "--out", str(sim), "--n", "300")
        target = tmp_path / "target.csv"
        sample = read_sample_csv(sim / "sample.csv")
        grid_row = ",".join(repr(v) for v in sample.grid.points.tolist())
        target.write_text(grid_row + "\n" + ",".join(["0.0"] * 100) + "\n")
        out = tmp_path / "smbp"
        code = run_cli(
            "smbp",
            "--input", str(sim / "sample.csv"),
            "--target", str(target),
            "--eps", "0.5", "0.3",
            "--d", "1",
            "--J", "6",
            "--out", str(out),
        )
        assert code == 0
        reports = json.loads((out / "factorization.json").read_text())
        assert [r["eps"] for r in reports] == [0.5, 0.3]
        for r in reports:
            assert r["phi_d"] == pytest.approx(r["f_d"] * r["volume"] * r["correction"])


class TestExperimentCommand:
    def write_config(self, path, extra=""):
        path.write_text("process = sine\ndist = std-normal\nn = 40\nd = 1\nreps = 3\n" + extra)

    def test_requires_seed(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        self.write_config(cfg)
        assert run_cli("experiment", "--config", str(cfg), "--out", str(tmp_path / "o")) == 1
        assert "seed" in capsys.readouterr().err

    def test_outputs_and_thread_invariance(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        self.write_config(cfg)
        blobs = {}
        for threads in ("1", "3"):
            out = tmp_path / f"run{threads}"
            code = run_cli(
                "experiment", "--config", str(cfg), "--seed", "77",
                "--out", str(out), "--threads", threads,
            )
            assert code == 0
            blobs[threads] = (
                (out / "table1.csv").read_bytes(),
                (out / "ape.csv").read_bytes(),
            )
            manifest = json.loads((out / "manifest.json").read_text())
            assert set(manifest["outputs"]) == {"table1.csv", "ape.csv"}
        assert blobs["1"] == blobs["3"]

    def test_wiener_writes_table2(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("process = wiener\nJ = 20\nn = 30,50\nd = 1,2\nreps = 2\n")
        out = tmp_path / "w"
        assert run_cli("experiment", "--config", str(cfg), "--seed", "5", "--out", str(out)) == 0
        rows = (out / "table2.csv").read_text().strip().split("\n")
        assert rows[0] == "n,d,mean,std"
        assert len(rows) == 5  # two n values x two d values

    def test_inputs_not_mutated(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        self.write_config(cfg)
        before = cfg.read_bytes()
        run_cli("experiment", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path / "o"))
        assert cfg.read_bytes() == before


class TestFevSelection:
    def test_fev_threshold_picks_d(self, tmp_path):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("process = wiener\nJ = 50\n")
        sim = tmp_path / "sim"
        run_cli("simulate", "--config", str(cfg), "--seed", "2", "--out", str(sim), "--n", "400")
        out = tmp_path / "fpca"
        assert run_cli("fpca", "--input", str(sim / "sample.csv"), "--fev", "0.9", "--out", str(out)) == 0
        header = (out / "scores.csv").read_text().split("\n", 1)[0]
        assert header.count("score_") >= 2  # FEV 0.9 needs at least two components

    def test_invalid_threshold_reported(self, tmp_path, capsys):
        sim = tmp_path / "sim"
        run_cli("simulate", "--seed", "2", "--out", str(sim), "--n", "30")
        code = run_cli(
            "fpca", "--input", str(sim / "sample.csv"), "--fev", "1.0",
            "--out", str(tmp_path / "o"),
        )
        err = capsys.readouterr().err
        assert code == 1 and "threshold" in err
