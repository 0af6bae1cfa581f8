"""Command-line interface: exit codes, report text, CSV shapes, determinism."""

import json
import math

import numpy as np
import pytest

from hypchoreo.action import Configuration
from hypchoreo.cli import main
from hypchoreo.optimizer import Choreography
from hypchoreo.solutions import load_solution, save_solution
from hypchoreo.trigpath import TrigPath
from hypchoreo.verify import SolveReport


def write_seed(path, coeffs, config):
    save_solution(path, Choreography(config=config, path=TrigPath(coeffs), report=SolveReport()))


@pytest.fixture(scope="module")
def circle_solution(tmp_path_factory):
    """A solved two-body disk orbit at R=20, written by the CLI itself."""
    out = tmp_path_factory.mktemp("orbits") / "two_body.json"
    code = main(
        [
            "solve", "--n", "2", "--R", "20", "--K", "4", "--K2", "8",
            "--seed", "1", "--modes", "2", "--out", str(out),
        ]
    )
    assert code == 0
    return out


class TestSolve:
    def test_report_and_output_file(self, circle_solution, capsys):
        choreo = load_solution(circle_solution)
        assert choreo.config.n == 2
        assert choreo.config.K == 8
        assert choreo.path.coeffs.size == 17
        assert choreo.report.phase2 is not None
        assert choreo.report.phase2.residual_rel_norm <= 1e-10

    def test_prints_two_phase_table(self, capsys, tmp_path):
        code = main(["solve", "--n", "2", "--R", "inf", "--K", "4", "--seed", "0"])
        out = capsys.readouterr().out
        assert code == 0
        assert "Phase 1" in out and "Phase 2" in out
        assert "Action" in out
        assert "Relative 2-norm of the residual" in out

    def test_seed_file_input(self, circle_solution, tmp_path, capsys):
        code = main(
            [
                "solve", "--n", "2", "--R", "20", "--K", "6",
                "--seed", str(circle_solution),
            ]
        )
        assert code == 0

    def test_infeasible_seed_file_exit_3(self, tmp_path, capsys):
        bad = tmp_path / "collided.json"
        c = np.zeros(9, dtype=complex)
        c[4] = 0.3  # constant path: permanent collision
        write_seed(bad, c, Configuration(n=2, R=1.5, K=4))
        code = main(["solve", "--n", "2", "--R", "1.5", "--K", "4", "--seed", str(bad)])
        assert code == 3
        assert "infeasible" in capsys.readouterr().err

    def test_malformed_seed_file_exit_4(self, tmp_path, capsys):
        bad = tmp_path / "broken.json"
        bad.write_text("{oops")
        code = main(["solve", "--n", "2", "--R", "1.5", "--K", "4", "--seed", str(bad)])
        assert code == 4

    def test_unwritable_output_exit_4(self, tmp_path, capsys):
        missing_dir = tmp_path / "no" / "such" / "dir" / "x.json"
        code = main(
            [
                "solve", "--n", "2", "--R", "20", "--K", "4",
                "--seed", "1", "--modes", "2", "--out", str(missing_dir),
            ]
        )
        assert code == 4


class TestVerify:
    def test_converged_solution_passes(self, circle_solution, capsys):
        code = main(["verify", str(circle_solution)])
        out = capsys.readouterr().out
        assert code == 0
        assert out.strip().endswith("PASS")
        assert out.count("ok") == 3

    def test_rough_path_fails_exit_2(self, tmp_path, capsys):
        rough = tmp_path / "rough.json"
        rng = np.random.default_rng(0)
        c = (rng.standard_normal(13) + 1j * rng.standard_normal(13)) * 0.05
        c[7] += 0.5
        write_seed(rough, c, Configuration(n=3, R=1.5, K=6))
        code = main(["verify", str(rough)])
        out = capsys.readouterr().out
        assert code == 2
        assert out.strip().endswith("FAIL")

    def test_custom_thresholds(self, circle_solution, capsys):
        code = main(["verify", str(circle_solution), "--residual-threshold", "1e-30"])
        assert code == 2

    def test_missing_file_exit_4(self, tmp_path, capsys):
        code = main(["verify", str(tmp_path / "absent.json")])
        assert code == 4

    def test_unknown_bundled_name_exit_4(self, capsys):
        code = main(["verify", "bundled:no_such_orbit"])
        assert code == 4


class TestSweep:
    def test_csv_columns_and_slope(self, circle_solution, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code = main(
            [
                "sweep", "--family", str(circle_solution),
                "--R-list", "10,50,20", "--K", "4", "--K2", "8",
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "family,R,diff,slope"
        rows = [line.split(",") for line in lines[1:]]
        assert [row[0] for row in rows] == ["two_body"] * 3
        assert [float(row[1]) for row in rows] == [50.0, 20.0, 10.0]
        diffs = [float(row[2]) for row in rows]
        assert all(d > 0 for d in diffs)
        assert diffs[0] < diffs[1] < diffs[2]
        slopes = {row[3] for row in rows}
        assert len(slopes) == 1
        assert float(slopes.pop()) == pytest.approx(-2.0, abs=0.1)

    def test_stdout_default(self, circle_solution, capsys):
        code = main(
            [
                "sweep", "--family", str(circle_solution),
                "--R-list", "40,20", "--K", "4", "--K2", "8",
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("family,R,diff,slope")
        # two members, no slope fit with fewer than three
        rows = [line.split(",") for line in out.strip().splitlines()[1:]]
        assert len(rows) == 2
        assert all(row[3] == "" for row in rows)

    def test_empty_radius_list_exit_4(self, circle_solution, capsys):
        code = main(["sweep", "--family", str(circle_solution), "--R-list", " , "])
        assert code == 4


class TestExport:
    def test_samples_csv(self, circle_solution, capsys):
        code = main(["export", str(circle_solution), "--format", "csv", "--samples", "64"])
        out = capsys.readouterr().out
        assert code == 0
        lines = out.strip().splitlines()
        header = lines[0].split(",")
        assert header == ["t", "re_z0", "im_z0", "re_z1", "im_z1", "x1", "x2", "x3"]
        assert len(lines) == 65
        first = [float(v) for v in lines[1].split(",")]
        assert first[0] == 0.0
        # exported lift must land on the hyperboloid sheet
        R = 20.0
        x1, x2, x3 = first[5], first[6], first[7]
        assert (x3 * x3 - x1 * x1 - x2 * x2) == pytest.approx(R ** 2, rel=1e-10)

    def test_planar_csv_has_no_lift(self, tmp_path, capsys):
        flat = tmp_path / "flat.json"
        c = np.zeros(9, dtype=complex)
        c[5] = 0.63
        write_seed(flat, c, Configuration(n=2, R=math.inf, K=4))
        code = main(["export", str(flat), "--format", "csv", "--samples", "16"])
        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[0] == "t,re_z0,im_z0,re_z1,im_z1"

    def test_coefficient_magnitudes(self, circle_solution, capsys):
        code = main(["export", str(circle_solution), "--format", "coeffs"])
        out = capsys.readouterr().out
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "k,abs_c"
        ks = [int(line.split(",")[0]) for line in lines[1:]]
        assert ks == list(range(-8, 9))
        mags = [float(line.split(",")[1]) for line in lines[1:]]
        assert all(m >= 0.0 for m in mags)

    def test_output_file(self, circle_solution, tmp_path):
        out = tmp_path / "orbit.csv"
        code = main(["export", str(circle_solution), "--format", "coeffs", "--out", str(out)])
        assert code == 0
        assert out.read_text().startswith("k,abs_c")


class TestSearch:
    def test_finds_circle_and_is_deterministic(self, tmp_path, capsys):
        args = ["search", "--n", "2", "--R", "1.5", "--K", "4", "--K2", "8",
                "--trials", "3", "--modes", "2", "--rng", "5"]
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        assert main(args + ["--out-dir", str(dir_a)]) == 0
        capsys.readouterr()
        assert main(args + ["--out-dir", str(dir_b)]) == 0
        files_a = sorted(p.name for p in dir_a.iterdir())
        files_b = sorted(p.name for p in dir_b.iterdir())
        assert files_a == files_b
        assert files_a[0] == "search_000.json"
        for name in files_a:
            doc_a = json.loads((dir_a / name).read_text())
            doc_b = json.loads((dir_b / name).read_text())
            for doc in (doc_a, doc_b):
                for phase in doc["diagnostics"].values():
                    phase.pop("wall_time_seconds")
            assert doc_a == doc_b
            choreo = load_solution(dir_a / name)
            assert choreo.report.phase2.residual_rel_norm <= 1e-8

    def test_distinct_actions_only(self, tmp_path, capsys):
        # Every two-body trial lands on the same circular orbit, so the
        # search keeps exactly one representative.
        out_dir = tmp_path / "found"
        code = main(
            ["search", "--n", "2", "--R", "1.5", "--K", "4", "--K2", "8",
             "--trials", "4", "--modes", "2", "--rng", "0", "--out-dir", str(out_dir)]
        )
        assert code == 0
        names = sorted(p.name for p in out_dir.iterdir())
        assert names == ["search_000.json"]
