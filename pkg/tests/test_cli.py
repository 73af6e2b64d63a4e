import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fracform.cli import emit_table, parse_function_literal
from fracform.verify import VerdictRecord


def run_cli(args, cwd=None):
    return subprocess.run([sys.executable, "-m", "fracform.cli"] + args,
                          capture_output=True, text=True, cwd=cwd)


class TestFunctionLiterals:
    def test_indicator(self):
        f = parse_function_literal("indicator:0,1", 0.01)
        assert f.span() == (0.0, 1.0)

    def test_plateau(self):
        f = parse_function_literal("plateau:0,1,0.5", 1.0 / 64.0)
        assert f.total_variation() == pytest.approx(2.0, abs=1e-12)

    def test_bump(self):
        f = parse_function_literal("bump:0.5,0.25", 1.0 / 64.0)
        assert f.linf() == pytest.approx(1.0, abs=1e-9)

    def test_csv_roundtrip(self, tmp_path):
        f = parse_function_literal("bump:0,1", 1.0 / 32.0)
        path = tmp_path / "f.csv"
        path.write_text(f.to_csv(), encoding="utf-8")
        g = parse_function_literal(f"csv:{path}", 1.0 / 32.0)
        assert np.allclose(f.values, g.values, atol=1e-12)

    def test_unknown_rejected(self):
        with pytest.raises(ValueError):
            parse_function_literal("mystery:1", 0.01)


class TestEnergyCommand:
    def test_indicator_alpha_half(self, tmp_path):
        out = run_cli(["energy", "--alpha", "0.5", "--function",
                       "indicator:0,1", "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        value = float(out.stdout.split("energy = ")[1].splitlines()[0])
        assert value == pytest.approx(16.0, rel=0.01)

    def test_divergent_flagged(self, tmp_path):
        out = run_cli(["energy", "--alpha", "1.5", "--function",
                       "indicator:0,1", "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        assert "DIVERGENT" in out.stdout

    def test_json_report_written(self, tmp_path):
        out = run_cli(["energy", "--alpha", "0.5", "--function", "bump:0,1",
                       "--out", "report.json", "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        data = json.loads((tmp_path / "report.json").read_text())
        assert set(data) == {"value", "l2", "e1", "trace"}


class TestVerifyCommand:
    def test_core_suite_deterministic_stdout(self, tmp_path):
        a = run_cli(["verify", "--suite", "core", "--seed", "7",
                     "--out-dir", str(tmp_path / "a")])
        b = run_cli(["verify", "--suite", "core", "--seed", "7",
                     "--out-dir", str(tmp_path / "b")])
        assert a.returncode == 0 and b.returncode == 0
        assert a.stdout == b.stdout
        rows_a = (tmp_path / "a" / "verdicts.csv").read_text().splitlines()
        rows_b = (tmp_path / "b" / "verdicts.csv").read_text().splitlines()
        # identical apart from the wall-clock runtime column
        strip = lambda rows: [",".join(r.split(",")[:4]) for r in rows]
        assert strip(rows_a) == strip(rows_b)

    def test_full_suite_exit_code_flags_failures(self, tmp_path):
        out = run_cli(["verify", "--suite", "all", "--seed", "7",
                       "--out-dir", str(tmp_path)])
        # the step-rate criterion is a documented failure, so exit code 2
        assert out.returncode == 2
        assert "step-approximation-rate: FAIL" in out.stdout
        rows = (tmp_path / "verdicts.csv").read_text().splitlines()
        assert len(rows) == 13  # header plus one record per criterion

    def test_list_enumerates_checks(self, tmp_path):
        out = run_cli(["verify", "--list", "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        assert len(out.stdout.strip().splitlines()) == 12

    def test_usage_error_exits_one(self):
        out = run_cli(["verify", "--suite", "bogus"])
        assert out.returncode == 1


class TestEmitTable:
    def test_schema_and_empty(self, tmp_path):
        path = tmp_path / "t.csv"
        emit_table([], path)
        assert path.read_text() == \
            "check_id,status,measured,tolerance,runtime_ms\n"

    def test_single_record(self, tmp_path):
        rec = VerdictRecord("demo", "PASS", (1.0, 2.5), 0.1, 12)
        path = tmp_path / "t.csv"
        emit_table([rec], path)
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["check_id", "status", "measured", "tolerance",
                           "runtime_ms"]
        assert rows[1] == ["demo", "PASS", "1;2.5", "0.1", "12"]

    def test_column_order_fixed(self, tmp_path):
        recs = [VerdictRecord("b", "PASS", (1.0,), 0.1, 1),
                VerdictRecord("a", "FAIL", (2.0,), 0.2, 2)]
        path = tmp_path / "t.csv"
        emit_table(recs, path)
        rows = list(csv.reader(path.open()))
        assert [r[0] for r in rows[1:]] == ["b", "a"]


class TestOtherCommands:
    def test_ladder_writes_tree_and_trace(self, tmp_path):
        out = run_cli(["ladder", "--function", "bump:0,1", "--step", "0.01",
                       "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        tree = json.loads((tmp_path / "ladder_tree.json").read_text())
        assert "positive" in tree
        trace = (tmp_path / "ladder_trace.csv").read_text().splitlines()
        assert trace[0] == "part,nodes,sup_gap"

    def test_ladder_budget_cut_serializes(self, tmp_path):
        # a tree cut by the node budget carries pending stubs; the JSON
        # must still be valid and flag them
        f = parse_function_literal("bump:0,1", 0.01)
        xs = f.x
        extra = np.where(np.abs(xs - 0.8) < 0.15,
                         0.3 * np.cos(np.pi * (xs - 0.8) / 0.3) ** 2, 0.0)
        g = f.with_values(f.values + extra)
        path = tmp_path / "g.csv"
        path.write_text(g.to_csv(), encoding="utf-8")
        out = run_cli(["ladder", "--function", f"csv:{path}",
                       "--max-nodes", "1", "--sup-tol", "1e-9",
                       "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        assert "NOT_CONVERGED" in out.stdout
        tree = json.loads((tmp_path / "ladder_tree.json").read_text())
        kids = tree["positive"]["root"]["children"]
        assert any(c["pending"] for c in kids)

    def test_ladder_splits_signed_input(self, tmp_path):
        f = parse_function_literal("bump:0,1", 0.01)
        g = f.with_values(np.where(f.x < 0, -f.values, f.values))
        path = tmp_path / "g.csv"
        path.write_text(g.to_csv(), encoding="utf-8")
        out = run_cli(["ladder", "--function", f"csv:{path}",
                       "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        tree = json.loads((tmp_path / "ladder_tree.json").read_text())
        assert set(tree) == {"positive", "negative"}

    def test_scale_and_capacity(self, tmp_path):
        out = run_cli(["scale", "--alpha", "1.5", "--budget", "0.3",
                       "--n-intervals", "15", "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        gset = json.loads((tmp_path / "open_set.json").read_text())
        assert gset[0][0] == "-inf"
        scale_rows = (tmp_path / "scale.csv").read_text().splitlines()
        assert len(scale_rows) > 100

        out = run_cli(["capacity", "--target", "[[-0.1, 0.1]]",
                       "--alpha-star", "0.5", "--domain=-2,2",
                       "--step", "0.005", "--out", "cap.json",
                       "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        data = json.loads((tmp_path / "cap.json").read_text())
        assert data["value"] > 0 and data["residual"] < 1e-8

    def test_levy_command(self, tmp_path):
        out = run_cli(["levy", "--atom", "1:1", "--indicator", "0,2",
                       "--symbol-out", "psi.csv", "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        assert "indicator_energy = 4" in out.stdout
        assert "finite_variation = True" in out.stdout
        assert (tmp_path / "psi.csv").exists()
        # bounded symbol: no growth verdict line
        assert "PROPER-SUBSPACES-EXIST" not in out.stdout

    def test_levy_growth_verdict(self, tmp_path):
        out = run_cli(["levy", "--power-alpha", "1.5",
                       "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        assert "PROPER-SUBSPACES-EXIST" in out.stdout
        assert "theorem-backed" in out.stdout

    def test_levy_triplet_file(self, tmp_path):
        spec = {"sigma": 0.0, "atoms": [[1.0, 1.0]],
                "density": {"type": "power", "alpha": 0.5}}
        path = tmp_path / "t.json"
        path.write_text(json.dumps(spec), encoding="utf-8")
        out = run_cli(["levy", "--triplet", str(path),
                       "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        assert "finite_variation = True" in out.stdout

    def test_scale_spec_file(self, tmp_path):
        spec = {"alpha": 1.5, "budget": 0.2, "n_intervals": 7}
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(spec), encoding="utf-8")
        out = run_cli(["scale", "--spec", str(path),
                       "--out-dir", str(tmp_path)])
        assert out.returncode == 0
        assert "islands =" in out.stdout

    def test_json_function_literal(self, tmp_path):
        f = parse_function_literal("bump:0,1", 1.0 / 64.0)
        path = tmp_path / "f.json"
        path.write_text(json.dumps(f.to_json_dict()), encoding="utf-8")
        g = parse_function_literal(f"json:{path}", 1.0 / 64.0)
        assert np.array_equal(g.values, f.values)

    def test_out_dir_env_fallback(self, tmp_path):
        import os
        import subprocess
        env = dict(os.environ, FSL_OUT_DIR=str(tmp_path))
        out = subprocess.run(
            [sys.executable, "-m", "fracform.cli", "verify", "--suite",
             "properness", "--seed", "3"],
            capture_output=True, text=True, env=env)
        assert out.returncode == 0
        assert (tmp_path / "verdicts.csv").exists()
