import json
import math
import os

import pytest

from renyilab.cli import EXIT_GUARD, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, run


def run_capture(args, capsys):
    code = run(args)
    out = capsys.readouterr().out
    return code, out


class TestBinarySubcommand:
    def test_closed_form_output(self, capsys):
        code, out = run_capture(["binary", "--eps", "0.1", "--q", "2", "--rate", "0.5"], capsys)
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "quantity,value,units"
        row = dict((l.split(",")[0], l.split(",")[1]) for l in lines[1:])
        assert float(row["forward_bits"]) == pytest.approx(
            1 - (-math.log2(0.82)) - 0.5, abs=1e-9)
        assert all(l.endswith(",bits") for l in lines[1:])

    def test_validation_error(self, capsys):
        assert run(["binary", "--eps", "0.7", "--q", "2", "--rate", "0.5"]) == EXIT_VALIDATION


class TestDispatch:
    def test_unknown_subcommand(self):
        assert run(["frobnicate"]) == EXIT_USAGE

    def test_no_args_usage(self):
        assert run([]) == EXIT_USAGE

    def test_help(self, capsys):
        assert run(["--help"]) == EXIT_OK


class TestProblemFiles:
    def _write_problem(self, tmp_path, doc):
        p = tmp_path / "prob.json"
        p.write_text(json.dumps(doc))
        return str(p)

    def test_resolvability_from_file(self, tmp_path, capsys):
        path = self._write_problem(tmp_path, {
            "alphabet": [2, 2],
            "channel": [["0.9", "0.1"], [0.1, 0.9]],  # decimal strings allowed
            "target": [0.5, 0.5],
            "params": {"q": 2, "rate_bits": 0.5},
            "units": "bits",
        })
        code, out = run_capture(["resolvability", "--channel", path, "--q", "2",
                                 "--rate", "0.5", "--units", "bits"], capsys)
        assert code == EXIT_OK
        header, row = out.strip().splitlines()
        rec = dict(zip(header.split(","), row.split(",")))
        assert float(rec["value"]) == pytest.approx(1 - (-math.log2(0.82)) - 0.5, abs=1e-4)
        assert rec["units"] == "bits"

    def test_bad_file(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert run(["resolvability", "--channel", str(p), "--q", "2", "--rate", "0.5"]) \
            == EXIT_VALIDATION

    def test_guard_exit_code(self, tmp_path, capsys):
        code = run(["simulate", "--bsc", "0.2", "--q", "2", "--rate", "0.2",
                    "--n", "40,41", "--trials", "30", "--seed", "1"])
        assert code == EXIT_GUARD


class TestSimulate:
    def test_csv_and_determinism(self, tmp_path, capsys):
        args = ["simulate", "--bsc", "0.2", "--q", "2", "--rate", "0.66",
                "--n", "4:6", "--trials", "30", "--seed", "7"]
        code1, out1 = run_capture(args, capsys)
        code2, out2 = run_capture(args, capsys)
        assert code1 == code2 == EXIT_OK
        assert out1 == out2  # byte-identical under a fixed seed
        header = out1.splitlines()[0].split(",")
        assert "slope" in header and "units" in header and "seed" in header

    def test_report_reparses(self, capsys):
        import csv
        import io
        code, out = run_capture(["simulate", "--bsc", "0.2", "--q", "2", "--rate", "0.66",
                                 "--n", "4,5", "--trials", "30", "--seed", "3"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 2
        for r in rows:
            float(r["divergence"])
            float(r["mean_moment"])

    def test_plot_files_written(self, tmp_path, capsys):
        plot_dir = tmp_path / "figs"
        out_csv = tmp_path / "report.csv"
        code = run(["simulate", "--bsc", "0.2", "--q", "2", "--rate", "0.66",
                    "--n", "4:6", "--trials", "30", "--seed", "7",
                    "-o", str(out_csv), "--plot-dir", str(plot_dir)])
        assert code == EXIT_OK
        assert out_csv.exists()
        assert (plot_dir / "exponent_regression.png").exists()
        assert (plot_dir / "exponent_regression.png").stat().st_size > 1000


class TestOtherSubcommands:
    def test_oneshot(self, capsys):
        code, out = run_capture(["oneshot", "--bsc", "0.2", "--q", "3",
                                 "--rate", str(math.log(2))], capsys)
        assert code == EXIT_OK
        assert "log_beta" in out and "upper" in out

    def test_exponent(self, capsys):
        code, out = run_capture(["exponent", "--dsbs", "0.2", "--q", "2", "--rate", "0.95",
                                 "--units", "bits", "--typical-eps", "0.05"], capsys)
        assert code == EXIT_OK
        assert "iid" in out and "typical" in out

    def test_stability_binary(self, capsys):
        code, out = run_capture(["stability", "--dsbs", "0.1", "--q", "2",
                                 "--alpha", "0.3", "--units", "bits"], capsys)
        assert code == EXIT_OK
        assert "binary-closed-form" in out

    def test_anticontractivity_asymptotic(self, capsys):
        code, out = run_capture(["anticontractivity", "--dsbs", "0.1", "--p", "2", "--q", "2",
                                 "--side", "upper", "--blocklength", "inf",
                                 "--units", "bits"], capsys)
        assert code == EXIT_OK
        rec = out.strip().splitlines()[1].split(",")
        assert float(rec[4]) == pytest.approx(-math.log2(0.82) / 2, abs=1e-9)

    def test_verify_fast_suite(self, capsys):
        code, out = run_capture(["verify", "properties", "--fast"], capsys)
        assert code == EXIT_OK
        assert "[PASS] properties" in out
