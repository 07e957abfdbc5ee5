import json
import subprocess
import sys
from pathlib import Path

import pytest

from locperiod.cli import main
from locperiod.moment import GOLDEN_SAMPLE

GOLDEN_REPORT = Path(__file__).with_name("golden") / "moment_report.json"
ASSEMBLE = ["moment", "assemble", "--p", "2", "--q", "3", "--data", str(GOLDEN_SAMPLE),
            "--lambda1", "1/2", "--lambda2", "1"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def test_verify_fact_example(capsys):
    code, out = run(["verify", "fact", "--q", "3", "--alpha1", "1", "--alpha2", "1", "--alpha3", "-1",
                     "--radius", "60", "--tol", "1e-8"], capsys)
    report = json.loads(out)
    assert code == 0 and report["pass"] is True
    assert report["schema"] == "1"
    assert report["config"]["radius"] == 60


def test_compute_ellv_steinberg(capsys):
    code, out = run(["compute", "ellv", "--case", "steinberg", "--q", "2"], capsys)
    report = json.loads(out)
    assert code == 0
    assert report["value_exact"] == "1/3"


def test_verify_kappa_override(capsys):
    code, out = run(["verify", "kappa", "--q", "2", "--lambda", "5/2", "--allow-nonunitary"], capsys)
    assert code == 0 and json.loads(out)["report"]["notes"] == ["exact match"]


def test_failed_verification_exits_one(capsys):
    code, out = run(["verify", "atkin", "--q", "2", "--steinberg", "--lambda1", "0", "--lambda2", "1",
                     "--flip", "--radius", "40"], capsys)
    assert code == 1 and json.loads(out)["pass"] is False


def test_usage_errors_exit_two(capsys, tmp_path):
    assert main(["verify", "fact", "--bogus"]) == 2
    assert main(["nonsense"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"field_label": "x", "rows": [{"id": "a"}]}')
    code = main(["moment", "assemble", "--p", "2", "--q", "3", "--data", str(bad)])
    out = capsys.readouterr().out
    assert code == 2 and "$.rows[0]" in json.loads(out)["error"]
    assert main(["verify", "kappa", "--q", "2", "--lambda", "5/2"]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_golden_report_byte_identical(capsys):
    code, out = run(ASSEMBLE, capsys)
    assert code == 0
    assert out == GOLDEN_REPORT.read_text()


def test_repeated_runs_identical(capsys):
    argv = ["compute", "iv", "--q", "3", "--vector", "u:1", "--vector", "u:0^m", "--vector", "st:-1"]
    first = run(argv, capsys)
    second = run(argv, capsys)
    assert first == second and first[0] == 0
    assert abs(float(json.loads(first[1])["value"]) - 0.25) < 1e-8


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "locperiod", "compute", "ellv", "--case", "away"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value_exact"] == "1"


@pytest.mark.parametrize("sub", ["true", "hecke"])
def test_verify_identities(sub, capsys):
    code, out = run(["verify", sub, "--q", "3", "--lambda", "1", "--lambda1", "1/2", "--lambda2", "-1"], capsys)
    assert code == 0 and json.loads(out)["report"]["pass"] is True


def test_moment_compare(capsys):
    data = str(GOLDEN_SAMPLE)
    code, out = run(["moment", "compare", "--p", "2", "--q", "3", "--data-qp", data, "--data-pq", data,
                     "--lambda1-q", "1/2", "--lambda2-q", "1"], capsys)
    report = json.loads(out)["report"]
    assert code == 0
    assert set(report) == {"side_qp", "side_pq", "difference"}
    assert report["side_qp"]["level_prime"] == 3 and report["side_pq"]["level_prime"] == 2
