import csv
import math
import re
import subprocess
import sys
import time

import numpy as np
import pytest

from nestfrac.asymptotics import amgm_envelope
from nestfrac.cli import main
from nestfrac.envelope import envelope_value


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_eval_second_level(capsys):
    code, out, _ = run(capsys, "eval", "4")
    assert code == 0
    assert out.startswith("F=3.000000 ")


def test_eval_identity_region(capsys):
    code, out, _ = run(capsys, "eval", "0.5")
    assert code == 0
    assert out.startswith("F=0.500000 ")
    assert "prediction" not in out


def test_eval_reports_prediction_residual(capsys):
    code, out, _ = run(capsys, "eval", "1e6")
    assert code == 0
    F = float(re.search(r"F=(\S+)", out).group(1))
    r = float(re.search(r"residual_u2=(\S+)", out).group(1))
    assert F == pytest.approx(35.8621455, abs=1e-6)
    # measured value; about four times the 0.5 target (see the asymptotics tests)
    assert r == pytest.approx(2.098, abs=0.01)


def test_eval_large_shift_rescales(capsys):
    code, out, _ = run(capsys, "eval", "10", "--p", "2")
    assert code == 0
    F = float(re.search(r"F=(\S+)", out).group(1))
    assert F == pytest.approx(envelope_value(5.0).F, abs=1e-6)


def test_eval_small_shift_uses_dp(capsys):
    code, out, _ = run(capsys, "eval", "10", "--p", "0.5", "--grid", "4000")
    assert code == 0
    assert "method=dp" in out
    F = float(re.search(r"F=(\S+)", out).group(1))
    assert envelope_value(10.0).F < F < amgm_envelope(math.log(10.0))


@pytest.mark.parametrize("argv", [["eval", "-1"], ["eval", "3", "--p", "0"]])
def test_eval_domain_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["emit", "alpha"])
    assert exc.value.code == 2


def test_constants_table(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == 0
    assert "A = 1.7046560372 ± 1e-8 PASS" in out
    assert "t_b = 1.742084284 ± 1e-6 PASS" in out
    assert "alpha_inf(1) = 2.815572650 ± 1e-7 PASS" in out


def test_constants_fail_on_impossible_tolerance(capsys):
    code, out, _ = run(capsys, "constants", "--tol", "1e-30")
    assert code == 1
    assert "FAIL" in out


def test_emit_alpha(tmp_path, capsys):
    path = tmp_path / "alpha.csv"
    assert run(capsys, "emit", "alpha", "--out", str(path))[0] == 0
    header, rows = read_csv(path)
    assert header == ["t", "alpha_inf", "phi", "psi"]
    assert len(rows) == 501
    t = np.array([float(r[0]) for r in rows])
    a = np.array([float(r[1]) for r in rows])
    assert t[0] == 1.0 and t[-1] == 2.0
    assert t[np.argmin(a)] == pytest.approx(1.447847, abs=2e-3)


def test_emit_curves_shows_backtracking(tmp_path, capsys):
    path = tmp_path / "curves.csv"
    assert run(capsys, "emit", "curves", "--out", str(path), "--n-range", "30..32")[0] == 0
    header, rows = read_csv(path)
    assert header == ["n", "t", "log_xi", "eta_minus_e_log_xi"]
    assert sorted({int(r[0]) for r in rows}) == [30, 31, 32]
    lx = np.array([float(r[2]) for r in rows if r[0] == "31"])
    k = int(np.argmin(lx))
    assert 0 < k < len(lx) - 1


def test_emit_curves_without_backtracking(tmp_path, capsys):
    path = tmp_path / "curves.csv"
    run(capsys, "emit", "curves", "--out", str(path), "--n-range", "5..5")
    _, rows = read_csv(path)
    assert np.all(np.diff([float(r[2]) for r in rows]) > 0)


def test_emit_f0corr_vanishes_at_integers(tmp_path, capsys):
    path = tmp_path / "f0.csv"
    run(capsys, "emit", "f0corr", "--out", str(path))
    header, rows = read_csv(path)
    assert header == ["u", "F0_minus_eu", "correction"]
    for u, _, c in rows:
        if abs(float(u) - round(float(u))) < 1e-9:
            assert float(c) == pytest.approx(0.0, abs=1e-9)


def test_emit_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        run(capsys, "emit", "ap", "--out", str(p))
    raw = a.read_bytes()
    assert raw == b.read_bytes()
    assert raw.startswith(b"p,A_prime,A\n")
    assert b"\r" not in raw


def test_emit_envelope(tmp_path, capsys):
    path = tmp_path / "env.csv"
    run(capsys, "emit", "envelope", "--out", str(path))
    header, rows = read_csv(path)
    assert header == ["x", "F", "nu", "t"]
    assert len(rows) == 401


def test_emit_reports_unwritable_path(tmp_path, capsys):
    bad = tmp_path / "missing" / "x.csv"
    code, _, err = run(capsys, "emit", "alpha", "--out", str(bad))
    assert code == 2
    assert str(bad) in err


def test_emit_rejects_bad_range(tmp_path, capsys):
    code, _, err = run(capsys, "emit", "curves", "--out", str(tmp_path / "c.csv"), "--n-range", "9..3")
    assert code == 2
    assert "--n-range" in err


def test_tabulate_ap_to_stdout(capsys):
    code, out, _ = run(capsys, "tabulate-ap")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "p,A_prime,A"
    p, _, a = (float(v) for v in lines[-1].split(","))
    assert p == 1.0
    assert a == pytest.approx(1.7046560372, abs=1e-4)


def test_tabulate_ap_plain_to_file(tmp_path, capsys):
    path = tmp_path / "ap.csv"
    assert run(capsys, "tabulate-ap", "--plain", "--out", str(path))[0] == 0
    _, rows = read_csv(path)
    assert float(rows[-1][0]) > 1.0


def test_verify_contour(capsys):
    code, out, _ = run(capsys, "verify", "contour")
    assert code == 0
    assert "B < 2.48 PASS" in out


def test_verify_identities(capsys):
    code, out, _ = run(capsys, "verify", "identities")
    assert code == 0
    abel = [line for line in out.splitlines() if "abel residual" in line]
    assert len(abel) == 5
    assert all(line.endswith("< 1e-08 PASS") for line in abel)


def test_verify_manifest_is_sorted(capsys):
    _, out, _ = run(capsys, "verify", "constants")
    names = [line.split()[1] for line in out.splitlines()[:-1]]
    assert names == sorted(names)


def test_verify_fails_with_impossible_tolerance(capsys):
    code, out, _ = run(capsys, "verify", "identities", "--tol", "1e-30")
    assert code == 1
    assert "FAIL" in out


def test_verify_all_within_budget(capsys):
    start = time.perf_counter()
    code, out, _ = run(capsys, "verify", "all")
    elapsed = time.perf_counter() - start
    assert code == 0, out
    assert elapsed < 120


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "nestfrac", "eval", "4"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("F=3.000000")
