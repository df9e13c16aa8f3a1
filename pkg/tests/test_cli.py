import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from ggrqr.algorithms import ALGORITHMS
from ggrqr.cli import BENCH_FIELDS, OPCOUNT_FIELDS, PARALLEL_FIELDS, main
from ggrqr.matcore import DenseMatrix, random_matrix
from ggrqr.matio import read_matrix, write_matrix


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_factorize_identity_csv(tmp_path, capsys):
    src = tmp_path / "eye.csv"
    write_matrix(DenseMatrix.identity(4), src)
    code, out, _ = run(capsys, "factorize", src, "--algo", "ggr", "--q")
    assert code == 0
    assert out.startswith("residual=") and "orthogonality=" in out and "lower_max=" in out
    assert np.array_equal(read_matrix(tmp_path / "eye_R.csv").to_array(), np.eye(4))
    assert np.array_equal(read_matrix(tmp_path / "eye_Q.csv").to_array(), np.eye(4))


def test_factorize_two_by_two_mm(tmp_path, capsys):
    src = tmp_path / "a.mtx"
    write_matrix(DenseMatrix.from_array([[3.0, 1], [4, 2]]), src)
    code, _, _ = run(capsys, "factorize", src, "--algo", "gr", "--out", tmp_path / "res")
    assert code == 0
    r = read_matrix(tmp_path / "res_R.mtx").to_array()
    assert np.allclose(r, [[5, 2.2], [0, 0.4]], rtol=0, atol=1e-15)
    assert not (tmp_path / "res_Q.mtx").exists()


def test_factorize_blocked_with_panel(tmp_path, capsys):
    src = tmp_path / "a.csv"
    write_matrix(DenseMatrix.from_array(random_matrix(10)), src)
    for algo in ("ggr_blocked", "hqrf", "mht_blocked"):
        code, out, _ = run(capsys, "factorize", src, "--algo", algo, "--panel", 3)
        assert code == 0


def test_malformed_header_exits_2(tmp_path, capsys):
    src = tmp_path / "bad.mtx"
    src.write_text("%%MatrixMarket matrix sparse\n1 1\n1\n")
    code, out, err = run(capsys, "factorize", src)
    assert code == 2
    assert err.count("\n") == 1 and err.startswith("error: kind=parse") and "line=1" in err


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "factorize", tmp_path / "nope.csv")
    assert code == 2 and err.startswith("error: kind=parse")


def test_wide_matrix_exits_3(tmp_path, capsys):
    src = tmp_path / "wide.csv"
    src.write_text("1,2,3\n4,5,6\n")
    code, _, err = run(capsys, "factorize", src, "--algo", "hqr2")
    assert code == 3 and err.startswith("error: kind=shape")


@pytest.mark.parametrize("algo", ALGORITHMS)
def test_verify_random_passes(capsys, algo):
    code, out, _ = run(capsys, "verify", "--size", 32, "--algo", algo)
    assert code == 0 and out.strip().endswith("PASS")


def test_verify_corrupted_r_fails(tmp_path, capsys):
    from ggrqr.ggr import ggr_factorize

    a = random_matrix(6)
    res = ggr_factorize(a)
    res.r[4, 1] = 1.0
    paths = [tmp_path / n for n in ("a.csv", "r.csv", "q.csv")]
    for m, p in zip((a, res.r, res.q), paths):
        write_matrix(DenseMatrix.from_array(m), p)
    code, out, _ = run(capsys, "verify", paths[0], "--r", paths[1], "--q", paths[2])
    assert code == 1
    assert "triangularity=fail" in out and out.strip().endswith("FAIL")


def test_verify_rank_deficient_passes(tmp_path, capsys):
    a = random_matrix(8, 3)
    a[:, 5] = a[:, 2]
    src = tmp_path / "dup.csv"
    write_matrix(DenseMatrix.from_array(a), src)
    for algo in ("gr", "ggr", "hqr2"):
        code, out, _ = run(capsys, "verify", src, "--algo", algo)
        assert code == 0
        assert "residual=pass" in out and "orthogonality=pass" in out


def test_verify_needs_input(capsys):
    code, _, err = run(capsys, "verify")
    assert code == 2 and err.startswith("error: kind=usage")


def test_bench_schema_and_monotone_work(capsys):
    code, out, _ = run(capsys, "bench", "--size", 8, 16, 32, "--algo", "gr", "cgr", "hqrf")
    assert code == 0
    assert out.splitlines()[0] == ",".join(BENCH_FIELDS)
    recs = rows(out)
    assert len(recs) == 9
    for algo in ("gr", "cgr", "hqrf"):
        work = [int(r["muldiv"]) for r in recs if r["algorithm"] == algo]
        assert work == sorted(set(work))
    by = {(r["algorithm"], r["n"]): r for r in recs}
    assert int(by[("cgr", "16")]["muldiv"]) < int(by[("gr", "16")]["muldiv"])
    assert by[("hqrf", "8")]["panel"] == "8" and by[("gr", "8")]["panel"] == ""
    assert all(float(r["seconds"]) > 0 and float(r["residual"]) >= 0 for r in recs)


def test_bench_repeat_is_reproducible(tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["bench", "--size", 16, "--algo", "ggr", "mht", "--repeat", 3]
    assert run(capsys, *argv, "--csv", out1)[0] == 0
    assert run(capsys, *argv, "--csv", out2)[0] == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_bench_wall_clock(capsys):
    code, out, _ = run(capsys, "bench", "--size", 8, "--algo", "gr", "--clock", "wall")
    assert code == 0 and float(rows(out)[0]["seconds"]) > 0


def test_bench_parallel(capsys):
    code, out, _ = run(capsys, "bench", "--parallel", "--size", 64, 128, "--grid", 2,
                       "--block", 2, "--gamma", 0.1)
    assert code == 0
    assert out.splitlines()[0] == ",".join(PARALLEL_FIELDS)
    recs = rows(out)
    assert [r["n"] for r in recs] == ["64", "128"]
    assert float(recs[0]["speedup"]) <= float(recs[1]["speedup"]) <= 4


def test_bench_parallel_bad_grid(capsys):
    code, _, err = run(capsys, "bench", "--parallel", "--size", 10, "--grid", 3)
    assert code == 2 and err.startswith("error: kind=config")


def test_opcount_flags(capsys):
    code, out, _ = run(capsys, "opcount", "--algo", "gr", "cgr", "ggr", "--size", 16)
    assert code == 0
    assert out.splitlines()[0] == ",".join(OPCOUNT_FIELDS)
    by = {r["algorithm"]: r for r in rows(out)}
    assert by["gr"]["formula"] == "5440" and by["gr"]["exact"] == "true"
    assert by["cgr"]["formula"] == "4440" and by["cgr"]["within_10pct"] == "true"
    assert float(by["ggr"]["ratio"]) <= float(by["cgr"]["ratio"])


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ggrqr", "opcount", "--algo", "gr", "--size", "4"],
        capture_output=True, text=True, check=True,
    )
    assert proc.stdout.splitlines()[1].startswith("gr,4,")
