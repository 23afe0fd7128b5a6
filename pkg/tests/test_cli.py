import csv
import io
import math
import re
import subprocess
import sys

import pytest

from arborsort.adaptive_sort import rows_from_csv
from arborsort.bounds import bounds_from_csv
from arborsort.cli import UsageError, main, parse_sizes
from arborsort.geometry import from_text, is_satisfied


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def perm_file(tmp_path):
    def make(entries):
        path = tmp_path / f"p{len(entries)}_{abs(hash(tuple(entries)))}.txt"
        path.write_text("".join(f"{v}\n" for v in entries))
        return str(path)

    return make


def test_gen(capsys):
    assert run(capsys, "gen", "bitrev", "8")[:2] == (0, "0\n4\n2\n6\n1\n5\n3\n7\n")
    assert run(capsys, "gen", "sorted", "4")[1] == "0\n1\n2\n3\n"
    out = run(capsys, "gen", "blockbitrev", "16", "--block", "4")[1]
    assert out.split() == [str(v) for v in [0, 1, 2, 3, 8, 9, 10, 11, 4, 5, 6, 7, 12, 13, 14, 15]]
    # seed before or after the subcommand
    assert run(capsys, "--seed", "42", "gen", "random", "8")[1] == run(capsys, "gen", "random", "8", "--seed", "42")[1]
    assert run(capsys, "gen", "random", "8", "--seed", "42")[1].split() == ["3", "4", "6", "7", "2", "5", "0", "1"]


def test_gen_errors(capsys):
    code, _, err = run(capsys, "gen", "bitrev", "6")
    assert code == 2 and "power of two" in err
    with pytest.raises(SystemExit) as info:
        main(["gen", "zigzag", "8"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["gen", "sorted", "4", "--bogus"])
    assert info.value.code == 2


def test_bounds(capsys, perm_file):
    code, out, _ = run(capsys, "bounds", perm_file([0, 4, 2, 6, 1, 5, 3, 7]))
    assert code == 0
    rep = bounds_from_csv(out)
    assert rep.ib_total == 17 and rep.lib_total == pytest.approx(24.0, abs=1e-9)
    assert out.splitlines()[-1] == "total,,8,17,24.0"
    rep = bounds_from_csv(run(capsys, "bounds", perm_file([0]))[1])
    assert (rep.ib_total, rep.lib_total) == (0, 0.0)
    assert bounds_from_csv(run(capsys, "bounds", perm_file(list(range(8))))[1]).ib_total == 7
    assert run(capsys, "bounds", perm_file([1, 0]), "--format", "text")[1].startswith("n=2 ib=1 lib=2.0")


def test_bounds_with_shape(capsys, perm_file, tmp_path):
    shape = tmp_path / "shape.txt"
    shape.write_text("(. (. .))\n")
    code, out, _ = run(capsys, "bounds", perm_file([2, 0, 1]), "--shape", str(shape))
    assert code == 0 and bounds_from_csv(out).ib_total == 2
    shape.write_text("(. .)\n")
    assert run(capsys, "bounds", perm_file([2, 0, 1]), "--shape", str(shape))[0] == 2


def test_parse_errors_keep_line_numbers(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0\n2\n2\n")
    code, _, err = run(capsys, "bounds", str(bad))
    assert code == 2 and "line 3" in err
    code, _, err = run(capsys, "sort", str(tmp_path / "missing.txt"))
    assert code == 2 and "cannot read" in err


def test_sort(capsys, perm_file):
    code, out, _ = run(capsys, "sort", perm_file([0, 4, 2, 6, 1, 5, 3, 7]))
    assert code == 0
    (row,) = rows_from_csv(out)
    assert out.splitlines()[0] == "algorithm,n,family,seed,comparisons,accesses,splits,joins,span_depth,lib,ib"
    assert row.algorithm == "seq" and row.n == 8 and row.ib == 17
    assert row.accesses <= 12 * row.lib
    code, out, _ = run(capsys, "sort", perm_file([0]), "--algo", "par")
    assert code == 0 and rows_from_csv(out)[0].accesses >= 1
    assert run(capsys, "sort", perm_file([2, 0, 1]), "--format", "text")[1] == "0\n1\n2\n"
    assert run(capsys, "sort", perm_file([2, 0, 1]), "--format", "svg")[0] == 2


def test_partition_dual_on_involution(capsys, perm_file):
    # bit reversal is its own inverse
    f = perm_file([0, 8, 4, 12, 2, 10, 6, 14, 1, 9, 5, 13, 3, 11, 7, 15])
    seq = rows_from_csv(run(capsys, "sort", f)[1])[0]
    dual = rows_from_csv(run(capsys, "sort", f, "--algo", "partition-dual")[1])[0]
    assert dual.accesses == seq.accesses and dual.algorithm == "partition-dual"


def test_verify(capsys, tmp_path):
    pts = tmp_path / "pts.txt"
    pts.write_text("0 1 o\n1 0 o\n")
    code, out, _ = run(capsys, "verify", str(pts))
    assert code == 1 and "(0, 1) and (1, 0)" in out
    pts.write_text("0 1 o\n1 0 o\n0 0 a\n")
    assert run(capsys, "verify", str(pts))[0] == 0
    pts.write_text("0 1 q\n")
    code, _, err = run(capsys, "verify", str(pts))
    assert code == 2 and "line 1" in err


@pytest.mark.parametrize("method", ["quicksort", "mergesort", "trace"])
def test_satisfy_then_verify(capsys, perm_file, tmp_path, method):
    out_file = tmp_path / "s.txt"
    code, _, err = run(capsys, "satisfy", perm_file([3, 4, 6, 7, 2, 5, 0, 1]), "--method", method, "-o", str(out_file))
    assert code == 0
    s = from_text(out_file.read_text())
    assert is_satisfied(s) and s.original_count == 8
    if method == "trace":
        fields = dict(re.findall(r"(\w+)=(\d+)", err))
        assert int(fields["added"]) <= 6 * int(fields["accesses"])
    assert run(capsys, "verify", str(out_file))[0] == 0


def test_satisfy_svg_and_svg_command(capsys, perm_file, tmp_path):
    code, svg, _ = run(capsys, "satisfy", perm_file([1, 0, 2]), "--format", "svg", "--method", "trace", "--algo", "par")
    assert code == 0 and svg.startswith("<svg") and svg.count('class="original"') == 3
    pts = tmp_path / "pts.txt"
    pts.write_text("0 1 o\n1 0 o\n0 0 a\n")
    code, svg, _ = run(capsys, "svg", str(pts))
    assert code == 0 and svg.count('class="added"') == 1
    assert run(capsys, "svg", str(pts), "--format", "csv")[0] == 2


def test_bench_bitrev_ratio_column(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "2^4..2^10", "--families", "bitrev")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 7 * 2
    for r in rows:
        n = int(r["n"])
        k = math.log2(n)
        assert float(r["lib_ib"]) == pytest.approx(n * k / (n * k - (n - 1)), rel=1e-12)
    parsed = rows_from_csv(out)
    assert [(r.algorithm, r.n) for r in parsed][:2] == [("seq", 16), ("par", 16)]


def test_bench_blockbitrev_ratio_increases(capsys):
    code, out, _ = run(capsys, "bench", "--sizes", "2^8..2^12", "--families", "blockbitrev", "--algos", "seq")
    assert code == 0
    ratios = [float(r["lib_ib"]) for r in csv.DictReader(io.StringIO(out))]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_bench_seeds_and_witness(capsys):
    code, out, _ = run(
        capsys, "bench", "--sizes", "16,32", "--families", "random,sorted", "--seeds", "1,2",
        "--algos", "seq,par,union-baseline,partition-dual", "--witness",
    )
    assert code == 0
    rows = rows_from_csv(out)
    assert len(rows) == (2 * 2 + 2) * 4
    assert {r.seed for r in rows if r.family == "random"} == {1, 2}


def test_bench_errors(capsys):
    assert run(capsys, "bench", "--sizes", "")[0] == 2
    assert run(capsys, "bench", "--sizes", "16", "--families", "")[0] == 2
    assert run(capsys, "bench", "--sizes", "16", "--families", "zigzag")[0] == 2
    assert run(capsys, "bench", "--sizes", "16", "--algos", "bogo")[0] == 2
    assert run(capsys, "bench", "--sizes", "16", "--seeds", "a,b")[0] == 2
    assert run(capsys, "bench", "--sizes", "12", "--families", "bitrev")[0] == 2


def test_parse_sizes():
    assert parse_sizes("16,64") == [16, 64]
    assert parse_sizes("2^4..2^6, 100") == [16, 32, 64, 100]
    for bad in ("3..8", "x", "0", "2^a"):
        with pytest.raises(UsageError):
            parse_sizes(bad)


def test_deterministic_output(capsys, tmp_path):
    a = run(capsys, "bench", "--sizes", "64", "--families", "random", "--seed", "7")[1]
    b = run(capsys, "bench", "--sizes", "64", "--families", "random", "--seed", "7")[1]
    assert a == b


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "arborsort", "gen", "reversed", "3"], capture_output=True, text=True
    )
    assert res.returncode == 0 and res.stdout == "2\n1\n0\n"
