import csv
import io
import json

import pytest

from brtree import __version__
from brtree.cli import main
from brtree.formulas import harmonic
from brtree.records import read_records
from brtree.shuffle import ShufflePermutation
from brtree.tree import RecursiveTree, tree_from_permutation


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sample_is_deterministic(capsys):
    argv = ["sample", "--n", "8", "--p", "0.33333333,0.33333333,0.33333334", "--seed", "7",
            "--count", "3"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    recs = read_records(out)
    assert len(recs) == 3
    assert run(capsys, *argv)[1] == out
    assert recs[0]["version"] == __version__ and recs[0]["seed"] == 7
    assert recs[0]["config"]["model"]["p"] == [0.33333333, 0.33333333, 0.33333334]


def test_sample_path(capsys):
    code, out, _ = run(capsys, "sample", "--n", "4", "--a", "1", "--count", "1")
    assert read_records(out)[0]["result"]["parents"] == [1, 2, 3]


def test_sample_both_is_consistent(capsys):
    code, out, _ = run(capsys, "sample", "--n", "8", "--a", "3", "--emit", "both", "--count", "5")
    for rec in read_records(out):
        res = rec["result"]
        assert res["consistent"] is True
        tree = tree_from_permutation(ShufflePermutation.parse(res["permutation"]))
        assert tree == RecursiveTree(res["parents"])


def test_sample_forward_and_urt(capsys):
    code, out, _ = run(capsys, "sample", "--n", "12", "--p", "0.5,0.5", "--method", "forward",
                       "--emit", "perm")
    assert code == 0 and "permutation" in read_records(out)[0]["result"]
    code, out, _ = run(capsys, "sample", "--n", "12", "--urt", "--digits")
    assert code == 0 and "digits" not in read_records(out)[0]["result"]


def test_moments_examples(capsys):
    code, out, _ = run(capsys, "moments", "--stat", "branches", "--n", "4", "--a", "2")
    rec = read_records(out)[0]
    assert rec["result"]["mean"] == 1.375 and rec["result"]["variance"] == 0.234375
    assert rec["provenance"] == ["branches-mean-uniform", "branches-variance-uniform"]
    code, out, _ = run(capsys, "moments", "--stat", "atleast", "--k", "0", "--n", "20",
                       "--p", "0.5,0.3,0.2")
    assert read_records(out)[0]["result"]["mean"] == 20
    code, out, _ = run(capsys, "moments", "--stat", "depth", "--n", "10", "--a", "1000000")
    assert abs(read_records(out)[0]["result"]["mean"] - harmonic(9)) < 1e-5


def test_moments_all_and_rerun_is_bit_identical(capsys):
    argv = ["moments", "--n", "30", "--p", "0.2,0.8", "--k", "2"]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and len(read_records(out)) == 5
    assert run(capsys, *argv)[1] == out


def test_bad_inputs(capsys):
    code, _, err = run(capsys, "moments", "--stat", "branches", "--n", "4", "--p", "0.5,0.4")
    assert code == 2 and "sum" in err
    code, out, _ = run(capsys, "moments", "--stat", "branches", "--n", "4", "--p", "5,4", "--normalize")
    assert code == 0
    code, _, err = run(capsys, "moments", "--stat", "branches", "--n", "2", "--a", "3")
    assert code == 0                      # mean known, variance flagged
    code, _, err = run(capsys, "moments", "--stat", "atleast", "--k", "9", "--n", "5", "--a", "3")
    assert code == 2 and "k must" in err
    code, _, err = run(capsys, "moments", "--stat", "branches", "--n", "4")
    assert code == 2
    with pytest.raises(SystemExit):
        main(["moments", "--n", "4", "--a", "2", "--urt"])


def test_verify_default_grid(capsys):
    code, out, _ = run(capsys, "verify")
    recs = read_records(out)
    assert code == 0 and len(recs) > 900
    assert all(r["result"]["passed"] for r in recs)


def test_verify_skips_above_cap(capsys, caplog):
    code, out, err = run(capsys, "verify", "--a", "3", "--cap", "100")
    assert code == 0 and "skipping" in caplog.text
    assert any(r["result"]["skipped"] for r in read_records(out))


def test_verify_tv_and_covariance(capsys):
    code, out, _ = run(capsys, "verify", "--stat", "tvbound", "--n", "6", "--a", "8")
    recs = read_records(out)
    assert code == 0 and all(r["result"]["tv"] <= r["result"]["bound"] for r in recs)
    code, out, _ = run(capsys, "verify", "--stat", "covariance", "--n", "8", "--k", "2", "--a", "2")
    assert code == 0 and read_records(out)[0]["result"]["passed"]


def test_experiment_sweep(capsys):
    code, out, _ = run(capsys, "experiment", "sweep", "--quantity", "branches-vs-a", "--n", "10",
                       "--amax", "100000")
    rows = read_records(out)[0]["result"]["rows"]
    assert [r["param"] for r in rows] == [10, 100, 1000, 10_000, 100_000]
    assert rows[-1]["gap"] < 1e-4


def test_experiment_stronglaw(capsys):
    code, out, _ = run(capsys, "experiment", "stronglaw", "--k", "0", "--a", "2", "--nmax", "100000")
    res = read_records(out)[0]["result"]
    assert code == 0 and res["grid"][-1] == 100000 and res["limit"] == 0.25


def test_experiment_moments_and_clt(capsys):
    code, out, _ = run(capsys, "experiment", "moments", "--stat", "atleast:2", "--n", "1000",
                       "--p", "0.5,0.3,0.2", "--samples", "5000", "--seed", "3", "--max-z", "5")
    assert code == 0
    first = read_records(out)[0]["result"]
    _, out3, _ = run(capsys, "experiment", "moments", "--stat", "atleast:2", "--n", "1000",
                     "--p", "0.5,0.3,0.2", "--samples", "5000", "--seed", "3", "--workers", "3")
    assert read_records(out3)[0]["result"]["mean"] == first["mean"]
    code, out, _ = run(capsys, "experiment", "clt", "--n", "1000", "--k", "1", "--a", "3",
                       "--samples", "5000", "--diagnostic")
    assert code == 0 and read_records(out)[0]["result"]["passed"] is None
    code, _, err = run(capsys, "experiment", "clt", "--k", "1", "--a", "3")
    assert code == 2
    assert first["mean"]["value"] > 0


def test_csv_output_and_file(capsys, tmp_path):
    target = tmp_path / "m.csv"
    code, out, _ = run(capsys, "moments", "--n", "12", "--a", "3", "--format", "csv",
                       "--output", str(target))
    assert code == 0 and out == ""
    rows = list(csv.DictReader(io.StringIO(target.read_text())))
    assert len(rows) == 5
    assert list(rows[0])[:7] == ["csv_schema", "tool", "version", "command", "seed", "provenance",
                                 "config"]
    assert rows[0]["csv_schema"] == "brtree-csv/1"
    assert json.loads(rows[0]["config"])["a"] == 3


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "moments", "--n", "5", "--a", "2", "--output",
                       str(tmp_path / "missing" / "x.json"))
    assert code == 3
