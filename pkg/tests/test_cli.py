import csv
import json
import math

import pytest

from heckestat.cli import DEFAULT_SEED, build_parser, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_hecke_expand_csv(tmp_path, capsys):
    path = tmp_path / "e.csv"
    code, out, _ = run(capsys, "hecke", "expand", "--n", "3", "--kappa", "1,0", "--output", str(path))
    assert code == 0
    rows = list(csv.reader(path.read_text().splitlines()))
    assert rows == [["xi", "coefficient"], ["2-0", "1"], ["0-1", "1"]]
    assert str(path) in out


def test_hecke_expand_default_location(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("HECKESTAT_OUTPUT_DIR", str(tmp_path))
    code, _, _ = run(capsys, "hecke", "expand", "--n", "3", "--kappa", "1,0", "--kappa2", "0,1")
    assert code == 0
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    assert files[0].read_text() == "xi,coefficient\n1-1,1\n0-0,1\n"


def test_schur_eval_trivial(capsys):
    code, out, _ = run(capsys, "schur", "eval", "--n", "3", "--kappa", "0,0", "--angles", "0.1,0.2")
    assert code == 0 and out.strip() == "1"


def test_schur_eval_methods_agree(capsys):
    common = ["schur", "eval", "--n", "3", "--kappa", "1,1", "--angles", "0.4,2.1"]
    _, a, _ = run(capsys, *common)
    _, b, _ = run(capsys, *common, "--method", "determinant")
    assert complex(a.strip()) == pytest.approx(complex(b.strip()), abs=1e-9)


def test_schur_eval_degenerate_determinant(capsys):
    code, _, err = run(capsys, "schur", "eval", "--n", "3", "--kappa", "1,0", "--angles", "0,0",
                       "--method", "determinant")
    assert code == 2 and "degenerate" in err.lower()


def test_schur_eval_json(tmp_path, capsys):
    path = tmp_path / "v.json"
    run(capsys, "schur", "eval", "--n", "2", "--kappa", "1", "--angles", "0.5", "--output", str(path))
    data = json.loads(path.read_text())
    assert data["value"]["re"] == pytest.approx(2 * math.cos(0.5))
    assert data["config"]["command"] == "schur eval"


@pytest.mark.parametrize(
    "argv",
    [
        ["schur", "eval", "--n", "3", "--kappa", "1", "--angles", "0.1,0.2"],
        ["schur", "eval", "--n", "3", "--kappa", "1,-1", "--angles", "0.1,0.2"],
        ["schur", "eval", "--n", "3", "--kappa", "a,b", "--angles", "0.1,0.2"],
        ["schur", "eval", "--n", "3", "--kappa", "1,0", "--angles", "0.1"],
        ["schur", "eval", "--n", "3", "--kappa", "1,0", "--angles", "x,0.1"],
        ["experiment", "signs", "--kappa", "1,0", "--X", "100"],
        ["experiment", "vertical", "--prime", "100"],
        ["experiment", "plancherel-norm", "--primes", "4"],
        ["experiment", "small-values", "--deltas", "-0.1"],
        ["experiment", "nonvanishing", "--forced-zeros", "bogus", "--X", "100"],
        ["experiment", "nonvanishing", "--X", "100", "--checkpoints", "500"],
        ["sample", "--measure", "plancherel", "--prime", "6"],
    ],
)
def test_invalid_config_exit_code(tmp_path, capsys, argv):
    code, _, err = run(capsys, *argv, "--output", str(tmp_path / "out"))
    assert code == 2
    assert "error" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--n", "1"],
        ["sample", "--samples", "0"],
        ["sample", "--measure", "plancherel"],
        ["experiment", "signs", "--seed", "-1"],
        ["experiment", "unknown"],
    ],
)
def test_argparse_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_signs_example(tmp_path, capsys):
    path = tmp_path / "signs.json"
    code, out, _ = run(capsys, "experiment", "signs", "--n", "3", "--kappa", "1,1", "--X", "100000",
                       "--measure", "sato-tate", "--seed", "7", "--output", str(path))
    assert code == 0 and "PASS" in out
    rep = json.loads(path.read_text())
    assert 0.45 <= rep["results"]["positive_fraction"] <= 0.55
    assert rep["passed"] is True
    assert rep["seed"] == 7
    assert rep["config"]["X"] == 100000 and rep["config"]["measure"] == "sato-tate"
    assert set(rep) == {"config", "seed", "results", "tolerances", "passed"}


def test_failed_check_exit_1(tmp_path, capsys):
    code, out, _ = run(capsys, "experiment", "signs", "--X", "5000", "--band", "0.9,1.0",
                       "--output", str(tmp_path / "s.json"))
    assert code == 1 and "FAIL" in out
    assert json.loads((tmp_path / "s.json").read_text())["passed"] is False


def test_default_seed_is_fixed():
    args = build_parser().parse_args(["experiment", "signs"])
    assert args.seed == DEFAULT_SEED


def test_reruns_are_byte_identical(tmp_path, capsys):
    for name in ("a", "b"):
        run(capsys, "experiment", "nonvanishing", "--X", "20000", "--checkpoints", "1000,20000",
            "--output", str(tmp_path / f"{name}.json"))
        run(capsys, "sample", "--measure", "plancherel", "--prime", "5", "--samples", "50",
            "--output", str(tmp_path / f"{name}.csv"))
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sample_csv_layout(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sample", "--n", "3", "--samples", "5", "--seed", "3", "--output", str(path))
    assert code == 0
    rows = list(csv.reader(path.read_text().splitlines()))
    assert rows[0] == ["seed", "index", "theta_1", "theta_2", "theta_3"]
    assert [r[1] for r in rows[1:]] == ["0", "1", "2", "3", "4"]
    assert all(r[0] == "3" for r in rows[1:])


def test_nonvanishing_csv(tmp_path, capsys):
    path = tmp_path / "nv.csv"
    code, _, _ = run(capsys, "experiment", "nonvanishing", "--X", "10000", "--checkpoints", "100,1000,10000",
                     "--format", "csv", "--output", str(path))
    assert code == 0
    rows = list(csv.DictReader(path.read_text().splitlines()))
    assert [int(r["X"]) for r in rows] == [100, 1000, 10000]
    assert all(0.5 <= float(r["ratio"]) <= 2.0 for r in rows)


def test_small_values_and_orthonormality(tmp_path, capsys):
    code, _, _ = run(capsys, "experiment", "small-values", "--samples", "20000", "--output", str(tmp_path / "a.json"))
    assert code == 0
    code, _, _ = run(capsys, "experiment", "orthonormality", "--samples", "20000", "--floor", "0.1",
                     "--kappas", "0,0;1,0;0,1", "--output", str(tmp_path / "b.json"))
    assert code == 0
    rep = json.loads((tmp_path / "b.json").read_text())
    assert len(rep["results"]["gram_re"]) == 3


def test_scientific_notation_for_counts(tmp_path, capsys):
    code, _, _ = run(capsys, "experiment", "negative-primes", "--X", "1e4", "--output", str(tmp_path / "n.json"))
    assert code == 0
    assert json.loads((tmp_path / "n.json").read_text())["config"]["X"] == 10000
