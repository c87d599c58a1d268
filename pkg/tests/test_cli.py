import csv
import io
import json
import math

import numpy as np
import pytest

from hessk.cli import main, parse_int_list
from hessk.matform import dump_matrix


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def identity3(tmp_path):
    path = tmp_path / "id3.json"
    path.write_text(dump_matrix(np.eye(3)))
    return path


def test_parse_int_list():
    assert parse_int_list("4..6,9") == [4, 5, 6, 9]
    assert parse_int_list("") == []


def test_eval_matrix_functions(capsys, identity3):
    code, out, _ = run(capsys, "eval", "--fn", "Fk", "--k", "2", "--input", str(identity3))
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(math.log(3))
    code, out, _ = run(capsys, "eval", "--fn", "Sk", "--k", "2", "--input", str(identity3))
    assert json.loads(out)["value"] == 3.0
    code, out, _ = run(capsys, "eval", "--fn", "d2F", "--k", "2", "--input", str(identity3),
                       "--direction", str(identity3))
    assert json.loads(out)["value"] == pytest.approx(-2)


def test_eval_scalar_functions(capsys):
    code, out, _ = run(capsys, "eval", "--fn", "sigma", "--k", "2", "--lam", "1,2,3")
    assert code == 0 and json.loads(out)["value"] == 11
    code, out, _ = run(capsys, "eval", "--fn", "d2f", "--k", "2", "--lam", "1,1,1", "--direction", "1,1,1")
    assert json.loads(out)["value"] == pytest.approx(-2)


def test_float_output_round_trips(capsys):
    _, out, _ = run(capsys, "eval", "--fn", "fk", "--k", "2", "--lam", "0.3,0.7,1.1")
    from hessk.scalarform import f_k

    assert json.loads(out)["value"] == f_k(2, [0.3, 0.7, 1.1])
    _, out, _ = run(capsys, "eval", "--fn", "fk", "--k", "2", "--lam", "0.3,0.7,1.1", "--format", "csv")
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["value"]) == f_k(2, [0.3, 0.7, 1.1])


def test_usage_errors_exit_one(capsys, tmp_path):
    assert run(capsys, "eval", "--fn", "Fk", "--k", "2")[0] == 1
    assert run(capsys, "eval", "--fn", "Fk", "--k", "2", "--input", str(tmp_path / "missing.json"))[0] == 1
    assert run(capsys, "bogus")[0] == 1
    assert run(capsys, "verify", "--suite", "nope", "--n", "5", "--k", "3")[0] == 1
    assert run(capsys, "eval", "--fn", "fk", "--k", "9", "--lam", "1,2")[0] == 1


def test_check_cone(capsys):
    code, out, _ = run(capsys, "check-cone", "--lam", "1,1,1,1,1,1,1,1,1,1", "--k", "7")
    d = json.loads(out)
    assert code == 0 and d["in_gamma_cone"] and d["in_sigma_gamma"] and d["branch"] == "MIDRANGE"


def test_check_admissible(capsys, identity3):
    code, out, _ = run(capsys, "check-admissible", "--input", str(identity3), "--delta", "0.1", "--mu", "0.05")
    assert code == 0 and json.loads(out)["admissible"] is True
    code, out, _ = run(capsys, "check-admissible", "--input", str(identity3), "--delta", "0.1", "--mu", "0.5")
    assert json.loads(out)["admissible"] is False


def test_ledger_command(capsys):
    code, out, _ = run(capsys, "ledger", "--n", "5", "--k", "3", "--delta", "0", "--samples", "200")
    d = json.loads(out)
    assert code == 0
    assert d["C6"] == 7.0 and d["mu_k"] == pytest.approx(0.0375)


def test_estimate_gamma_command(capsys):
    code, out, _ = run(capsys, "estimate-gamma", "--n", "5", "--k", "3", "--samples", "500")
    d = json.loads(out)
    assert code == 0 and d["value"] > 0 and d["label"] == "empirical upper bound"


def test_verify_report_schema_and_determinism(capsys):
    argv = ["verify", "--suite", "dconcavity", "--n", "5", "--k", "3", "--delta", "0.05",
            "--samples", "50", "--seed", "42"]
    code, first, _ = run(capsys, *argv)
    assert code == 0
    d = json.loads(first)
    assert {"suite", "params", "ledger", "samples", "violations", "worst_margin", "seed"} <= set(d)
    assert "wall_ms" not in d
    assert run(capsys, *argv)[1] == first
    _, timed, _ = run(capsys, *argv, "--timing")
    assert "wall_ms" in json.loads(timed)


def test_verify_all_csv(capsys, tmp_path):
    out = tmp_path / "r.csv"
    code, _, _ = run(capsys, "verify", "--suite", "all", "--n", "5", "--k", "3", "--samples", "20",
                     "--format", "csv", "--output", str(out))
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert code == 0
    assert {r["suite"] for r in rows} == {"prop31_34", "prop51", "dconcavity", "structural", "minors",
                                           "theorem41"}


def test_verify_violation_exit_code(capsys, monkeypatch):
    from hessk import cli
    from hessk.verify import Record, VerificationReport

    def planted(n, k, params, samples, seed):
        rep = VerificationReport("planted", {"n": n, "k": k}, seed, samples)
        rep.add_records([Record("x", 1.0, 0.0)])
        return rep

    monkeypatch.setitem(cli.SUITES, "dconcavity", planted)
    code, out, _ = run(capsys, "verify", "--suite", "dconcavity", "--n", "5", "--k", "3")
    assert code == 2 and json.loads(out)["violations"] == 1


def test_sweep_empty_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--ns", "")
    assert code == 0 and json.loads(out)["rows"] == []


def test_sweep_with_plots(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    argv = ["sweep", "--ns", "4..5", "--samples", "300", "--pairs", "10", "--format", "csv",
            "--output", str(out), "--plot"]
    code, _, _ = run(capsys, *argv)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [(r["n"], r["k"]) for r in rows] == [("4", "2"), ("4", "3"), ("5", "2"), ("5", "3"), ("5", "4")]
    gamma_svg, margin_svg = tmp_path / "sweep_gamma.svg", tmp_path / "sweep_margin.svg"
    assert gamma_svg.read_text().lstrip().startswith("<?xml")
    first = (out.read_text(), gamma_svg.read_text(), margin_svg.read_text())
    run(capsys, *argv)
    assert (out.read_text(), gamma_svg.read_text(), margin_svg.read_text()) == first
