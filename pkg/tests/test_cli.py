import dataclasses
import json

import pytest

from quasimean import catalog as cat
from quasimean.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eval(capsys):
    assert run(capsys, "eval", "bessel-plus", "1", "2")[:2] == (0, "3\n")
    assert run(capsys, "eval", "floor-arith?m=0", "2.1", "3")[:2] == (0, "2.5\n")
    assert run(capsys, "eval", "arith", "5")[:2] == (0, "5\n")
    code, out, _ = run(capsys, "eval", "arith", "1", "2", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["schema"] == "quasimean/1" and d["value"]["text"] == "1.5"


def test_exit_codes(capsys):
    assert run(capsys, "eval", "geometric", "-1", "2")[0] == 2
    assert run(capsys, "eval", "no-such-mean", "1", "2")[0] == 64
    assert run(capsys, "dualize", "a1 +")[0] == 64
    assert run(capsys, "iterate", "compound", "--mean", "arith", "--mean", "geometric", "1", "2")[0] == 1
    assert run(capsys, "iterate", "compound", "--mean", "min", "--mean", "bessel-plus", "1", "2")[0] == 1
    assert run(capsys, "iterate", "extend3", "--mean", "arith", "1", "2")[0] == 64
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 64


def test_classify_reports_a_false_declaration(capsys, monkeypatch):
    code, out, _ = run(capsys, "classify", "floor-arith?m=0", "--budget", "300")
    assert code == 0 and json.loads(out)["ok"]
    real = cat.claims

    def lying(ident):
        c = real(ident)
        return dataclasses.replace(c, holds=c.holds | {"reflexive"})

    monkeypatch.setattr(cat, "claims", lying)
    code, out, _ = run(capsys, "classify", "floor-arith?m=0", "--budget", "300")
    assert code == 1 and json.loads(out)["declared_falsified"] == ["reflexive"]


def test_json_is_byte_identical(capsys):
    argv = ("classify", "star-arith?m=1", "--budget", "400", "--seed", "3")
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first
    argv = ("measure", "mdista", "floor-arith?m=1", "--samples", "20000")
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first and json.loads(first)["seed"] == 0


def test_measure(capsys):
    code, out, _ = run(capsys, "measure", "mdist", "floor-arith?m=1", "--budget", "2000")
    d = json.loads(out)
    assert code == 0 and abs(d["value"]["float"] - 0.1) <= 0.002


def test_iterate(capsys):
    code, out, _ = run(capsys, "iterate", "extend3", "--mean", "floor-arith?m=0", "1.1", "2.1", "3.1",
                       "--format", "csv")
    assert code == 0 and out.splitlines()[:3] == ["step,a,b,c", "0,1.1,2.1,3.1", "1,1.5,2,2.5"]
    d = json.loads(run(capsys, "iterate", "compound", "--mean", "geometric", "--mean", "arith", "1", "2")[1])
    assert d["verdict"] == "converged" and abs(d["limit"]["float"] - 1.4567910310469068) < 1e-12
    code, out, _ = run(capsys, "iterate", "bessel-onset", *map(str, range(1, 10)), "--format", "pretty")
    assert (code, out) == (0, "3\n")


def test_dualize(capsys):
    code, out, _ = run(capsys, "dualize", "(a1 + a2)/2")
    assert (code, out) == (0, "root(2, (a1 * a2))\n")
    code, out, _ = run(capsys, "dualize", "(a1 + a2)/2", "--check-mean", "--box", "1:10", "--budget", "300",
                       "--format", "json")
    assert json.loads(out)["check_mean"]["status"] == "holds-on-sample"


def write(tmp_path, rows):
    p = tmp_path / "data.csv"
    p.write_text("x\n" + "\n".join(rows) + "\n")
    return str(p)


def stats(capsys, path, *extra):
    code, out, err = run(capsys, "stats", path, "x", *extra)
    return code, (json.loads(out) if out else None), err


def test_stats(capsys, tmp_path):
    code, d, _ = stats(capsys, write(tmp_path, [str(i) for i in range(1, 11)]), "--estimators", "bessel-plus")
    assert code == 0 and d["estimators"][0]["value"]["float"] == 55 / 9 and d["estimators"][0]["mean_like"]
    _, d, _ = stats(capsys, write(tmp_path, ["1", "2"]), "--estimators", "arith,bessel-plus")
    assert [e["mean_like"] for e in d["estimators"]] == [True, False]
    assert d["estimators"][1]["value"]["text"] == "3"
    _, d, _ = stats(capsys, write(tmp_path, ["4", "4", "4"]), "--estimators", "trimmed-k3")
    assert d["estimators"][0]["value"]["float"] == 4 / 3 and not d["estimators"][0]["mean_like"]
    _, d, _ = stats(capsys, write(tmp_path, ["2.1", "3"]), "--estimators", "floor-arith", "--precision", "0")
    assert d["estimators"][0]["id"] == "floor-arith?m=0" and d["estimators"][0]["value"]["text"] == "2.5"


def test_stats_errors(capsys, tmp_path):
    code, _, err = stats(capsys, write(tmp_path, ["1", "oops", "3"]))
    assert code == 2 and "row 3" in err
    assert run(capsys, "stats", write(tmp_path, ["1"]), "y")[0] == 64
    assert run(capsys, "stats", str(tmp_path / "missing.csv"), "x")[0] == 64


def test_catalog_and_out_file(capsys, tmp_path):
    code, out, _ = run(capsys, "catalog")
    assert code == 0 and "bessel-plus" in out and "floor-arith?m=0" in out
    target = tmp_path / "r.json"
    assert run(capsys, "catalog", "arith", "--format", "json", "--out", str(target))[:2] == (0, "")
    assert json.loads(target.read_text())["entries"][0]["id"] == "arith"
