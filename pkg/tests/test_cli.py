import csv
import json

import pytest

from cvxext.cli import main


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def interval_problem(tmp_path):
    return _write(tmp_path / "interval.json", {
        "body": {"type": "polytope", "vertices": [[-1.0], [1.0]]},
        "field": {"name": "quadratic", "params": {"n": 1}},
        "pipeline": "finite", "order": 4, "step": 0.1, "seed": 3})


# check

def test_check_cubic_fails_with_witness(problems_dir, tmp_path, capsys):
    assert main(["check", "--problem", str(problems_dir / "cubic_1d.json"),
                 "--out", str(tmp_path)]) == 2
    wit = json.loads((tmp_path / "witness.json").read_text())
    assert wit["order"] == 3 and wit["witness"]["Q"] == pytest.approx(-6.0, abs=1e-9)
    check = json.loads((tmp_path / "check.json").read_text())
    assert check["endpoint"]["right"]["pass"] is False
    assert "FAIL" in capsys.readouterr().out


def test_check_disk_passes(problems_dir, tmp_path):
    assert main(["check", "--problem", str(problems_dir / "disk_quadratic.json"),
                 "--out", str(tmp_path)]) == 0
    with open(tmp_path / "q_profile.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["order", "t", "min_Q"] and len(rows) > 1


def test_malformed_file_exits_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["check", "--problem", str(bad), "--out", str(tmp_path)]) == 1
    assert main(["extend", "--problem", str(tmp_path / "missing.json")]) == 1
    assert main(["check", "--problem", _write(tmp_path / "nobody.json", {"field": "quadratic"}),
                 "--out", str(tmp_path)]) == 1


def test_bad_arguments_exit_one():
    assert main(["frobnicate"]) == 1
    assert main(["extend", "--pipeline", "magic", "--problem", "x.json"]) == 1


# extend

@pytest.mark.slow
def test_extend_disk_writes_report(problems_dir, tmp_path):
    assert main(["extend", "--problem", str(problems_dir / "disk_quadratic.json"),
                 "--out", str(tmp_path), "--grid-step", "0.25"]) == 0
    res = json.loads((tmp_path / "result.json").read_text())
    assert res["pipeline"] == "smooth" and res["report"]["midpoint_violations"] == 0
    assert res["report"]["min_hessian_eig"] >= -1e-6
    with open(tmp_path / "grid.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["x1", "x2", "F", "min_eig"]


def test_extend_cubic_exits_two(problems_dir, tmp_path):
    assert main(["extend", "--problem", str(problems_dir / "cubic_1d.json"),
                 "--out", str(tmp_path)]) == 2
    assert json.loads((tmp_path / "witness.json").read_text())["witness"]["y"] == [1 / 3]


def test_extend_fio_on_polytope_exits_one(problems_dir, tmp_path):
    assert main(["extend", "--problem", str(problems_dir / "square_quadratic.json"),
                 "--pipeline", "fio", "--order", "3", "--out", str(tmp_path)]) == 1


# corpus

@pytest.mark.slow
def test_corpus_full_run(capsys):
    assert main(["corpus"]) == 0
    out = capsys.readouterr().out
    assert " NO" not in out and "disk_quadratic" in out


def test_corpus_filtered_shows_only_that_entry(tmp_path, capsys):
    assert main(["corpus", "--name", "cubic_1d", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()[1:]
    assert lines and all(line.startswith("cubic_1d:") for line in lines)
    rows = json.loads((tmp_path / "corpus.json").read_text())
    assert {r["entry"] for r in rows} == {"cubic_1d"}


def test_corpus_unknown_name_exits_one(capsys):
    assert main(["corpus", "--name", "nope"]) == 1
    assert "unknown corpus entry" in capsys.readouterr().err


# minimal

def test_minimal_on_disk(problems_dir, tmp_path, capsys):
    assert main(["minimal", "--problem", str(problems_dir / "disk_quadratic.json"),
                 "--out", str(tmp_path), "--samples", "4096"]) == 0
    mf = json.loads((tmp_path / "minimal.json").read_text())["m_f"]
    assert mf[0] == pytest.approx(3.0, abs=1e-6) and mf[1] == pytest.approx(5.0, abs=1e-5)


# determinism

def test_reports_are_byte_identical(interval_problem, problems_dir, tmp_path):
    outs = []
    for run in ("a", "b"):
        d = tmp_path / run
        assert main(["extend", "--problem", interval_problem, "--out", str(d)]) == 0
        assert main(["check", "--problem", str(problems_dir / "disk_quadratic.json"),
                     "--out", str(d), "--order", "4"]) == 0
        outs.append([(d / name).read_bytes() for name in ("result.json", "grid.csv",
                                                          "check.json", "q_profile.csv")])
    assert outs[0] == outs[1]
