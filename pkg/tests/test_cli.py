import io
import os

import pytest

from nqn.cli import main
from nqn.problems import problem_names

SMALL_SPEC = """
problems = L1, MAXQ
dims = 6
seeds = 0..1
variants = V1, V3
epsilons = 1e-2, 1e-4
budget_multiplier = 30
"""


def _run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


def test_list_problems():
    code, text = _run(["list-problems"])
    lines = text.strip().splitlines()
    assert code == 0 and len(lines) == 12
    assert [line.split()[0] for line in lines] == problem_names()


def test_solve_myopic_decoupled_is_ok():
    code, text = _run(["solve", "--problem", "Myopic_Decoupled", "--n", "100", "--variant", "V3",
                       "--seed", "1"])
    fields = dict(line.split(" ", 1) for line in text.strip().splitlines())
    assert code == 0 and fields["flag"] == "OK"
    assert int(fields["grad_evals"]) <= 100 * 100 + 200
    assert fields["f_star"].startswith("15.0")


def test_trace_format_and_determinism(tmp_path):
    paths = [str(tmp_path / ("t%d.csv" % i)) for i in range(2)]
    for p in paths:
        code, _ = _run(["solve", "--problem", "Myopic_Coupled", "--n", "10", "--seed", "2",
                        "--trace", p])
        assert code in (0, 1)
    data = [open(p, "rb").read() for p in paths]
    assert data[0] == data[1]
    rows = data[0].decode().splitlines()
    assert rows
    for k, row in enumerate(rows):
        cols = row.split(",")
        assert len(cols) == 7 and int(cols[0]) == k
        float(cols[1])
        assert int(cols[2]) <= int(cols[3])
        assert cols[5] in ("WolfeStep", "DecreaseOnly", "NoDirection", "SearchError")
    evals = [int(r.split(",")[6]) for r in rows]
    assert evals == sorted(evals)


@pytest.mark.parametrize("argv", [
    ["solve"],
    ["solve", "--problem", "Nope"],
    ["solve", "--problem", "Myopic_Decoupled", "--n", "5"],
    ["solve", "--problem", "L1", "--variant", "V9"],
    ["solve", "--problem", "L1", "--bogus"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_2(argv, capsys):
    code, _ = _run(argv)
    assert code == 2


def test_missing_problem_lists_valid_names(capsys):
    _run(["solve"])
    err = capsys.readouterr().err
    assert all(name in err for name in problem_names())


def test_check_grads_subset():
    code, text = _run(["check-grads", "--n", "10", "--points", "5", "--problem", "L1",
                       "--problem", "MAXQ"])
    assert code == 0 and text.strip().endswith("PASS")
    assert len(text.strip().splitlines()) == 3


def test_bench_with_spec_file(tmp_path):
    spec = tmp_path / "m.spec"
    spec.write_text(SMALL_SPEC)
    out_dir = tmp_path / "out"
    code, text = _run(["bench", "--spec", str(spec), "--out", str(out_dir)])
    assert code == 0
    assert sorted(os.listdir(out_dir)) == ["profile_eps_1e-02.svg", "profile_eps_1e-04.svg",
                                           "runs.csv", "summary.txt"]
    rows = (out_dir / "runs.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 2 * 2


def test_bench_output_directory_precedence(tmp_path, monkeypatch):
    monkeypatch.delenv("NQN_OUT_DIR", raising=False)
    spec = tmp_path / "m.spec"
    spec.write_text(SMALL_SPEC + "output_dir = %s\nseeds = 0\nproblems = L1\n"
                    % (tmp_path / "from_spec"))
    code, text = _run(["bench", "--spec", str(spec), "--verbose"])
    assert code == 0 and "from spec file output_dir" in text
    assert "precedence:" in text and "[1/2]" in text
    monkeypatch.setenv("NQN_OUT_DIR", str(tmp_path / "from_env"))
    code, text = _run(["bench", "--spec", str(spec), "--verbose"])
    assert code == 0 and "from NQN_OUT_DIR" in text
    assert (tmp_path / "from_env" / "runs.csv").exists()
    code, text = _run(["bench", "--spec", str(spec), "--out", str(tmp_path / "flag"),
                       "--verbose"])
    assert code == 0 and "from --out flag" in text


def test_bench_without_output_directory_or_with_bad_spec(tmp_path, monkeypatch):
    monkeypatch.delenv("NQN_OUT_DIR", raising=False)
    spec = tmp_path / "m.spec"
    spec.write_text("problems = L1\ndims = 4\nseeds = 0\n")
    assert _run(["bench", "--spec", str(spec)])[0] == 2
    spec.write_text("problems = Nope\n")
    assert _run(["bench", "--spec", str(spec), "--out", str(tmp_path)])[0] == 2
    assert _run(["bench", "--spec", str(tmp_path / "missing")])[0] == 2
