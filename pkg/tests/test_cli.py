import csv
import functools
import io
import json

import numpy as np
import pytest

from matchbound import cli, verify
from matchbound.model import AlgorithmDecision


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_gamma_star(capsys, tmp_path):
    curve = tmp_path / "curve.csv"
    code, out, err = run(capsys, "gamma-star", "--curve", str(curve))
    assert code == 0
    assert "gamma*=0.526105" in err
    assert rows(out)[0]["gamma_star"].startswith("0.526")
    vals = np.array([float(r["gamma"]) for r in rows(curve.read_text())])
    peak = int(np.argmax(vals))
    assert 0 < peak < len(vals) - 1
    assert np.all(np.diff(vals[:peak + 1]) > 0) and np.all(np.diff(vals[peak:]) < 0)


def test_gamma_star_coarse(capsys):
    code, out, _ = run(capsys, "gamma-star", "--tol", "1e-2", "--format", "json")
    assert code == 0
    assert json.loads(out)["gamma_star"] == pytest.approx(0.5261049, abs=1e-2)


def test_f_table_row(capsys):
    code, out, err = run(capsys, "f-table", "--eps", "0.5", "--gamma", "0.6", "--n", "2")
    assert code == 0
    row = next(r for r in rows(out) if r["n"] == "2" and r["x"] == "0")
    assert float(row["F"]) == pytest.approx(2 / 15, abs=2e-3)
    assert float(row["argmax_a"]) == pytest.approx(0.933)
    assert row["branch"] == "conservative"
    assert "NEGATIVE" not in err


def test_f_table_affine_and_negative(capsys):
    _, out, _ = run(capsys, "f-table", "--n", "1")
    F = np.array([float(r["F"]) for r in rows(out)])
    assert np.allclose(np.diff(F, 2), 0, atol=1e-12)
    _, _, err = run(capsys, "f-table", "--gamma", "0.9", "--n", "2")
    assert "NEGATIVE" in err


def test_find_n(capsys):
    code, out, err = run(capsys, "find-n", "--eps", "0.5", "--gamma", "0.9", "--format", "json")
    assert code == 0 and json.loads(out)["n"] == 2
    _, out, _ = run(capsys, "find-n", "--eps", "0.5", "--gamma", "0.5", "--n-max", "5")
    assert rows(out)[0]["found"] == "False"


def test_duel_greedy(capsys):
    code, out, err = run(capsys, "duel", "--algorithm", "greedy", "--eps", "0.5",
                         "--gamma", "0.6", "--n", "2", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["ratio"] <= 2 / 3 + 1e-12
    assert data["v_alg"] <= data["bound"]
    assert "ratio=0.666666666667" in err


def test_duel_zero_algorithm(capsys):
    _, out, _ = run(capsys, "duel", "--algorithm", "fixed:0", "--format", "json")
    data = json.loads(out)
    assert data["ratio"] == 0
    assert data["v_alg"] == pytest.approx(0.5 * (0 - 0.6 * 2 * data["opt_size"]))


def test_duel_cohort_engine(capsys):
    code, out, err = run(capsys, "duel", "--algorithm", "greedy", "--eps", "0.25", "--n", "3",
                         "--N", "6400", "--engine", "cohort")
    assert code == 0 and "engine=cohort" in err
    assert rows(out)[0]["size_a"] == "6400"


def test_duel_tz_ratio(capsys, star):
    _, out, _ = run(capsys, "duel", "--algorithm", "tz", "--eps", "0.25", "--n", "3",
                    "--format", "json")
    assert json.loads(out)["ratio"] >= star[1] - 5 * 0.25


@pytest.mark.parametrize("argv", [
    ["duel", "--eps", "0.3"],
    ["duel", "--N", "6"],
    ["duel", "--algorithm", "nope"],
    ["f-table", "--grid-step", "0.3"],
    ["find-n", "--n-max", "0"],
    ["duel", "--engine", "cohort", "--serialize"],
    ["crosscheck", "--action-step", "0.3"],
])
def test_config_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["duel", "--format", "xml"])
    assert err.value.code == 2


def test_verify_filter(capsys):
    code, out, err = run(capsys, "verify", "--claims", "lipschitz", "--n", "3")
    assert code == 0
    assert [r["claim"] for r in rows(out)] == ["lipschitz"]
    assert err.startswith("PASS lipschitz")


def test_verify_unknown_claim(capsys):
    assert run(capsys, "verify", "--claims", "bogus")[0] == 2


def test_verify_surfaces_infeasible_algorithm(capsys, monkeypatch):
    class Overfill:
        name = "overfill"
        init = "uniform"

        def on_init(self, N, x):
            return [x] * N

        def on_arrival(self, event, state):
            return AlgorithmDecision({(u, v): 1.0 for u, nb in event.batch for v in nb})

    monkeypatch.setattr(verify, "make_algorithm", lambda name, init="uniform": Overfill())
    code, _, err = run(capsys, "verify", "--claims", "bound", "--eps", "0.5", "--gamma", "0.6",
                       "--n", "2")
    assert code == 3
    assert "InfeasibleDecision" in err


def test_verify_reports_failure(capsys, monkeypatch):
    quiet = functools.partial(verify.SuiteConfig, impossibility_eps=0.5,
                              impossibility_gamma=0.5, impossibility_n_max=6)
    monkeypatch.setattr(cli, "SuiteConfig", quiet)
    code, out, _ = run(capsys, "verify", "--claims", "impossibility")
    assert code == 3 and rows(out)[0]["passed"] == "False"


def test_thread_env(monkeypatch, capsys):
    monkeypatch.setenv("MATCHBOUND_THREADS", "zero")
    assert run(capsys, "verify", "--claims", "monotone", "--n", "2")[0] == 2
    monkeypatch.setenv("MATCHBOUND_THREADS", "1")
    assert run(capsys, "verify", "--claims", "monotone", "--n", "2")[0] == 0


def test_crosscheck(capsys):
    code, out, err = run(capsys, "crosscheck", "--gamma", "0.9", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert abs(data["difference"]) <= 1e-12 and data["passed"]
    code, out, _ = run(capsys, "crosscheck", "--n", "3", "--action-step", "0.05",
                       "--grid-step", "0.05")
    assert code == 0


def test_frontier_export(capsys, tmp_path):
    h = tmp_path / "h.csv"
    code, out, err = run(capsys, "frontier-export", "--grid-step", "0.01", "--h-output", str(h))
    assert code == 0
    assert rows(out)[0].keys() == {"x", "G", "g", "a"}
    assert len(rows(out)) == 101
    assert h.read_text().startswith("y,H\n")
    assert "certified=0.52" in err


def test_outputs_are_deterministic(capsys, tmp_path):
    cases = [
        ["gamma-star", "--format", "json"],
        ["f-table", "--n", "3", "--eps", "0.25"],
        ["duel", "--algorithm", "tz", "--n", "3", "--eps", "0.25", "--format", "json"],
        ["verify", "--claims", "f-values,minimax,toy"],
        ["frontier-export", "--grid-step", "0.01", "--format", "json"],
    ]
    for i, argv in enumerate(cases):
        blobs = []
        for rep in range(2):
            path = tmp_path / f"{i}-{rep}.out"
            assert run(capsys, *argv, "--output", str(path))[0] == 0
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1], argv


def test_figures(capsys, tmp_path):
    figs = {
        "gamma-star": tmp_path / "g.png",
        "f-table": tmp_path / "f.png",
        "frontier-export": tmp_path / "fr.svg",
        "duel": tmp_path / "d.png",
    }
    for cmd, path in figs.items():
        assert run(capsys, cmd, "--figure", str(path), "--grid-step", "0.01")[0] == 0
        first = path.read_bytes()
        assert len(first) > 1000
        run(capsys, cmd, "--figure", str(path), "--grid-step", "0.01")
        assert path.read_bytes() == first
