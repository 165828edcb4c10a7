import csv
import io
import json
import subprocess
import sys

import pytest

from hetcd.cli import main
from hetcd.data import Dataset

CHAIN = {
    "graph": {"nodes": ["X", "Z", "Y"], "edges": [["X", "Z", "->"], ["Z", "Y", "->"]]},
    "coefficients": [["X", "Z", 0.5], ["Z", "Y", 0.5]],
    "hetero": {"Y": {"shape": "linear", "strength": 3.0, "driver": "parent:Z"}},
}
COLUMNS = ["experiment", "variant", "strength", "metric", "value", "stderr", "n", "reps", "seed"]


@pytest.fixture
def chain_files(tmp_path):
    spec = tmp_path / "chain.json"
    spec.write_text(json.dumps(CHAIN))
    data, sigma = tmp_path / "data.csv", tmp_path / "sigma.csv"
    assert main(["simulate", "--spec", str(spec), "--n", "500", "--seed", "4",
                 "-o", str(data), "--sigma-output", str(sigma)]) == 0
    return data, sigma


def test_simulate_is_byte_identical(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"run{i}.csv"
        assert main(["simulate", "--d", "6", "--m", "6", "--strength", "2", "--seed", "9",
                     "--n", "100", "-o", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert Dataset.from_csv_text(outs[0].decode()).n == 100


def test_simulate_spec_output_round_trip(tmp_path):
    out, spec = tmp_path / "d.csv", tmp_path / "s.json"
    assert main(["simulate", "--bivariate", "--placement", "both", "--strength", "2",
                 "--n", "50", "-o", str(out), "--spec-output", str(spec)]) == 0
    assert json.loads(spec.read_text())


def test_ci_single_chain_independent(chain_files, tmp_path, capsys):
    data, sigma = chain_files
    know = tmp_path / "know.json"
    know.write_text(json.dumps({"Y": "parent:Z"}))
    know = str(know)
    for extra in ([], ["--knowledge", know],
                  ["--knowledge", know, "--weight-mode", "ground_truth", "--sigma", str(sigma)]):
        assert main(["ci-single", str(data), "--x", "X", "--y", "Y", "--cond", "Z", *extra]) == 0
        res = json.loads(capsys.readouterr().out)
        assert res["p_value"] > 0.05 and res["dependent"] is False
        assert res["dof"] == 497


def test_ci_single_marginal_dependence(chain_files, capsys):
    data, _ = chain_files
    assert main(["ci-single", str(data), "--x", "X", "--y", "Y"]) == 0
    assert json.loads(capsys.readouterr().out)["dependent"] is True


def test_malformed_knowledge_names_key(chain_files, tmp_path, capsys):
    data, _ = chain_files
    bad = tmp_path / "know.json"
    bad.write_text(json.dumps({"Y": "parent:Z", "X": "sometimes"}))
    code = main(["ci-single", str(data), "--x", "X", "--y", "Y", "--cond", "Z",
                 "--knowledge", str(bad)])
    assert code == 1
    assert "'X'" in capsys.readouterr().err


def test_unknown_variable_and_bad_csv(chain_files, tmp_path, capsys):
    data, _ = chain_files
    assert main(["ci-single", str(data), "--x", "X", "--y", "W"]) == 1
    broken = tmp_path / "broken.csv"
    broken.write_text("A,B\n1,2\n3,oops\n")
    assert main(["ci-single", str(broken), "--x", "A", "--y", "B"]) == 1
    assert "3" in capsys.readouterr().err
    assert main(["ci-single", str(tmp_path / "missing.csv"), "--x", "A", "--y", "B"]) == 2


def test_usage_errors_exit_one(capsys):
    assert main([]) == 1
    assert main(["no-such-command"]) == 1
    assert main(["citest-bench", "--reps", "0"]) == 1
    assert main(["pc-bench", "--strengths", "-1"]) == 1


def test_selftest_subprocess():
    proc = subprocess.run([sys.executable, "-m", "hetcd", "selftest"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.count("PASS") == 3


def _bench(tmp_path, kind, threads, name, *extra):
    out = tmp_path / name
    args = [kind, "--strengths", "0,2", "--reps", "6", "--n", "120", "--bootstrap", "50",
            "--seed", "3", "--threads", str(threads), "-o", str(out), *extra]
    assert main(args) == 0
    return out.read_bytes()


@pytest.mark.parametrize("kind,extra", [
    ("citest-bench", ["--placement", "both", "--driver", "z"]),
    ("pc-bench", ["--d", "5", "--m", "5", "--lam", "5"]),
])
def test_bench_csv_schema_and_worker_determinism(tmp_path, kind, extra):
    one = _bench(tmp_path, kind, 1, "a.csv", *extra)
    two = _bench(tmp_path, kind, 2, "b.csv", *extra)
    assert one == two
    rows = list(csv.DictReader(io.StringIO(one.decode())))
    assert list(rows[0])[:len(COLUMNS)] == COLUMNS
    assert {"cell_seed", "config_hash"} <= set(rows[0])
    assert {r["variant"] for r in rows} == {"ols", "wls-estimated", "wls-groundtruth"}
    assert all(r["seed"] == "3" and r["reps"] == "6" for r in rows)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "citest-bench", "strengths": [1.0], "reps": 3,
                               "n": 80, "bootstrap": 20, "placement": "x-only", "driver": "z"}))
    out = tmp_path / "o.csv"
    assert main(["citest-bench", "--config", str(cfg), "--reps", "4", "-o", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert {r["reps"] for r in rows} == {"4"} and {r["strength"] for r in rows} == {"1.0"}
    cfg.write_text(json.dumps({"repetitions": 3}))
    assert main(["citest-bench", "--config", str(cfg)]) == 1
