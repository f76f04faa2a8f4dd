import csv

import pytest

from p2nia.cli import main
from p2nia.metrics import FairnessReport


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["make-desk-data", "--rows", "6000", "--seed", "1", "--out", str(d / "desk.csv"),
                 "--schema-out", str(d / "schema.json")]) == 0
    assert main(["train", "--dataset", str(d / "desk.csv"), "--schema", str(d / "schema.json"),
                 "--train-fraction", "0.8", "--out", str(d / "model.json")]) == 0
    return d


def run(args):
    return main([str(a) for a in args])


def test_full_protocol_via_files(workspace):
    d = workspace
    assert run(["request", "--n-prime", 800, "--protected", "sex", "--mechanism", "grr", "--epsilon", 5,
                "--out", d / "req.txt"]) == 0
    assert run(["privatize", "--dataset", d / "desk.csv", "--schema", d / "schema.json", "--model",
                d / "model.json", "--request", d / "req.txt", "--seed", 3, "--out", d / "rel.csv"]) == 0
    assert (d / "rel.csv.meta.json").exists()
    assert run(["audit", "--release", d / "rel.csv", "--request", d / "req.txt", "--out", d / "rep.txt"]) == 0
    rep = FairnessReport.from_text((d / "rep.txt").read_text())
    assert rep.estimator == "grr_debiased" and rep.n_effective == 800
    assert 0 <= rep.demographic_parity <= 1


def test_label_and_blackbox(workspace):
    d = workspace
    assert run(["label", "--dataset", d / "desk.csv", "--schema", d / "schema.json", "--model", d / "model.json",
                "--out", d / "lab.csv", "--schema-out", d / "lab.json"]) == 0
    assert next(csv.reader(open(d / "lab.csv")))[-1] == "Yhat"
    assert run(["blackbox", "--schema", d / "schema.json", "--model", d / "model.json", "--queries", 2000,
                "--out", d / "bb.txt"]) == 0
    assert FairnessReport.from_text((d / "bb.txt").read_text()).estimator == "blackbox"


def test_bias_demo_csv(workspace):
    out = workspace / "bias.csv"
    assert run(["bias-demo", "--alphas", "0,0.13,0.5", "--n", 50_000, "--out", out]) == 0
    rows = list(csv.DictReader(open(out)))
    assert [float(r["alpha"]) for r in rows] == [0, 0.13, 0.5]
    assert set(rows[0]) == {"alpha", "analytic_gap", "empirical_error", "n"}


def test_sweep_row_count(workspace):
    d = workspace
    out = d / "sweep.csv"
    assert run(["sweep", "--dataset", d / "desk.csv", "--schema", d / "schema.json", "--axis", "epsilon",
                "--grid", "0.5,1,2,5,10", "--reps", 3, "--mechanisms", "grr,synth", "--n-prime", 500,
                "--out", out]) == 0
    rows = list(csv.DictReader(open(out)))
    # 5 grid points x 3 reps x 3 metrics x 2 mechanisms
    assert len(rows) == 5 * 3 * 3 * 2
    refs = {r["reference"] for r in rows if r["metric"] == "demographic_parity"}
    assert len(refs) == 1


def test_usage_and_error_exit_codes(workspace, capsys):
    d = workspace
    assert main([]) == 1
    assert main(["sweep", "--axis", "nope"]) == 1
    assert run(["request", "--n-prime", 5, "--protected", "sex", "--epsilon", "-1", "--out", d / "x"]) == 1
    assert run(["train", "--dataset", d / "missing.csv", "--schema", d / "schema.json", "--out", d / "m"]) == 2
    bad = d / "bad.csv"
    bad.write_text("age,sex\n17-25,purple\n")
    assert run(["train", "--dataset", bad, "--schema", d / "schema.json", "--out", d / "m"]) == 2
    assert run(["privatize", "--dataset", d / "desk.csv", "--schema", d / "schema.json", "--model",
                d / "model.json", "--epsilon", 1, "--n-prime", 0, "--out", d / "r.csv"]) == 3
    (d / "orphan.csv").write_text((d / "desk.csv").read_text())
    assert run(["audit", "--release", d / "orphan.csv", "--out", d / "o.txt"]) == 2
    assert main(["--help"]) == 0


def test_env_override(workspace, monkeypatch):
    d = workspace
    monkeypatch.setenv("P2NIA_EPSILON", "7.5")
    monkeypatch.setenv("P2NIA_PROTECTED", "sex")
    assert run(["request", "--n-prime", 10, "--out", d / "env.txt"]) == 0
    text = (d / "env.txt").read_text()
    assert "epsilon=7.5" in text and "protected_attribute=sex" in text
    assert run(["request", "--n-prime", 10, "--epsilon", 2, "--out", d / "env2.txt"]) == 0
    assert "epsilon=2.0" in (d / "env2.txt").read_text()


COMMANDS = {
    "make-desk-data": ["make-desk-data", "--rows", 3000, "--seed", 5, "--out", "{out}", "--schema-out", "{out}.s"],
    "train": ["train", "--dataset", "{d}/desk.csv", "--schema", "{d}/schema.json", "--out", "{out}"],
    "label": ["label", "--dataset", "{d}/desk.csv", "--schema", "{d}/schema.json", "--model", "{d}/model.json",
              "--out", "{out}", "--schema-out", "{out}.s"],
    "privatize-grr": ["privatize", "--dataset", "{d}/desk.csv", "--schema", "{d}/schema.json", "--model",
                      "{d}/model.json", "--epsilon", 1, "--n-prime", 700, "--seed", 9, "--out", "{out}"],
    "privatize-synth": ["privatize", "--dataset", "{d}/desk.csv", "--schema", "{d}/schema.json", "--model",
                        "{d}/model.json", "--mechanism", "synth", "--epsilon", 1, "--n-prime", 700, "--seed", 9,
                        "--out", "{out}"],
    "blackbox": ["blackbox", "--schema", "{d}/schema.json", "--model", "{d}/model.json", "--seed", 2,
                 "--out", "{out}"],
    "bias-demo": ["bias-demo", "--alphas", "0,0.3", "--n", 20_000, "--seed", 2, "--out", "{out}"],
    "sweep": ["sweep", "--dataset", "{d}/desk.csv", "--schema", "{d}/schema.json", "--axis", "sample_size",
              "--grid", "250,500", "--reps", 2, "--seed", 4, "--out", "{out}"],
}


def assert_cli_deterministic(d, name):
    outputs = []
    for tag in ("first", "second"):
        out = d / f"det-{name}-{tag}"
        args = [str(a).format(d=d, out=out) for a in COMMANDS[name]]
        assert main(args) == 0
        files = sorted(p for p in d.iterdir() if p.name.startswith(f"det-{name}-{tag}"))
        outputs.append([p.read_bytes() for p in files])
    return outputs[0] == outputs[1] and len(outputs[0]) >= 1


@pytest.mark.parametrize("name", sorted(COMMANDS))
def test_cli_determinism(workspace, name):
    assert assert_cli_deterministic(workspace, name)
