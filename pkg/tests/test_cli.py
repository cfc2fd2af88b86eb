import subprocess
import sys

import pytest

from cdsbench.cli import EXIT_EVALUATION, EXIT_INVALID, EXIT_OK, main
from cdsbench.eval import parse_run


def _qrels(root):
    return ["--qrels", str(root / "qrels.txt"), "--strata", str(root / "strata.txt")]


def test_index_run_evaluate(minicorpus, capsys):
    root = minicorpus
    assert main(["index", str(root / "baseline.cfg")]) == EXIT_OK
    assert (root / "minicorpus.idx").exists()
    out = root / "base.run"
    assert main(["run", str(root / "baseline.cfg"), "-o", str(out)]) == EXIT_OK
    run = parse_run(out.read_text())
    assert run.run_tag == "baseline" and sorted(run.topics) == [1, 2, 3, 4, 5]
    capsys.readouterr()
    assert main(["evaluate", str(out), *_qrels(root), "--per-topic"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[-1] == "num_q\tall\t5"
    assert any(line.startswith("infNDCG\tall\t") for line in lines)
    assert any(line.startswith("P@10\t3\t") for line in lines)


def test_compare_and_delta(minicorpus, capsys):
    root = minicorpus
    base, other = root / "base.run", root / "pipe.run"
    assert main(["run", str(root / "baseline.cfg"), "-o", str(base)]) == EXIT_OK
    assert main(["run", str(root / "pipeline.cfg"), "-o", str(other)]) == EXIT_OK
    csv = root / "cmp.csv"
    assert main(["compare", str(base), str(other), *_qrels(root), "--field", "demo_neg_prf=Sum",
                 "--csv", str(csv)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "demo_neg_prf" in text and "infNDCG" in text
    assert csv.read_text().startswith("method,field,metric,mean,mark,p_value\n")
    out = root / "delta.csv"
    assert main(["delta", str(other), str(base), *_qrels(root), "--metric", "AP", "-o", str(out)]) == EXIT_OK
    rows = out.read_text().splitlines()
    assert rows[0] == "topic_id,delta" and len(rows) == 6


def test_optimize_and_train(minicorpus):
    root = minicorpus
    weights, trace = root / "w.txt", root / "trace.csv"
    assert main(["optimize", str(root / "baseline.cfg"), "--weights-out", str(weights),
                 "--trace-out", str(trace), "--epochs", "2", "--step", "0.5"]) == EXIT_OK
    assert weights.read_text().strip()
    assert trace.read_text().startswith("epoch,step,")
    model = root / "ltr_model.txt"
    assert main(["train-ltr", str(root / "ltr.cfg"), "-o", str(model)]) == EXIT_OK
    assert main(["run", str(root / "ltr.cfg"), "-o", str(root / "ltr.run")]) == EXIT_OK


def test_exit_code_invalid(minicorpus, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("corpus = docs.txt\n[stage:prf]\n[stage:negation]\n")
    assert main(["run", str(bad), "-o", str(tmp_path / "x.run")]) == EXIT_INVALID
    broken = tmp_path / "broken.run"
    broken.write_text("1 Q0 A 1 1.0\n")
    assert main(["evaluate", str(broken), *_qrels(minicorpus)]) == EXIT_INVALID
    assert main(["run", str(tmp_path / "missing.cfg"), "-o", str(tmp_path / "x.run")]) == EXIT_INVALID
    # ltr stage without a trained model file
    assert main(["run", str(minicorpus / "ltr.cfg"), "-o", str(tmp_path / "x.run")]) == EXIT_INVALID


def test_exit_code_evaluation(minicorpus, tmp_path):
    run = tmp_path / "r.run"
    run.write_text("1 Q0 PMC1000 1 1.0 t\n")
    qrels = tmp_path / "q.txt"
    qrels.write_text("1 0 PMC1000 0\n")
    assert main(["evaluate", str(run), "--qrels", str(qrels)]) == EXIT_EVALUATION
    base = tmp_path / "b.run"
    base.write_text("1 Q0 PMC1000 1 1.0 b\n2 Q0 PMC1001 1 1.0 b\n")
    assert main(["compare", str(base), str(run), *_qrels(minicorpus)]) == EXIT_EVALUATION


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_module_entry_point(minicorpus):
    out = minicorpus / "m.run"
    proc = subprocess.run([sys.executable, "-m", "cdsbench", "run", str(minicorpus / "baseline.cfg"),
                           "-o", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().splitlines()[0].startswith("1 Q0 ")
