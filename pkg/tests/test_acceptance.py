"""Acceptance criteria, one test each, each printing a single PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v -s`` to see the
summary lines next to the test names (they are also printed without ``-s``).
"""

import random
import shutil
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from scipy import stats as scipy_stats

import oracles
from cdsbench.config import load_config
from cdsbench.eval import compare_runs, evaluate_run, exact_topic_metrics, paired_t_test, read_qrels, read_run
from cdsbench.eval.metrics import inferred_topic_metrics
from cdsbench.eval.report import DAGGER, DOUBLE_DAGGER
from cdsbench.index import FACETS, Facet, build_index
from cdsbench.ltr import FEATURE_NAMES, FeatureVector, LinearRankModel, pair_accuracy, rerank, train_ranker
from cdsbench.optimizer import WeightGrid, exhaustive_search, hill_climb
from cdsbench.ranking import FacetWeights, QueryRep, search
from cdsbench.textproc.analysis import analyze
from cdsbench.textproc.demographics import normalize_demographics
from cdsbench.textproc.negation import remove_negated

from conftest import MINICORPUS, WORDS, random_docs
from evalfixtures import make_fixture, subsample, synthetic_topic


@pytest.fixture
def criterion(capsys):
    """Prints ``criterion N: PASS|FAIL (detail)`` around the test body."""

    @contextmanager
    def check(number, title):
        info = {}
        start = time.perf_counter()
        try:
            yield info
        except BaseException as exc:
            _emit(capsys, f"criterion {number:2d} FAIL  {title}: {type(exc).__name__}: {exc}".splitlines()[0])
            raise
        elapsed = time.perf_counter() - start
        detail = ", ".join(f"{k}={v}" for k, v in info.items())
        _emit(capsys, f"criterion {number:2d} PASS  {title} ({elapsed:.2f}s{', ' + detail if detail else ''})")

    return check


def _emit(capsys, line):
    with capsys.disabled():
        print("\n" + line)


FIXTURE_SEEDS = range(50)


def test_1_metric_oracle_equivalence(criterion):
    with criterion(1, "metrics match brute-force oracle to 1e-9 on 50 fixtures") as info:
        start = time.perf_counter()
        worst = 0.0
        checked = 0
        for seed in FIXTURE_SEEDS:
            run, _, grades = make_fixture(seed, max_docs=200, max_topics=20)
            for topic, g in grades.items():
                got = exact_topic_metrics(run.doc_ids(topic), g)
                expected = oracles.exact_metrics(run.doc_ids(topic), g)
                for name in ("P@10", "R-Prec", "AP", "NDCG"):
                    worst = max(worst, abs(got[name] - expected[name]))
                checked += 1
        elapsed = time.perf_counter() - start
        info.update(topics=checked, max_err=f"{worst:.1e}")
        assert worst <= 1e-9
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_2_inferred_reduction(criterion):
    with criterion(2, "infAP = AP and infNDCG = NDCG at full judgment") as info:
        worst = 0.0
        for seed in FIXTURE_SEEDS:
            run, qrels, _ = make_fixture(seed, max_docs=200, max_topics=20)
            for m in evaluate_run(run, qrels).values():
                worst = max(worst, abs(m["infAP"] - m["AP"]), abs(m["infNDCG"] - m["NDCG"]))
        info.update(max_err=f"{worst:.1e}")
        assert worst <= 1e-9


def test_3_inferred_unbiased(criterion):
    with criterion(3, "mean infAP at rate 0.5 over 2000 seeds within 0.02 of AP") as info:
        start = time.perf_counter()
        run, qrels, grades = synthetic_topic()
        ranking = run.doc_ids(1)
        truth = oracles.average_precision(ranking, {d for d, g in grades.items() if g > 0})
        values = []
        for seed in range(2000):
            sampled = subsample(qrels, 0.5, random.Random(seed))
            values.append(inferred_topic_metrics(ranking, sampled.strata(1))["infAP"])
        bias = float(np.mean(values)) - truth
        elapsed = time.perf_counter() - start
        info.update(true_AP=f"{truth:.4f}", bias=f"{bias:+.4f}")
        assert abs(bias) <= 0.02
        assert elapsed < 30.0, f"took {elapsed:.2f}s"


def _facet_terms(docs, config):
    out = []
    for d in docs:
        per = {
            Facet.TITLE: analyze(d.title, config),
            Facet.ABSTRACT: analyze(d.abstract_text, config),
            Facet.BODY: analyze(d.body, config),
            Facet.MESH: analyze(" ".join(d.mesh_keywords), config),
            Facet.CONCEPTS: list(d.concept_ids),
        }
        per[Facet.ALL] = per[Facet.TITLE] + per[Facet.ABSTRACT] + per[Facet.BODY]
        out.append(per)
    return out


def test_4_search_oracle_equivalence(criterion):
    with criterion(4, "search equals exhaustive scoring, 20 queries x 5 weightings") as info:
        rng = random.Random(44)
        docs = random_docs(rng, 1000)
        index = build_index(docs)
        per_doc = _facet_terms(docs, index.config)
        doc_ids = [d.doc_id for d in docs]
        vocab = [analyze(w)[0] for w in WORDS] + ["C1", "C4", "C7"]
        settings = [{Facet.ALL: 1.0}]
        while len(settings) < 5:
            w = {f: rng.choice([0.0, 0.1, 0.5, 1.0, 1.5, 2.0]) for f in FACETS}
            if any(w.values()):
                settings.append(w)
        worst = 0.0
        for _ in range(20):
            terms = tuple((rng.choice(vocab), rng.choice([1.0, 0.5, 0.2])) for _ in range(rng.randint(1, 6)))
            for weights in settings:
                got = search(index, QueryRep(terms), FacetWeights(weights))
                expected = oracles.rank(doc_ids, oracles.dismax_scores(per_doc, terms, weights))
                assert [d for d, _ in got] == [d for d, _ in expected]
                for (_, a), (_, b) in zip(got, expected):
                    worst = max(worst, abs(a - b))
        info.update(docs=len(docs), max_err=f"{worst:.1e}")
        assert worst <= 1e-9


def _cli(*args, cwd):
    proc = subprocess.run([sys.executable, "-m", "cdsbench", *args], cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_5_expansion_neutrality(criterion, tmp_path):
    with criterion(5, "PRF with weight 0 gives a byte-identical run file") as info:
        root = tmp_path / "mc"
        shutil.copytree(MINICORPUS, root)
        _cli("run", "baseline.cfg", "-o", "base.run", cwd=root)
        _cli("run", "prf_zero.cfg", "-o", "zero.run", cwd=root)
        base, zero = (root / "base.run").read_bytes(), (root / "zero.run").read_bytes()
        assert load_config(root / "prf_zero.cfg").stage("prf").get("weight") == 0.0
        info.update(bytes=len(base))
        assert base == zero


def test_6_hill_climb(criterion):
    with criterion(6, "hill climb finds the exhaustive optimum, monotone and deterministic") as info:
        grid = WeightGrid(step=0.5)
        target = {Facet.TITLE: 1.5, Facet.ABSTRACT: 0.5, Facet.BODY: 1.0, Facet.MESH: 0.0, Facet.CONCEPTS: 2.0}

        def objective(w):
            return -sum((w.get(f, 0.0) - t) ** 2 for f, t in target.items())

        best, value = exhaustive_search(objective, grid)
        for seed in range(5):
            run = hill_climb(objective, grid, seed=seed, epochs=3)
            assert run.best_weights == best and run.best_score == value
            segment = []
            for e in run.trace:
                if e.restart:
                    segment = []
                if e.accepted:
                    assert not segment or e.objective > segment[-1]
                    segment.append(e.objective)
            assert run.trace == hill_climb(objective, grid, seed=seed, epochs=3).trace
        info.update(optimum=repr(best))


def test_7_significance_numbers(criterion):
    with criterion(7, "paired t-test on diffs 1..5") as info:
        r = paired_t_test([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
        ref = scipy_stats.ttest_rel([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
        info.update(t=f"{r.t:.4f}", p=f"{r.p_two_tailed:.4f}")
        assert abs(r.t - 4.2426) <= 1e-3
        assert abs(r.p_two_tailed - 0.0132) <= 1e-3
        assert r.sig95 and r.sig98
        assert abs(r.t - ref.statistic) <= 1e-9 and abs(r.p_two_tailed - ref.pvalue) <= 1e-9


def _suite(name):
    from importlib import resources

    text = resources.files("cdsbench.data").joinpath(name).read_text("utf-8")
    return [tuple(line.split("\t")) for line in text.splitlines() if line and not line.startswith("#")]


def test_8_text_regression(criterion):
    with criterion(8, "negation and demographic regression suites") as info:
        negation = _suite("negation_suite.tsv")
        demographic = _suite("demographic_suite.tsv")
        assert len(negation) == 20 and len(demographic) == 10
        neg_bad = [(s, remove_negated(s), e) for s, e in negation if remove_negated(s) != e]
        demo_bad = [(s, normalize_demographics(s), e) for s, e in demographic if normalize_demographics(s) != e]
        info.update(negation=f"{20 - len(neg_bad)}/20", demographics=f"{10 - len(demo_bad)}/10")
        assert not neg_bad, neg_bad
        assert not demo_bad, demo_bad
        assert normalize_demographics("86 y/o m") == "elderly male"


def _end_to_end(root):
    q = ["--qrels", "qrels.txt", "--strata", "strata.txt"]
    _cli("index", "pipeline.cfg", cwd=root)
    _cli("run", "baseline.cfg", "-o", "baseline.run", cwd=root)
    _cli("run", "pipeline.cfg", "-o", "pipeline.run", cwd=root)
    _cli("evaluate", "pipeline.run", *q, "-o", "eval.txt", cwd=root)
    _cli("compare", "baseline.run", "pipeline.run", *q, "--text", "report.txt", "--csv", "report.csv", cwd=root)
    _cli("delta", "pipeline.run", "baseline.run", *q, "-o", "delta.csv", cwd=root)
    names = ("baseline.run", "pipeline.run", "eval.txt", "report.txt", "report.csv", "delta.csv")
    return {n: (root / n).read_bytes() for n in names}


def test_9_end_to_end(criterion, tmp_path):
    with criterion(9, "index, run, evaluate, compare, delta on the mini-corpus") as info:
        outputs = []
        times = []
        for attempt in range(2):
            root = tmp_path / f"mc{attempt}"
            shutil.copytree(MINICORPUS, root)
            start = time.perf_counter()
            outputs.append(_end_to_end(root))
            times.append(time.perf_counter() - start)
        info.update(seconds="/".join(f"{t:.2f}" for t in times))
        assert max(times) < 10.0
        assert outputs[0] == outputs[1]

        report = outputs[0]["report.txt"].decode("utf-8")
        assert f"{DAGGER} p < 0.05" in report and f"{DOUBLE_DAGGER} p < 0.02" in report
        # the marks in the report are exactly those the t-test calls for
        qrels = read_qrels(root / "qrels.txt", root / "strata.txt")
        cmp = compare_runs([read_run(root / "pipeline.run")], read_run(root / "baseline.run"), qrels)
        assert cmp.to_text().encode("utf-8") == outputs[0]["report.txt"]
        delta = outputs[0]["delta.csv"].decode("utf-8").splitlines()
        assert delta[0] == "topic_id,delta" and len(delta) == 6


def test_10_ltr_sanity(criterion):
    with criterion(10, "separable pairs reach accuracy 1.0; bm25-only rerank keeps order") as info:
        rng = random.Random(10)
        pairs = []
        for _ in range(50):
            base, prf, dist = rng.random(), rng.random(), rng.random()
            hi = FeatureVector(base + 0.1 + rng.random(), prf, dist, (0.0, 0.0, 1.0), (0.0, 0.0, 1.0))
            lo = FeatureVector(base, prf, dist, (0.0, 0.0, 1.0), (0.0, 0.0, 1.0))
            pairs.append((hi.to_array(), lo.to_array()))
        model = train_ranker(pairs, seed=0)
        diffs = np.array([p - q for p, q in pairs])
        accuracy = pair_accuracy(model.weights, diffs)

        w = np.zeros(len(FEATURE_NAMES))
        w[FEATURE_NAMES.index("bm25")] = 1.0
        ranking = [(f"D{i:03d}", float(40 - i)) for i in range(40)]
        feats = {d: FeatureVector(s / 40, rng.random(), rng.random(), (1.0, 0.0, 0.0), (1.0, 0.0, 0.0))
                 for d, s in ranking}
        reranked = rerank(LinearRankModel(w), ranking, feats, depth=30)
        info.update(accuracy=accuracy, bm25_weight=f"{model.weights[0]:.3f}")
        assert accuracy == 1.0
        assert [d for d, _ in reranked] == [d for d, _ in ranking]
