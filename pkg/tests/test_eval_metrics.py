import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from cdsbench.errors import EvaluationError
from cdsbench.eval import (
    ALL_METRICS,
    Stratum,
    evaluate_run,
    exact_topic_metrics,
    inferred_topic_metrics,
    mean_metrics,
    parse_qrels,
)
from cdsbench.eval.metrics import inferred_metrics

from evalfixtures import make_fixture, subsample, synthetic_topic


class TestExact:
    def test_perfect_prefix(self):
        grades = {"a": 1, "b": 1, "c": 1, "x": 0}
        ranking = ["a", "b", "c"] + [f"n{i}" for i in range(7)]
        m = exact_topic_metrics(ranking, grades)
        assert m == {"P@10": 0.3, "R-Prec": 1.0, "AP": 1.0, "NDCG": 1.0}

    def test_graded_ndcg(self):
        grades = {"a": 1, "b": 0, "c": 2}
        m = exact_topic_metrics(["a", "b", "c"], grades)
        dcg = 1 / math.log2(2) + 3 / math.log2(4)
        ideal = 3 / math.log2(2) + 1 / math.log2(3)
        assert dcg == pytest.approx(2.5) and ideal == pytest.approx(3.63093, abs=1e-5)
        assert m["NDCG"] == pytest.approx(dcg / ideal, abs=1e-12)
        assert m["NDCG"] == pytest.approx(0.68852, abs=1e-5)

    def test_empty_run(self):
        m = exact_topic_metrics([], {"a": 1})
        assert m == {"P@10": 0.0, "R-Prec": 0.0, "AP": 0.0, "NDCG": 0.0}

    def test_no_relevant(self):
        assert exact_topic_metrics(["a"], {"a": 0}) is None

    @given(st.integers(0, 100_000))
    def test_matches_direct_formulas(self, seed):
        run, qrels, grades = make_fixture(seed, max_docs=80, max_topics=5)
        for topic, g in grades.items():
            got = exact_topic_metrics(run.doc_ids(topic), g)
            expected = oracles.exact_metrics(run.doc_ids(topic), g)
            for name in expected:
                assert abs(got[name] - expected[name]) <= 1e-9
                assert 0.0 <= got[name] <= 1.0


class TestInferred:
    def test_estimated_relevant_count(self):
        # pool 4, judged 2, one relevant: R-hat = 4/2 * 1
        stratum = Stratum("1", 4, {"a": 1, "b": 0}, {"c", "d"})
        m = inferred_topic_metrics(["a"], (stratum,))
        assert m["infAP"] == pytest.approx(1.0 * 2 / 2.0)

    def test_hand_computed(self):
        # One stratum, pool 4: a (rel), b (nonrel) judged; c unjudged; e unpooled.
        stratum = Stratum("1", 4, {"a": 1, "b": 0}, {"c", "d"})
        ranking = ["b", "e", "c", "a"]
        # rank 4: above are b (judged nonrel), e (unpooled), c (pooled, unjudged)
        # pooled above = 2, judged above = 1, rel above = 0
        eps = 1e-5
        prec = 1 / 4 + (2 * (0 + eps) / (1 + 2 * eps)) / 4
        r_hat = 4 / 2 * 1
        m = inferred_topic_metrics(ranking, (stratum,))
        assert m["infAP"] == pytest.approx(2.0 * prec / r_hat, abs=1e-12)

    def test_unjudged_stratum_is_an_error(self):
        qrels = parse_qrels("1 1 a 1\n1 2 b -1\n", "1 1 1\n1 2 3\n")
        from cdsbench.eval import RankedRun

        with pytest.raises(EvaluationError):
            inferred_metrics(RankedRun("r", {1: [("a", 1.0)]}), qrels)

    @given(st.integers(0, 100_000))
    def test_full_judgment_reduces_to_exact(self, seed):
        run, qrels, _ = make_fixture(seed, max_docs=80, max_topics=5)
        for topic, m in evaluate_run(run, qrels).items():
            assert abs(m["infAP"] - m["AP"]) <= 1e-9
            assert abs(m["infNDCG"] - m["NDCG"]) <= 1e-9

    def test_unbiased_at_half_rate(self):
        run, qrels, grades = synthetic_topic()
        truth = oracles.average_precision(run.doc_ids(1), {d for d, g in grades.items() if g > 0})
        rng = random.Random(0)
        values = []
        for _ in range(400):
            sampled = subsample(qrels, 0.5, rng)
            values.append(inferred_topic_metrics(run.doc_ids(1), sampled.strata(1))["infAP"])
        assert abs(sum(values) / len(values) - truth) < 0.02


def test_evaluate_run_shape():
    run, qrels, _ = make_fixture(3)
    per_topic = evaluate_run(run, qrels)
    assert list(per_topic) == sorted(per_topic)
    for m in per_topic.values():
        assert tuple(m) == ("infAP", "infNDCG", "P@10", "R-Prec", "AP", "NDCG")
    means = mean_metrics(per_topic)
    assert set(means) == set(ALL_METRICS)
    assert mean_metrics({}) == {}
