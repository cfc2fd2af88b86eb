"""Exact and inferred retrieval metrics.

Exact metrics treat every unjudged document as nonrelevant. Inferred metrics
(infAP, infNDCG) weight each judged document by the inverse sampling rate of
its stratum; with every stratum fully judged they reduce to AP and NDCG.
"""

import math
from dataclasses import dataclass

from cdsbench.eval.qrels import check_sampling

EPSILON = 1e-5

EXACT_METRICS = ("P@10", "R-Prec", "AP", "NDCG")
INFERRED_METRICS = ("infAP", "infNDCG")
ALL_METRICS = ("infNDCG", "infAP", "R-Prec", "P@10", "AP", "NDCG")
# Column order of comparison reports.
REPORT_METRICS = ("infNDCG", "infAP", "R-Prec", "P@10")


@dataclass(frozen=True)
class MetricConfig:
    p_cutoff: int = 10
    alphas: tuple = (0.05, 0.02)

    @staticmethod
    def gain(grade):
        return 2.0**grade - 1.0 if grade > 0 else 0.0

    @staticmethod
    def discount(rank):
        return math.log2(rank + 1.0)


DEFAULT_CONFIG = MetricConfig()


def _ideal_dcg(grade_counts, config):
    """DCG of the descending-grade ordering; counts may be fractional.

    Rank slots hold one unit of document mass each; a fractional count fills a
    slot partially and the remainder spills into the next.
    """
    total = 0.0
    rank = 1
    room = 1.0
    for grade in sorted(grade_counts, reverse=True):
        g = config.gain(grade)
        remaining = grade_counts[grade]
        while remaining > 1e-12:
            take = min(room, remaining)
            total += take * g / config.discount(rank)
            remaining -= take
            room -= take
            if room <= 1e-12:
                rank += 1
                room = 1.0
    return total


def exact_topic_metrics(ranking, grades, config=DEFAULT_CONFIG):
    """``{P@10, R-Prec, AP, NDCG}`` or ``None`` when the topic has no relevant doc.

    ``ranking`` is the ordered list of retrieved doc ids; ``grades`` maps judged
    doc ids to grades.
    """
    relevant = {d for d, g in grades.items() if g >= 1}
    n_rel = len(relevant)
    if n_rel == 0:
        return None
    hits = 0
    ap_sum = 0.0
    dcg = 0.0
    hits_at_r = 0
    hits_at_k = 0
    for rank, doc in enumerate(ranking, 1):
        grade = grades.get(doc, 0)
        if grade >= 1:
            hits += 1
            ap_sum += hits / rank
            dcg += config.gain(grade) / config.discount(rank)
        if rank == n_rel:
            hits_at_r = hits
        if rank == config.p_cutoff:
            hits_at_k = hits
    if len(ranking) < n_rel:
        hits_at_r = hits
    if len(ranking) < config.p_cutoff:
        hits_at_k = hits
    counts = {}
    for g in grades.values():
        if g >= 1:
            counts[g] = counts.get(g, 0) + 1
    return {
        "P@10": hits_at_k / config.p_cutoff,
        "R-Prec": hits_at_r / n_rel,
        "AP": ap_sum / n_rel,
        "NDCG": dcg / _ideal_dcg(counts, config),
    }


def _ratio(rel, judged, pooled):
    if pooled == 0:
        return 0.0
    if judged == pooled:
        # Complete sample above this rank: the proportion is known exactly.
        return rel / judged
    return (rel + EPSILON) / (judged + 2.0 * EPSILON)


def inferred_topic_metrics(ranking, strata, config=DEFAULT_CONFIG):
    """``{infAP, infNDCG}`` for one topic, or ``None`` when nothing relevant was judged."""
    where = {}
    for s_index, s in enumerate(strata):
        for doc, grade in s.judged.items():
            where[doc] = (s_index, grade)
        for doc in s.unjudged:
            where[doc] = (s_index, None)

    weights = [s.pool_size / len(s.judged) for s in strata]
    r_hat = sum(w * s.relevant_count() for w, s in zip(weights, strata))
    if r_hat <= 0.0:
        return None

    n_strata = len(strata)
    pooled_above = [0] * n_strata
    judged_above = [0] * n_strata
    rel_above = [0] * n_strata
    ap_sum = 0.0
    dcg = 0.0
    for rank, doc in enumerate(ranking, 1):
        hit = where.get(doc)
        if hit is None:
            continue  # unpooled: nonrelevant, and contributes nothing above later ranks
        s_index, grade = hit
        if grade is not None and grade >= 1:
            if rank == 1:
                expected_prec = 1.0
            else:
                est_rel = 0.0
                for j in range(n_strata):
                    est_rel += pooled_above[j] * _ratio(rel_above[j], judged_above[j], pooled_above[j])
                expected_prec = 1.0 / rank + est_rel / rank
            ap_sum += weights[s_index] * expected_prec
            dcg += weights[s_index] * config.gain(grade) / config.discount(rank)
        pooled_above[s_index] += 1
        if grade is not None:
            judged_above[s_index] += 1
            if grade >= 1:
                rel_above[s_index] += 1

    est_counts = {}
    for w, s in zip(weights, strata):
        for grade in s.judged.values():
            if grade >= 1:
                est_counts[grade] = est_counts.get(grade, 0.0) + w
    return {"infAP": ap_sum / r_hat, "infNDCG": dcg / _ideal_dcg(est_counts, config)}


def exact_metrics(run, qrels, config=DEFAULT_CONFIG):
    """Per-topic exact metrics for every topic with a judged-relevant document."""
    out = {}
    for topic in qrels.evaluated_topics():
        out[topic] = exact_topic_metrics(run.doc_ids(topic), qrels.grades(topic), config)
    return out


def inferred_metrics(run, qrels, config=DEFAULT_CONFIG):
    out = {}
    for topic in qrels.evaluated_topics():
        check_sampling(qrels, topic)
        out[topic] = inferred_topic_metrics(run.doc_ids(topic), qrels.strata(topic), config)
    return out


def evaluate_run(run, qrels, config=DEFAULT_CONFIG):
    """All six metrics per evaluated topic, topics ascending."""
    exact = exact_metrics(run, qrels, config)
    inferred = inferred_metrics(run, qrels, config)
    return {t: {**inferred[t], **exact[t]} for t in sorted(exact)}


def mean_metrics(per_topic):
    """Mean of each metric, summed in ascending topic order."""
    topics = sorted(per_topic)
    if not topics:
        return {}
    names = per_topic[topics[0]].keys()
    return {m: sum(per_topic[t][m] for t in topics) / len(topics) for m in names}
