"""Brute-force reference implementations used as test oracles.

Each oracle is written directly from the defining formula, in the most
literal way possible, and shares no code with the package under test.
"""

import math
from collections import Counter


# --- exact metrics -----------------------------------------------------------


def _gain(grade):
    return 2**grade - 1


def _dcg(grades_in_order):
    return sum(_gain(g) / math.log2(i + 2) for i, g in enumerate(grades_in_order))


def precision_at(ranking, relevant, k):
    return sum(1 for d in ranking[:k] if d in relevant) / k


def r_precision(ranking, relevant):
    r = len(relevant)
    return sum(1 for d in ranking[:r] if d in relevant) / r


def average_precision(ranking, relevant):
    total = 0.0
    for i, d in enumerate(ranking):
        if d in relevant:
            total += precision_at(ranking, relevant, i + 1)
    return total / len(relevant)


def ndcg(ranking, grades):
    """Full-depth NDCG with gain 2^g - 1 and log2(rank+1) discount."""
    run_grades = [max(grades.get(d, 0), 0) for d in ranking]
    ideal = sorted((g for g in grades.values() if g > 0), reverse=True)
    return _dcg(run_grades) / _dcg(ideal)


def exact_metrics(ranking, grades):
    relevant = {d for d, g in grades.items() if g >= 1}
    return {
        "P@10": precision_at(ranking, relevant, 10),
        "R-Prec": r_precision(ranking, relevant),
        "AP": average_precision(ranking, relevant),
        "NDCG": ndcg(ranking, grades),
    }


# --- BM25 dismax -------------------------------------------------------------


def bm25_term(tf, df, n_docs, doc_len, avg_len, k1=1.2, b=0.75):
    if tf == 0:
        return 0.0
    idf = math.log(1 + (n_docs - df + 0.5) / (df + 0.5))
    return idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * doc_len / avg_len))


def dismax_scores(docs_facet_terms, query_terms, weights, k1=1.2, b=0.75):
    """Score every document from raw per-facet term lists.

    ``docs_facet_terms`` is a list (one per doc) of ``{facet: [terms]}``;
    ``query_terms`` is ``[(term, term_weight)]``; ``weights`` is ``{facet: w}``.
    """
    n = len(docs_facet_terms)
    facets = [f for f, w in weights.items() if w > 0]
    stats = {}
    for f in facets:
        lens = [len(d[f]) for d in docs_facet_terms]
        avg = sum(lens) / n if n else 0.0
        stats[f] = (lens, avg if avg > 0 else 1.0, [Counter(d[f]) for d in docs_facet_terms])
    df = {(f, t): sum(1 for c in stats[f][2] if c[t] > 0) for f in facets for t, _ in query_terms}
    scores = [0.0] * n
    for i in range(n):
        total = 0.0
        for term, tw in query_terms:
            if tw <= 0:
                continue
            best = 0.0
            for f in facets:
                lens, avg, counters = stats[f]
                s = weights[f] * bm25_term(counters[i][term], df[f, term], n, lens[i], avg, k1, b)
                best = max(best, s)
            total += tw * best
        scores[i] = total
    return scores


def rank(doc_ids, scores, top_k=1000):
    pairs = [(d, s) for d, s in zip(doc_ids, scores) if s > 0]
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs[:top_k]


# --- cosine ------------------------------------------------------------------


def cosine(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    return dot / (nu * nv)


# --- paired t-test -----------------------------------------------------------


def paired_t(a, b):
    diffs = [x - y for x, y in zip(a, b)]
    n = len(diffs)
    mean = sum(diffs) / n
    sd = math.sqrt(sum((d - mean) ** 2 for d in diffs) / (n - 1))
    return mean / (sd / math.sqrt(n)), n - 1
