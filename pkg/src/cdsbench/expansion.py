"""Query expansion: pseudo-relevance feedback, relevance feedback, embedding
neighbours and lexicon concepts."""

from collections import Counter
from dataclasses import dataclass, replace

import numpy as np

from cdsbench import kernels
from cdsbench.errors import ConfigError
from cdsbench.index import Facet
from cdsbench.ranking import BASELINE_WEIGHTS, RankingParams, idf, search
from cdsbench.textproc.analysis import AnalyzerConfig, analyze
from cdsbench.textproc.concepts import extract_concepts

FIELD_LAMBDAS = {"note": 0.9, "desc": 0.8, "sum": 0.2}


@dataclass(frozen=True)
class ExpansionParams:
    feedback_docs: int = 30
    expansion_terms: int = 10
    expansion_weight: float = 0.8
    max_neighbors_per_word: int = 3
    query_word_cap: int = 40
    similarity_threshold: float = 0.6

    def __post_init__(self):
        if self.feedback_docs < 1:
            raise ConfigError("feedback_docs must be >= 1")
        if self.expansion_terms < 0:
            raise ConfigError("expansion_terms must be >= 0")
        if not 0.0 <= self.expansion_weight <= 1.0:
            raise ConfigError("expansion_weight must lie in [0, 1]")
        if self.max_neighbors_per_word < 1 or self.query_word_cap < 1:
            raise ConfigError("neighbour and word caps must be positive")

    @classmethod
    def for_field(cls, field, **overrides):
        """Defaults with the expansion weight tuned for a topic field."""
        return cls(expansion_weight=FIELD_LAMBDAS[field], **overrides)


def rank_feedback_terms(term_counts, n, exclude, index):
    """Top ``n`` terms by summed tf times ``all``-facet idf, normalized to max 1.

    ``term_counts`` is one ``{term: tf}`` mapping per feedback document.
    """
    if n <= 0:
        return []
    totals = Counter()
    for counts in term_counts:
        for term, tf in counts.items():
            if term not in exclude:
                totals[term] += tf
    if not totals:
        return []
    fi = index.facet(Facet.ALL)
    scored = [(term, tf * idf(index.n_docs, fi.df(term))) for term, tf in totals.items()]
    scored.sort(key=lambda p: (-p[1], p[0]))
    top = scored[:n]
    best = top[0][1]
    if best <= 0.0:
        return []
    return [(term, score / best) for term, score in top]


def select_feedback_terms(docs, n, exclude, index):
    """Expansion candidates drawn from the analyzed text of ``docs``."""
    counts = []
    for doc in docs:
        terms = []
        for text in doc.text_fields():
            terms.extend(analyze(text, index.config))
        counts.append(Counter(terms))
    return rank_feedback_terms(counts, n, set(exclude), index)


def _append_terms(query, selected, lam, stage):
    return query.extend(((term, lam * score) for term, score in selected), stage)


def _feedback_expand(query, index, doc_ids, params, stage):
    counts = [index.doc_terms(index.doc_ordinal(d)) for d in doc_ids]
    selected = rank_feedback_terms(counts, params.expansion_terms, query.term_set, index)
    return _append_terms(query, selected, params.expansion_weight, stage)


def expand_prf(query, index, weights=BASELINE_WEIGHTS, params=None, ranking=None):
    """Append terms from the top ``feedback_docs`` documents of an initial search."""
    if params is None:
        params = ExpansionParams()
    if ranking is None:
        ranking = RankingParams()
    initial = search(index, query, weights, replace(ranking, top_k=params.feedback_docs))
    return _feedback_expand(query, index, [d for d, _ in initial], params, "prf")


def expand_rf(query, index, weights, judgments, params=None, ranking=None):
    """Like PRF but restricted to judged-relevant documents (grade >= 1) in the top 30.

    ``judgments`` maps doc ids to grades for this topic. Without any relevant
    document in the feedback window the query is returned unchanged.
    """
    if params is None:
        params = ExpansionParams()
    if ranking is None:
        ranking = RankingParams()
    initial = search(index, query, weights, replace(ranking, top_k=params.feedback_docs))
    relevant = [d for d, _ in initial if judgments.get(d, 0) >= 1]
    if not relevant:
        return query
    return _feedback_expand(query, index, relevant, params, "rf")


def nearest_neighbors(table, word, k, threshold):
    """Up to ``k`` other words with cosine >= ``threshold``, best first, ties by word."""
    row = table.row(word)
    if row is None:
        return []
    unit = table.unit_matrix
    if not np.any(unit[row]):
        return []
    sims = kernels.cosine_scores(unit, np.ascontiguousarray(unit[row]))
    candidates = np.flatnonzero(sims >= threshold)
    ranked = sorted(
        ((table.words[i], float(sims[i])) for i in candidates if i != row),
        key=lambda p: (-p[1], p[0]),
    )
    return ranked[:k]


def expand_embeddings(query, table, params=None, config=None):
    """Append embedding neighbours of each original surface word.

    Expansion stops once the query holds ``query_word_cap`` distinct surface
    words. New words are analyzed like query text and weighted by lambda.
    """
    if params is None:
        params = ExpansionParams()
    if config is None:
        config = AnalyzerConfig()
    words = list(dict.fromkeys(query.surface))
    present = set(words)
    added = []
    for word in words:
        if len(present) >= params.query_word_cap:
            break
        for neighbor, _ in nearest_neighbors(table, word, params.max_neighbors_per_word, params.similarity_threshold):
            if len(present) >= params.query_word_cap:
                break
            if neighbor in present:
                continue
            present.add(neighbor)
            added.append(neighbor)
    lam = params.expansion_weight
    terms = [(t, lam) for w in added for t in analyze(w, config)]
    return query.extend(terms, "embeddings", new_surface=added)


def expand_concepts(query, raw_topic_text, lexicon, lam, config=None):
    """Append preferred-name terms and concept ids of concepts found in the topic."""
    found = extract_concepts(raw_topic_text, lexicon)
    if not found:
        return query
    terms = []
    seen = set()
    for concept_id, preferred in found:
        for term in analyze(preferred, config):
            if term not in seen:
                seen.add(term)
                terms.append((term, lam))
    for concept_id, _ in found:
        terms.append((concept_id, lam))
    return query.extend(terms, "concepts")
