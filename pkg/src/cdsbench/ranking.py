"""BM25 scoring combined across weighted facets (disjunction-max per term)."""

import math
from dataclasses import dataclass, field

import numpy as np

from cdsbench import kernels
from cdsbench.errors import ConfigError
from cdsbench.index import Facet
from cdsbench.textproc.analysis import analyze, surface_words


@dataclass(frozen=True)
class RankingParams:
    k1: float = 1.2
    b: float = 0.75
    top_k: int = 1000

    def __post_init__(self):
        if self.k1 < 0:
            raise ConfigError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError("b must lie in [0, 1]")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")


class FacetWeights(dict):
    """``Facet -> weight`` with every weight in [0, 2]; missing facets weigh 0."""

    MAX = 2.0

    def __init__(self, weights=None, **kwargs):
        super().__init__()
        items = dict(weights or {}, **kwargs)
        for facet, w in items.items():
            w = float(w)
            if not 0.0 <= w <= self.MAX or math.isnan(w):
                raise ConfigError(f"facet weight {facet}={w} outside [0, 2]")
            super().__setitem__(Facet(facet), w)

    def __setitem__(self, key, value):
        raise TypeError("FacetWeights is immutable")

    def __missing__(self, key):
        return 0.0

    def __getitem__(self, key):
        return super().__getitem__(Facet(key))

    def active(self):
        """``[(facet, weight)]`` with weight > 0, in canonical facet order."""
        return [(f, self.get(f, 0.0)) for f in Facet if self.get(f, 0.0) > 0.0]

    def __eq__(self, other):
        # An explicit 0 and a missing facet mean the same thing.
        if not isinstance(other, dict):
            return NotImplemented
        if not isinstance(other, FacetWeights):
            try:
                other = FacetWeights(other)
            except (ValueError, ConfigError):
                return False
        return all(self.get(f, 0.0) == other.get(f, 0.0) for f in Facet)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def scaled(self, factor):
        return FacetWeights({f: w * factor for f, w in self.items()})

    def __repr__(self):
        inner = ", ".join(f"{f.value}: {w:g}" for f, w in self.active())
        return f"FacetWeights({{{inner}}})"


BASELINE_WEIGHTS = FacetWeights({Facet.ALL: 1.0})


@dataclass(frozen=True)
class QueryRep:
    """Weighted query terms plus the unstemmed surface words they came from.

    ``terms`` is a tuple of ``(term, weight)``; the original terms come first,
    each with weight 1. ``trace`` records the pipeline stages applied.
    """

    terms: tuple = ()
    surface: tuple = ()
    trace: tuple = ()

    @property
    def term_set(self):
        return {t for t, _ in self.terms}

    def extend(self, new_terms, stage, new_surface=()):
        return QueryRep(
            self.terms + tuple(new_terms),
            self.surface + tuple(new_surface),
            self.trace + (stage,),
        )


def build_query(text, config=None):
    """Unexpanded query: analyzed terms of ``text``, all at weight 1."""
    terms = tuple((t, 1.0) for t in analyze(text, config))
    return QueryRep(terms, tuple(surface_words(text, config)), ("query",))


def idf(n_docs, df):
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def bm25(index, facet, term, doc_id, params=None):
    """Score of one term in one document's facet."""
    if params is None:
        params = RankingParams()
    ordinal = index.doc_ordinal(doc_id)
    fi = index.facet(facet)
    tf = fi.tf(term, ordinal)
    if tf == 0:
        return 0.0
    avglen = fi.avglen if fi.avglen > 0 else 1.0
    k1, b = params.k1, params.b
    norm = k1 * (1.0 - b + b * (fi.doc_lens_f[ordinal] / avglen))
    return idf(index.n_docs, fi.df(term)) * ((tf * (k1 + 1.0)) / (tf + norm))


def score_all(index, query, weights, params=None):
    """Dense score vector over document ordinals."""
    if params is None:
        params = RankingParams()
    active = weights.active()
    if not active:
        raise ConfigError("at least one facet weight must be > 0")
    n = index.n_docs
    scores = np.zeros(n, dtype=np.float64)
    if n == 0:
        return scores
    best = np.empty(n, dtype=np.float64)
    k1, b = float(params.k1), float(params.b)
    for term, term_weight in query.terms:
        if term_weight <= 0.0:
            continue
        best.fill(0.0)
        hit = False
        for facet, fw in active:
            fi = index.facets[facet]
            ords, tfs = fi.postings_arrays(term)
            if ords.shape[0] == 0:
                continue
            hit = True
            term_idf = idf(n, ords.shape[0])
            kernels.dismax_update(best, ords, tfs, fi.doc_lens_f, fi.avglen, term_idf, k1, b, fw)
        if hit:
            scores += term_weight * best
    return scores


def rank_scores(doc_ids, scores, top_k):
    """Sort by score descending then doc id; drop zero scores; cut at ``top_k``."""
    nz = np.flatnonzero(scores > 0.0)
    ranked = sorted(((doc_ids[i], float(scores[i])) for i in nz), key=lambda p: (-p[1], p[0]))
    return ranked[:top_k]


def search(index, query, weights=BASELINE_WEIGHTS, params=None):
    """Ranked ``[(doc_id, score), ...]`` for one query."""
    if params is None:
        params = RankingParams()
    scores = score_all(index, query, weights, params)
    return rank_scores(index.doc_ids, scores, params.top_k)
