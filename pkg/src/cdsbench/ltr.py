"""Pairwise learning to rank with a linear scoring model.

Features per (topic, document): normalized baseline and PRF scores, the
embedding cosine distance between topic text and document title, and one-hot
topic type and topic field indicators. The model is trained with the mean
pairwise logistic loss by full-batch gradient descent.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from cdsbench import kernels
from cdsbench.errors import ConfigError, FormatError
from cdsbench.fileutil import atomic_write_text
from cdsbench.textproc.analysis import AnalyzerConfig, surface_words

TOPIC_TYPES = ("treatment", "diagnosis", "test")
TOPIC_FIELDS = ("note", "desc", "sum")
FEATURE_NAMES = (
    "bm25",
    "prf",
    "title_dist",
    *(f"type_{t}" for t in TOPIC_TYPES),
    *(f"field_{f}" for f in TOPIC_FIELDS),
)
MODEL_HEADER = "# cdsbench linear rank model v1"

RERANK_DEPTH = 100
PAIR_DEPTH = 100
PAIR_CAP = 1000


@dataclass(frozen=True)
class FeatureVector:
    f_bm25: float
    f_prf: float
    f_title_dist: float
    f_topic_type: tuple
    f_field: tuple

    def to_array(self):
        return np.array(
            [self.f_bm25, self.f_prf, self.f_title_dist, *self.f_topic_type, *self.f_field], dtype=np.float64
        )


def _one_hot(value, options):
    return tuple(1.0 if value == o else 0.0 for o in options)


def _minmax(ranking):
    if not ranking:
        return {}
    scores = [s for _, s in ranking]
    lo, hi = min(scores), max(scores)
    if hi == lo:
        return {d: 1.0 for d, _ in ranking}
    return {d: (s - lo) / (hi - lo) for d, s in ranking}


def mean_vector(words, table):
    rows = [table.row(w) for w in words]
    rows = [r for r in rows if r is not None]
    if not rows:
        return None
    return table.matrix[rows].mean(axis=0)


def cosine_distance(u, v):
    """``1 - cos(u, v)``; 1 when either side is missing or zero."""
    if u is None or v is None:
        return 1.0
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 1.0
    cos = float(np.dot(u, v) / (nu * nv))
    return 1.0 - max(-1.0, min(1.0, cos))


class FeatureExtractor:
    """Caches per-topic normalizations and the topic mean vector."""

    def __init__(self, topic, field, baseline_ranking, prf_ranking, table, config=None):
        self.topic = topic
        self.field = field
        self.table = table
        self.config = config or AnalyzerConfig()
        self.base = _minmax(baseline_ranking)
        self.prf = _minmax(prf_ranking)
        self.topic_vec = mean_vector(surface_words(topic.field_text(field), self.config), table) if table else None
        self.type_hot = _one_hot(topic.topic_type, TOPIC_TYPES)
        self.field_hot = _one_hot(field, TOPIC_FIELDS)

    def __call__(self, doc):
        if self.table is None:
            dist = 1.0
        else:
            dist = cosine_distance(self.topic_vec, mean_vector(surface_words(doc.title, self.config), self.table))
        return FeatureVector(
            self.base.get(doc.doc_id, 0.0),
            self.prf.get(doc.doc_id, 0.0),
            dist,
            self.type_hot,
            self.field_hot,
        )


def extract_features(topic, field, doc, baseline_ranking, prf_ranking, table, config=None):
    """Feature vector for one document; ``*_ranking`` are ``[(doc_id, score)]`` for the topic."""
    return FeatureExtractor(topic, field, baseline_ranking, prf_ranking, table, config)(doc)


def build_training_set(topics, qrels, baseline_run, prf_run, table, documents, field, seed=0,
                       depth=PAIR_DEPTH, cap=PAIR_CAP, config=None):
    """Preference pairs ``(x_relevant, x_nonrelevant)`` from judged top-``depth`` docs.

    At most ``cap`` pairs per topic, drawn without replacement by a seeded
    sampler when the full cross product is larger.
    """
    rng = np.random.default_rng(seed)
    pairs = []
    for topic in sorted(topics, key=lambda t: t.topic_id):
        grades = qrels.grades(topic.topic_id)
        top = baseline_run.ranking(topic.topic_id)[:depth]
        judged = [d for d, _ in top if d in grades]
        pos = [d for d in judged if grades[d] >= 1]
        neg = [d for d in judged if grades[d] == 0]
        if not pos or not neg:
            continue
        extractor = FeatureExtractor(topic, field, baseline_run.ranking(topic.topic_id),
                                     prf_run.ranking(topic.topic_id), table, config)
        vec = {d: extractor(documents[d]).to_array() for d in pos + neg}
        total = len(pos) * len(neg)
        if total > cap:
            chosen = np.sort(rng.choice(total, size=cap, replace=False))
        else:
            chosen = range(total)
        for k in chosen:
            i, j = divmod(int(k), len(neg))
            pairs.append((vec[pos[i]], vec[neg[j]]))
    return pairs


@dataclass
class LinearRankModel:
    weights: np.ndarray
    feature_names: tuple = FEATURE_NAMES
    metadata: dict = field(default_factory=dict)
    losses: list = field(default_factory=list, compare=False, repr=False)

    def score(self, x):
        if isinstance(x, FeatureVector):
            x = x.to_array()
        return float(np.dot(self.weights, np.asarray(x, dtype=np.float64)))

    def to_text(self):
        lines = [MODEL_HEADER]
        for key in sorted(self.metadata):
            lines.append(f"# {key} {self.metadata[key]}")
        for name, w in zip(self.feature_names, self.weights):
            lines.append(f"{name} {float(w)!r}")
        return "\n".join(lines) + "\n"

    def save(self, path):
        atomic_write_text(path, self.to_text())

    @classmethod
    def from_text(cls, text):
        lines = text.splitlines()
        if not lines or lines[0].strip() != MODEL_HEADER:
            raise FormatError("missing model header", 1)
        metadata = {}
        weights = {}
        for lineno, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition(" ")
                metadata[key] = value
                continue
            parts = line.split()
            if len(parts) != 2 or parts[0] not in FEATURE_NAMES:
                raise FormatError(f"bad weight line {line!r}", lineno)
            try:
                weights[parts[0]] = float(parts[1])
            except ValueError:
                raise FormatError(f"bad weight {parts[1]!r}", lineno) from None
        missing = [n for n in FEATURE_NAMES if n not in weights]
        if missing:
            raise FormatError(f"missing weights for {', '.join(missing)}")
        return cls(np.array([weights[n] for n in FEATURE_NAMES]), FEATURE_NAMES, metadata)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def pair_accuracy(weights, diffs):
    """Fraction of pairs ordered correctly; exact ties count one half."""
    margins = diffs @ weights
    return float(np.mean(np.where(margins > 0, 1.0, np.where(margins == 0, 0.5, 0.0))))


def train_ranker(pairs, learning_rate=0.1, epochs=200, seed=0):
    """Fit a linear model on preference pairs; returns the model and its loss curve."""
    if not pairs:
        raise ConfigError("cannot train on an empty pair set")
    if learning_rate <= 0 or epochs < 1:
        raise ConfigError("learning_rate must be > 0 and epochs >= 1")
    diffs = np.ascontiguousarray(np.array([p - n for p, n in pairs], dtype=np.float64))
    # The seeded permutation fixes the row order of the reduction.
    diffs = diffs[np.random.default_rng(seed).permutation(len(diffs))]
    w = np.zeros(diffs.shape[1], dtype=np.float64)
    losses = []
    for _ in range(epochs):
        loss, grad = kernels.pairwise_logistic(diffs, w)
        losses.append(loss)
        w = w - learning_rate * grad
    final_loss, _ = kernels.pairwise_logistic(diffs, w)
    losses.append(final_loss)
    metadata = {
        "seed": seed,
        "epochs": epochs,
        "learning_rate": repr(float(learning_rate)),
        "pairs": len(pairs),
        "train_accuracy": repr(pair_accuracy(w, diffs)),
        "final_loss": repr(final_loss),
    }
    return LinearRankModel(w, FEATURE_NAMES, metadata, losses)


def rerank(model, ranking, features, depth=RERANK_DEPTH):
    """Reorder the top ``depth`` of ``[(doc_id, score)]`` by model score.

    Sorting is stable, so equal model scores keep their original order. Scores
    are replaced with ``n - rank + 1`` so the run stays strictly decreasing.
    """
    prefix = list(ranking[:depth])
    rest = list(ranking[depth:])
    keyed = [(-model.score(features[d]), i) for i, (d, _) in enumerate(prefix)]
    keyed.sort()
    ordered = [prefix[i][0] for _, i in keyed] + [d for d, _ in rest]
    n = len(ordered)
    return [(d, float(n - i)) for i, d in enumerate(ordered)]
