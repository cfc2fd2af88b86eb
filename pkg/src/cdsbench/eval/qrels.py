"""Stratified sampled judgments.

Qrels lines are ``topic stratum doc grade``; grade -1 marks a pooled document
that was not sampled for judging. A sidecar strata file with
``topic stratum pool_size`` lines gives each stratum's full pool size. Without
it every stratum is taken as fully judged (plain TREC qrels, where the second
column is the unused iteration field, read back as a single stratum).
"""

from dataclasses import dataclass, field

from cdsbench.errors import EvaluationError, FormatError

UNJUDGED = -1


@dataclass
class Stratum:
    stratum_id: str
    pool_size: int
    judged: dict = field(default_factory=dict)
    unjudged: set = field(default_factory=set)

    @property
    def pool(self):
        return set(self.judged) | self.unjudged

    @property
    def rate(self):
        return len(self.judged) / self.pool_size if self.pool_size else 0.0

    def relevant_count(self):
        return sum(1 for g in self.judged.values() if g >= 1)


@dataclass
class SampledQrels:
    topics: dict = field(default_factory=dict)

    def strata(self, topic_id):
        return self.topics.get(topic_id, ())

    def grades(self, topic_id):
        """Judged ``{doc: grade}`` across all strata of a topic."""
        out = {}
        for s in self.strata(topic_id):
            out.update(s.judged)
        return out

    def relevant(self, topic_id):
        return {d for d, g in self.grades(topic_id).items() if g >= 1}

    def fully_judged(self):
        return all(s.judged and len(s.judged) == s.pool_size for ss in self.topics.values() for s in ss)

    def evaluated_topics(self):
        """Topics with at least one judged-relevant document, ascending."""
        return sorted(t for t in self.topics if self.relevant(t))


def parse_qrels(qrels_text, strata_text=None):
    listed = {}
    order = {}
    seen = {}
    for lineno, line in enumerate(qrels_text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"expected 4 fields, got {len(parts)}", lineno)
        topic_s, stratum, doc_id, grade_s = parts
        try:
            topic = int(topic_s)
            grade = int(grade_s)
        except ValueError:
            raise FormatError("non-integer topic or grade", lineno) from None
        if grade < UNJUDGED:
            raise FormatError(f"grade {grade} below -1", lineno)
        if (topic, doc_id) in seen:
            raise FormatError(f"document {doc_id!r} listed twice for topic {topic}", lineno)
        seen[(topic, doc_id)] = lineno
        key = (topic, stratum)
        if key not in listed:
            listed[key] = ({}, set())
            order.setdefault(topic, []).append(stratum)
        judged, unjudged = listed[key]
        if grade == UNJUDGED:
            unjudged.add(doc_id)
        else:
            judged[doc_id] = grade

    pool_sizes = {}
    if strata_text is not None:
        for lineno, line in enumerate(strata_text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"strata: expected 3 fields, got {len(parts)}", lineno)
            try:
                topic = int(parts[0])
                size = int(parts[2])
            except ValueError:
                raise FormatError("strata: non-integer topic or pool size", lineno) from None
            if size <= 0:
                raise FormatError("strata: pool size must be positive", lineno)
            if (topic, parts[1]) in pool_sizes:
                raise FormatError(f"strata: stratum {parts[1]} repeated for topic {topic}", lineno)
            pool_sizes[(topic, parts[1])] = size

    topics = {}
    for topic, stratum_ids in order.items():
        strata = []
        for sid in stratum_ids:
            judged, unjudged = listed[(topic, sid)]
            n_listed = len(judged) + len(unjudged)
            if strata_text is None:
                size = n_listed
            else:
                if (topic, sid) not in pool_sizes:
                    raise FormatError(f"no pool size for topic {topic} stratum {sid}")
                size = pool_sizes[(topic, sid)]
                if size < n_listed:
                    raise FormatError(f"topic {topic} stratum {sid}: {n_listed} listed docs exceed pool size {size}")
            strata.append(Stratum(sid, size, judged, unjudged))
        topics[topic] = tuple(strata)
    if strata_text is not None:
        for topic, sid in pool_sizes:
            if (topic, sid) not in listed:
                raise FormatError(f"strata file names topic {topic} stratum {sid} absent from qrels")
    return SampledQrels(topics)


def read_qrels(qrels_path, strata_path=None):
    with open(qrels_path, encoding="utf-8") as fh:
        qrels_text = fh.read()
    strata_text = None
    if strata_path is not None:
        with open(strata_path, encoding="utf-8") as fh:
            strata_text = fh.read()
    return parse_qrels(qrels_text, strata_text)


def format_qrels(qrels):
    """Return ``(qrels_text, strata_text)``."""
    q_lines = []
    s_lines = []
    for topic in sorted(qrels.topics):
        for s in qrels.topics[topic]:
            s_lines.append(f"{topic} {s.stratum_id} {s.pool_size}\n")
            for doc in sorted(s.judged):
                q_lines.append(f"{topic} {s.stratum_id} {doc} {s.judged[doc]}\n")
            for doc in sorted(s.unjudged):
                q_lines.append(f"{topic} {s.stratum_id} {doc} {UNJUDGED}\n")
    return "".join(q_lines), "".join(s_lines)


def check_sampling(qrels, topic_id):
    for s in qrels.strata(topic_id):
        if not s.judged:
            raise EvaluationError(f"topic {topic_id} stratum {s.stratum_id} has no judged documents")
