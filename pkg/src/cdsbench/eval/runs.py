"""TREC run files: ``topic Q0 doc_id rank score run_tag``."""

from dataclasses import dataclass, field

from cdsbench.errors import FormatError
from cdsbench.fileutil import atomic_write_text

MAX_RUN_LENGTH = 1000


def _score_key(score):
    # Ordering follows the value actually written, so write -> read -> write
    # cannot reshuffle near-ties.
    return float(f"{score:.4f}")


@dataclass
class RankedRun:
    run_tag: str
    topics: dict = field(default_factory=dict)

    def ranking(self, topic_id):
        return self.topics.get(topic_id, [])

    def doc_ids(self, topic_id):
        return [d for d, _ in self.topics.get(topic_id, [])]

    def sorted_topics(self):
        return sorted(self.topics)

    def normalized(self):
        """Copy with every topic in write order (score desc, doc id asc)."""
        return RankedRun(
            self.run_tag,
            {t: sorted(r, key=lambda p: (-_score_key(p[1]), p[0])) for t, r in self.topics.items()},
        )


def format_run(run):
    if not run.run_tag or any(ch.isspace() for ch in run.run_tag):
        raise FormatError(f"run tag {run.run_tag!r} must be nonempty without whitespace")
    lines = []
    for topic in sorted(run.topics):
        ranking = sorted(run.topics[topic], key=lambda p: (-_score_key(p[1]), p[0]))
        if len(ranking) > MAX_RUN_LENGTH:
            raise FormatError(f"topic {topic}: {len(ranking)} documents exceeds {MAX_RUN_LENGTH}")
        seen = set()
        for rank, (doc_id, score) in enumerate(ranking, 1):
            if doc_id in seen:
                raise FormatError(f"topic {topic}: duplicate document {doc_id!r}")
            seen.add(doc_id)
            lines.append(f"{topic} Q0 {doc_id} {rank} {score:.4f} {run.run_tag}\n")
    return "".join(lines)


def write_run(run, path):
    atomic_write_text(path, format_run(run))


def parse_run(text):
    tag = None
    topics = {}
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise FormatError(f"expected 6 fields, got {len(parts)}", lineno)
        topic_s, _q0, doc_id, rank_s, score_s, run_tag = parts
        try:
            topic = int(topic_s)
            rank = int(rank_s)
            score = float(score_s)
        except ValueError:
            raise FormatError("non-numeric topic, rank or score", lineno) from None
        if tag is None:
            tag = run_tag
        elif run_tag != tag:
            raise FormatError(f"mixed run tags {tag!r} and {run_tag!r}", lineno)
        if (topic, doc_id) in seen:
            raise FormatError(f"duplicate document {doc_id!r} for topic {topic}", lineno)
        seen.add((topic, doc_id))
        ranking = topics.setdefault(topic, [])
        if rank != len(ranking) + 1:
            raise FormatError(f"rank {rank} breaks the sequence for topic {topic} (expected {len(ranking) + 1})", lineno)
        if ranking and score > ranking[-1][1]:
            raise FormatError(f"score increases at rank {rank} for topic {topic}", lineno)
        ranking.append((doc_id, score))
    return RankedRun(tag or "run", topics)


def read_run(path):
    with open(path, encoding="utf-8") as fh:
        return parse_run(fh.read())
