"""Dictionary concept matching with semantic-type filtering."""

from dataclasses import dataclass, field
from functools import cached_property

from cdsbench.textproc.analysis import tokenize

DEFAULT_SEMANTIC_TYPES = frozenset(
    {
        "Disease or Syndrome",
        "Sign or Symptom",
        "Pathologic Function",
        "Diagnostic Procedure",
        "Anatomical Abnormality",
        "Laboratory Procedure",
        "Pharmacologic Substance",
        "Neoplastic Process",
        "Therapeutic or Preventive Procedure",
    }
)


@dataclass(frozen=True)
class LexiconEntry:
    phrase: tuple
    concept_id: str
    semantic_type: str
    preferred_name: str


@dataclass(frozen=True)
class ConceptLexicon:
    entries: tuple
    allowed_types: frozenset = field(default=DEFAULT_SEMANTIC_TYPES)

    def __post_init__(self):
        seen = set()
        for entry in self.entries:
            if not entry.phrase:
                raise ValueError(f"empty phrase for concept {entry.concept_id}")
            if entry.phrase in seen:
                raise ValueError(f"duplicate phrase {' '.join(entry.phrase)!r}")
            seen.add(entry.phrase)

    @cached_property
    def by_phrase(self):
        return {entry.phrase: entry for entry in self.entries}

    @cached_property
    def max_phrase_length(self):
        return max((len(e.phrase) for e in self.entries), default=0)

    @property
    def concept_ids(self):
        return {e.concept_id for e in self.entries}

    def with_allowed_types(self, types):
        return ConceptLexicon(self.entries, frozenset(types))


def match_concepts(tokens, lexicon):
    """Greedy left-to-right longest match; returns every matched entry in order.

    Disallowed semantic types are kept here; filtering happens in the caller so
    that a disallowed long match still consumes its tokens.
    """
    matches = []
    table = lexicon.by_phrase
    max_len = lexicon.max_phrase_length
    i = 0
    n = len(tokens)
    while i < n:
        for length in range(min(max_len, n - i), 0, -1):
            entry = table.get(tuple(tokens[i : i + length]))
            if entry is not None:
                matches.append((i, i + length, entry))
                i += length
                break
        else:
            i += 1
    return matches


def extract_concepts(text, lexicon):
    """Return de-duplicated ``(concept_id, preferred_name)`` in first-seen order."""
    seen = set()
    out = []
    for _, _, entry in match_concepts(tokenize(text), lexicon):
        if entry.semantic_type not in lexicon.allowed_types:
            continue
        if entry.concept_id in seen:
            continue
        seen.add(entry.concept_id)
        out.append((entry.concept_id, entry.preferred_name))
    return out
