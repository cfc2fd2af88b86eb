"""NegEx-style negation scoping and the removal variant used for queries."""

import re
from dataclasses import dataclass
from importlib import resources

from cdsbench.errors import FormatError

# Words keep internal "/", "'" and "-" so "y/o", "s/p" and "4v-CABG" survive.
_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:[/'\-][A-Za-z0-9]+)*|[.,;:!?]")
_BREAKS = frozenset(".,;:!?")


def _phrase(text):
    return tuple(text.lower().split())


@dataclass(frozen=True)
class NegationRules:
    pre_triggers: tuple
    post_triggers: tuple
    termination_terms: tuple
    scope_window: int = 5

    def __post_init__(self):
        for name in ("pre_triggers", "post_triggers", "termination_terms"):
            phrases = tuple(_phrase(p) if isinstance(p, str) else tuple(p) for p in getattr(self, name))
            if any(not p for p in phrases):
                raise ValueError(f"empty phrase in {name}")
            object.__setattr__(self, name, phrases)
        if not self.pre_triggers and not self.post_triggers:
            raise ValueError("rules need at least one trigger")
        triggers = set(self.pre_triggers) | set(self.post_triggers)
        if triggers & set(self.termination_terms):
            raise ValueError("triggers and termination terms must be disjoint")
        if self.scope_window < 1:
            raise ValueError("scope_window must be positive")


def parse_negation_rules(text, scope_window=5):
    sections = {"pre": [], "post": [], "term": []}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in sections:
                raise FormatError(f"unknown section [{current}]", lineno)
            continue
        if current is None:
            raise FormatError("phrase outside of a section", lineno)
        sections[current].append(line)
    try:
        return NegationRules(
            tuple(sections["pre"]), tuple(sections["post"]), tuple(sections["term"]), scope_window
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def bundled_negation_rules():
    text = resources.files("cdsbench.data").joinpath("negation.rules").read_text("ascii")
    return parse_negation_rules(text)


def negation_tokens(text):
    """Word tokens plus, per token, whether a clause break precedes it."""
    words = []
    breaks = []
    pending_break = False
    for m in _TOKEN_RE.finditer(text):
        tok = m.group()
        if tok in _BREAKS:
            pending_break = True
            continue
        words.append(tok)
        breaks.append(pending_break)
        pending_break = False
    return words, breaks


def _match_phrases(lower, breaks, rules):
    kinds = {}
    for phrase in rules.termination_terms:
        kinds[phrase] = "term"
    for phrase in rules.post_triggers:
        kinds[phrase] = "post"
    for phrase in rules.pre_triggers:
        kinds[phrase] = "pre"
    max_len = max(len(p) for p in kinds)
    found = []
    i = 0
    n = len(lower)
    while i < n:
        hit = None
        for length in range(min(max_len, n - i), 0, -1):
            if any(breaks[i + 1 : i + length]):
                continue
            kind = kinds.get(tuple(lower[i : i + length]))
            if kind is not None:
                hit = (kind, i, i + length)
                break
        if hit:
            found.append(hit)
            i = hit[2]
        else:
            i += 1
    return found


def detect_negation(text, rules=None):
    """Return ``[((trig_start, trig_end), (neg_start, neg_end)), ...]``.

    Spans are half-open indices into the word tokens of ``text`` (see
    :func:`negation_tokens`). A scope stops at a clause break, a termination
    term, another trigger, or after ``scope_window`` tokens.
    """
    if rules is None:
        rules = bundled_negation_rules()
    words, breaks = negation_tokens(text)
    lower = [w.lower() for w in words]
    found = _match_phrases(lower, breaks, rules)
    claimed = [False] * len(words)
    for _, start, end in found:
        for j in range(start, end):
            claimed[j] = True

    pairs = []
    for kind, start, end in found:
        if kind == "pre":
            stop = end
            limit = min(len(words), end + rules.scope_window)
            while stop < limit and not breaks[stop] and not claimed[stop]:
                stop += 1
            pairs.append(((start, end), (end, stop)))
        elif kind == "post":
            first = start
            limit = max(0, start - rules.scope_window)
            while first > limit and not breaks[first] and not claimed[first - 1]:
                first -= 1
            pairs.append(((start, end), (first, start)))
    return pairs


def remove_negated(text, rules=None):
    """Delete triggers and their negated scopes; rejoin the rest with spaces."""
    if rules is None:
        rules = bundled_negation_rules()
    words, _ = negation_tokens(text)
    drop = [False] * len(words)
    for (ts, te), (ns, ne) in detect_negation(text, rules):
        for j in range(min(ts, ns), max(te, ne)):
            drop[j] = True
    return " ".join(w for w, d in zip(words, drop) if not d)
