"""Rule-based rewriting of age and gender mentions into cohort words.

``"86 y/o m"`` becomes ``"elderly male"``: the numeric age is mapped to an age
band label and an adjoining gender token to ``male``/``female``. Everything
outside a matched expression is left byte-identical.
"""

import math
import re
from dataclasses import dataclass
from functools import cached_property
from importlib import resources

from cdsbench.errors import FormatError

_NUM = r"(?P<age>\d+(?:\.\d+)?)"

# (regex, unit). Order matters: at equal start offsets the earlier rule wins.
DEFAULT_AGE_PATTERNS = (
    (_NUM + r"[- ]?(?:years?|yrs?)[- ]old", "years"),
    (_NUM + r" ?(?:y/o|y\.o\.|yo)", "years"),
    (_NUM + r"[- ]?(?:months?|mos?)[- ]old", "months"),
    (_NUM + r" ?m/o", "months"),
    (_NUM + r"[- ]?(?:weeks?|wks?)[- ]old", "weeks"),
    (_NUM + r"[- ]?days?[- ]old", "days"),
)

_UNIT_YEARS = {"years": 1.0, "months": 1.0 / 12.0, "weeks": 1.0 / 52.0, "days": 1.0 / 365.0}


@dataclass(frozen=True)
class DemographicRules:
    age_patterns: tuple
    gender_map: dict
    age_bands: tuple

    def __post_init__(self):
        if not self.age_bands:
            raise ValueError("age_bands must not be empty")
        bounds = [bound for bound, _ in self.age_bands]
        if any(b <= a for a, b in zip(bounds, bounds[1:])) or bounds[0] <= 0:
            raise ValueError("age band bounds must be positive and strictly increasing")
        if not math.isinf(bounds[-1]):
            raise ValueError("last age band must be unbounded (inf)")

    def band(self, age_years):
        for bound, label in self.age_bands:
            if age_years < bound:
                return label
        return self.age_bands[-1][1]

    @cached_property
    def _compiled(self):
        tokens = sorted(self.gender_map, key=lambda t: (-len(t), t))
        gender = "|".join(re.escape(t) for t in tokens)
        tail = rf"(?:,? ?(?P<gender>{gender}))?" if tokens else ""
        compiled = []
        for source, unit in self.age_patterns:
            pat = rf"(?<![A-Za-z0-9.])(?:{source}){tail}(?![A-Za-z0-9])"
            compiled.append((re.compile(pat, re.IGNORECASE), unit))
        if tokens:
            # Bare "94 M": a number directly followed by a gender token. Single
            # letters must be capitals here so "5 m of tubing" is left alone.
            letters = "".join(t.upper() for t in tokens if len(t) == 1)
            words = "|".join(re.escape(t) for t in tokens if len(t) > 1)
            alts = [f"[{letters}]"] if letters else []
            if words:
                alts.append(f"(?i:{words})")
            bare = rf"(?<![A-Za-z0-9.]){_NUM} (?P<gender>{'|'.join(alts)})(?![A-Za-z0-9/])"
            compiled.append((re.compile(bare), "years"))
        return compiled


def parse_demographic_rules(text, age_patterns=DEFAULT_AGE_PATTERNS):
    """Parse ``maxage label`` and ``gender token label`` lines."""
    bands = []
    genders = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0].lower() == "gender":
            if len(parts) != 3 or parts[2].lower() not in ("male", "female"):
                raise FormatError("expected 'gender <token> male|female'", lineno)
            genders[parts[1].lower()] = parts[2].lower()
            continue
        if len(parts) != 2:
            raise FormatError("expected '<maxage> <label>'", lineno)
        try:
            bound = float(parts[0])
        except ValueError:
            raise FormatError(f"bad age bound {parts[0]!r}", lineno) from None
        bands.append((bound, parts[1]))
    try:
        return DemographicRules(tuple(age_patterns), genders, tuple(bands))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def bundled_demographic_rules():
    text = resources.files("cdsbench.data").joinpath("demographics.rules").read_text("ascii")
    return parse_demographic_rules(text)


def _find_matches(text, rules):
    matches = []
    pos = 0
    compiled = rules._compiled
    while pos <= len(text):
        best = None
        for order, (regex, unit) in enumerate(compiled):
            m = regex.search(text, pos)
            if m is None:
                continue
            key = (m.start(), order)
            if best is None or key < best[0]:
                best = (key, m, unit)
        if best is None:
            break
        _, m, unit = best
        matches.append((m, unit))
        pos = m.end() if m.end() > m.start() else m.end() + 1
    return matches


def normalize_demographics(text, rules=None):
    if rules is None:
        rules = bundled_demographic_rules()
    out = []
    last = 0
    for m, unit in _find_matches(text, rules):
        age = float(m.group("age")) * _UNIT_YEARS[unit]
        words = [rules.band(age)]
        gender = m.groupdict().get("gender")
        if gender:
            words.append(rules.gender_map[gender.lower()])
        out.append(text[last : m.start()])
        out.append(" ".join(words))
        last = m.end()
    out.append(text[last:])
    return "".join(out)
