"""Text processing shared by indexing and query construction."""

from cdsbench.textproc.analysis import AnalyzerConfig, analyze, bundled_stopwords, surface_words, tokenize
from cdsbench.textproc.concepts import (
    DEFAULT_SEMANTIC_TYPES,
    ConceptLexicon,
    LexiconEntry,
    extract_concepts,
)
from cdsbench.textproc.demographics import (
    DemographicRules,
    bundled_demographic_rules,
    normalize_demographics,
    parse_demographic_rules,
)
from cdsbench.textproc.negation import (
    NegationRules,
    bundled_negation_rules,
    detect_negation,
    parse_negation_rules,
    remove_negated,
)
from cdsbench.textproc.porter import porter_stem

__all__ = [
    "DEFAULT_SEMANTIC_TYPES",
    "AnalyzerConfig",
    "ConceptLexicon",
    "DemographicRules",
    "LexiconEntry",
    "NegationRules",
    "analyze",
    "bundled_demographic_rules",
    "bundled_negation_rules",
    "bundled_stopwords",
    "detect_negation",
    "extract_concepts",
    "normalize_demographics",
    "parse_demographic_rules",
    "parse_negation_rules",
    "porter_stem",
    "remove_negated",
    "surface_words",
    "tokenize",
]
