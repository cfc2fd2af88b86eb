"""Tokenizer and the index/query analyzer chain."""

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from cdsbench.textproc.porter import porter_stem

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text):
    """Lowercase and split on runs of non-alphanumerics."""
    return _TOKEN_RE.findall(text.lower())


def read_stopwords(text):
    words = set()
    for line in text.splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            words.add(word)
    return frozenset(words)


@lru_cache(maxsize=None)
def bundled_stopwords():
    data = resources.files("cdsbench.data").joinpath("stopwords.txt").read_text("ascii")
    return read_stopwords(data)


@dataclass(frozen=True)
class AnalyzerConfig:
    stopwords: frozenset = field(default_factory=bundled_stopwords)
    stem: bool = True

    @property
    def lowercase(self):
        return True


def stem_token(token):
    # Mixed alphanumerics like "4v" or "86" are left alone.
    return porter_stem(token) if token.isalpha() else token


def analyze(text, config=None):
    """Lowercase, tokenize, drop stopwords, and Porter-stem."""
    if config is None:
        config = AnalyzerConfig()
    tokens = [t for t in tokenize(text) if t not in config.stopwords]
    if config.stem:
        return [stem_token(t) for t in tokens]
    return tokens


def surface_words(text, config=None):
    """Unstemmed, stopword-free lowercase tokens."""
    if config is None:
        config = AnalyzerConfig()
    return [t for t in tokenize(text) if t not in config.stopwords]
