"""Declarative experiment configuration.

A config file is ``key = value`` lines followed by optional ``[stage:<name>]``
sections, one per pipeline stage, in execution order::

    corpus = docs.txt
    topics = topics.txt
    field = sum
    weights = title:1.2, all:1

    [stage:negation]

    [stage:prf]
    feedback_docs = 30
    expansion_terms = 10
    weight = 0.2

Relative paths resolve against the directory holding the config file.
Parsing fills every default, so serializing a parsed config and parsing it
again gives back an equal object.
"""

import os
from dataclasses import dataclass, field as dc_field, replace

from cdsbench.errors import ConfigError
from cdsbench.expansion import FIELD_LAMBDAS
from cdsbench.index import Facet
from cdsbench.ranking import FacetWeights, RankingParams

TEXT_STAGES = ("demographics", "negation")
EXPANSION_STAGES = ("concepts", "prf", "rf", "embeddings")
RERANK_STAGES = ("ltr",)
STAGES = TEXT_STAGES + EXPANSION_STAGES + RERANK_STAGES
FIELDS = ("note", "desc", "sum")

# stage -> {param: (type, default)}; a default of None for "weight" means the
# per-field expansion weight.
STAGE_PARAMS = {
    "demographics": {},
    "negation": {"scope_window": (int, 5)},
    "concepts": {"weight": (float, None)},
    "prf": {"feedback_docs": (int, 30), "expansion_terms": (int, 10), "weight": (float, None)},
    "rf": {"feedback_docs": (int, 30), "expansion_terms": (int, 10), "weight": (float, None)},
    "embeddings": {
        "max_neighbors": (int, 3),
        "query_word_cap": (int, 40),
        "similarity_threshold": (float, 0.6),
        "weight": (float, None),
    },
    "ltr": {
        "model": (str, ""),
        "depth": (int, 100),
        "learning_rate": (float, 0.1),
        "epochs": (int, 200),
        "feedback_docs": (int, 30),
        "expansion_terms": (int, 10),
        "weight": (float, None),
    },
}

PATH_KEYS = (
    "corpus", "topics", "index", "keywords", "lexicon", "embeddings", "qrels", "strata",
    "stopwords", "negation_rules", "demographic_rules",
    "train_topics", "train_qrels", "train_strata",
)


def _parse_bool(value):
    v = value.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def parse_weights_spec(text):
    """``"title:1.2, all:1"`` -> FacetWeights."""
    items = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        name, sep, value = chunk.partition(":")
        if not sep:
            raise ConfigError(f"weight {chunk!r} is not 'facet:value'")
        try:
            facet = Facet(name.strip())
        except ValueError:
            raise ConfigError(f"unknown facet {name.strip()!r}") from None
        try:
            items[facet] = float(value)
        except ValueError:
            raise ConfigError(f"bad weight value {value!r}") from None
    weights = FacetWeights(items)
    if not weights.active():
        raise ConfigError("weights must give at least one facet a positive weight")
    return weights


def format_weights_spec(weights):
    return ", ".join(f"{f.value}:{w!r}" for f, w in weights.active())


@dataclass(frozen=True)
class StageConfig:
    name: str
    params: dict = dc_field(default_factory=dict)

    def get(self, key):
        return self.params[key]


@dataclass(frozen=True)
class PipelineConfig:
    corpus: tuple = ()
    topics: str = ""
    field: str = "sum"
    index: str = ""
    keywords: str = ""
    lexicon: str = ""
    embeddings: str = ""
    qrels: str = ""
    strata: str = ""
    stopwords: str = ""
    negation_rules: str = ""
    demographic_rules: str = ""
    train_topics: str = ""
    train_qrels: str = ""
    train_strata: str = ""
    stem: bool = True
    k1: float = 1.2
    b: float = 0.75
    top_k: int = 1000
    weights: FacetWeights = dc_field(default_factory=lambda: FacetWeights({Facet.ALL: 1.0}))
    stages: tuple = ()
    seed: int = 0
    run_tag: str = "baseline"
    base_dir: str = dc_field(default=".", compare=False)

    def stage(self, name):
        for s in self.stages:
            if s.name == name:
                return s
        return None

    @property
    def stage_names(self):
        return tuple(s.name for s in self.stages)

    def path(self, key):
        """Absolute path for a path-valued key, or None when unset."""
        value = getattr(self, key)
        if not value:
            return None
        return os.path.normpath(os.path.join(self.base_dir, value))

    def corpus_paths(self):
        return [os.path.normpath(os.path.join(self.base_dir, p)) for p in self.corpus]

    def with_weights(self, weights):
        return replace(self, weights=weights)


_SCALARS = {
    "field": str, "stem": _parse_bool, "k1": float, "b": float, "top_k": int, "seed": int, "run_tag": str,
}


def _normalize_stage(name, raw, field_name):
    spec = STAGE_PARAMS[name]
    params = {}
    for key, value in raw.items():
        if key not in spec:
            raise ConfigError(f"stage {name!r} has no parameter {key!r}")
        kind, _ = spec[key]
        try:
            params[key] = kind(value) if not isinstance(value, kind) else value
        except ValueError:
            raise ConfigError(f"stage {name!r}: bad value {value!r} for {key}") from None
    for key, (kind, default) in spec.items():
        if key not in params:
            params[key] = FIELD_LAMBDAS[field_name] if key == "weight" and default is None else default
    if "weight" in params and not 0.0 <= params["weight"] <= 1.0:
        raise ConfigError(f"stage {name!r}: weight must lie in [0, 1]")
    return StageConfig(name, params)


def default_stage(name, field_name="sum"):
    """A stage with every parameter at its default."""
    return _normalize_stage(name, {}, field_name)


def _check_stage_order(names):
    rank = {n: (0 if n in TEXT_STAGES else 1 if n in EXPANSION_STAGES else 2) for n in STAGES}
    seen = set()
    last = 0
    for n in names:
        if n not in rank:
            raise ConfigError(f"unknown stage {n!r}; expected one of {', '.join(STAGES)}")
        if n in seen:
            raise ConfigError(f"stage {n!r} listed twice")
        seen.add(n)
        if rank[n] < last:
            raise ConfigError(
                f"stage {n!r} is out of order: text stages come first, then expansion stages, then ltr"
            )
        last = rank[n]


def parse_config(text, base_dir="."):
    top = {}
    stages = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            header = line[1:-1].strip()
            kind, sep, name = header.partition(":")
            if kind.strip() != "stage" or not sep or not name.strip():
                raise ConfigError(f"line {lineno}: expected [stage:<name>], got [{header}]")
            current = (name.strip(), {})
            stages.append(current)
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = key.strip(), value.strip()
        target = top if current is None else current[1]
        if key in target:
            raise ConfigError(f"line {lineno}: {key!r} set twice")
        target[key] = value

    _check_stage_order([name for name, _ in stages])
    kwargs = {}
    for key, value in top.items():
        if key == "corpus":
            kwargs[key] = tuple(p.strip() for p in value.split(",") if p.strip())
        elif key in PATH_KEYS:
            kwargs[key] = value
        elif key == "weights":
            kwargs[key] = parse_weights_spec(value)
        elif key in _SCALARS:
            try:
                kwargs[key] = _SCALARS[key](value)
            except ValueError:
                raise ConfigError(f"bad value {value!r} for {key}") from None
        else:
            raise ConfigError(f"unknown config key {key!r}")
    field_name = kwargs.get("field", "sum")
    if field_name not in FIELDS:
        raise ConfigError(f"field must be one of {', '.join(FIELDS)}, got {field_name!r}")
    kwargs["stages"] = tuple(_normalize_stage(name, params, field_name) for name, params in stages)
    config = PipelineConfig(base_dir=base_dir, **kwargs)
    validate_config(config)
    return config


def validate_config(config):
    RankingParams(config.k1, config.b, config.top_k)
    if not config.run_tag or any(ch.isspace() for ch in config.run_tag):
        raise ConfigError("run_tag must be nonempty and contain no whitespace")
    if not config.weights.active():
        raise ConfigError("weights must give at least one facet a positive weight")


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config):
    lines = []
    for key in PATH_KEYS:
        value = getattr(config, key)
        if key == "corpus":
            value = ", ".join(value)
        if value:
            lines.append(f"{key} = {value}")
    lines.append(f"field = {config.field}")
    lines.append(f"stem = {_format_value(config.stem)}")
    lines.append(f"k1 = {_format_value(config.k1)}")
    lines.append(f"b = {_format_value(config.b)}")
    lines.append(f"top_k = {config.top_k}")
    lines.append(f"weights = {format_weights_spec(config.weights)}")
    lines.append(f"seed = {config.seed}")
    lines.append(f"run_tag = {config.run_tag}")
    for stage in config.stages:
        lines.append("")
        lines.append(f"[stage:{stage.name}]")
        for key in sorted(stage.params):
            lines.append(f"{key} = {_format_value(stage.params[key])}")
    return "\n".join(lines) + "\n"
