"""Executes a :class:`~cdsbench.config.PipelineConfig` against an index."""

import logging
import os
from dataclasses import dataclass, field

from cdsbench.config import EXPANSION_STAGES, default_stage
from cdsbench.corpus_io import (
    augment_document,
    load_concept_lexicon,
    load_embedding_table,
    load_keyword_map,
    load_topics,
    parse_documents,
)
from cdsbench.errors import ConfigError, EvaluationError
from cdsbench.eval.metrics import inferred_topic_metrics
from cdsbench.eval.qrels import check_sampling, read_qrels
from cdsbench.eval.runs import RankedRun
from cdsbench.expansion import ExpansionParams, expand_concepts, expand_embeddings, expand_prf, expand_rf
from cdsbench.index import build_index, load_index
from cdsbench.ltr import FeatureExtractor, LinearRankModel, build_training_set, rerank, train_ranker
from cdsbench.ranking import RankingParams, build_query, search
from cdsbench.textproc.analysis import AnalyzerConfig, bundled_stopwords, read_stopwords
from cdsbench.textproc.demographics import (
    bundled_demographic_rules,
    normalize_demographics,
    parse_demographic_rules,
)
from cdsbench.textproc.negation import bundled_negation_rules, parse_negation_rules, remove_negated

log = logging.getLogger(__name__)


@dataclass
class Resources:
    """Everything a pipeline run may need besides the index."""

    topics: list = field(default_factory=list)
    documents: dict = None
    lexicon: object = None
    embeddings: object = None
    qrels: object = None
    model: object = None
    negation_rules: object = None
    demographic_rules: object = None


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def analyzer_config(config):
    path = config.path("stopwords")
    stopwords = read_stopwords(_read(path).decode("utf-8")) if path else bundled_stopwords()
    return AnalyzerConfig(stopwords=stopwords, stem=config.stem)


def _require(config, key, why):
    path = config.path(key)
    if path is None:
        raise ConfigError(f"{why} needs '{key}' in the config")
    if not os.path.exists(path):
        raise ConfigError(f"{key} file not found: {path}")
    return path


def load_corpus(config, lexicon=None):
    """Parse and augment every corpus file, in config order."""
    if not config.corpus:
        raise ConfigError("config has no corpus")
    keywords = {}
    kw_path = config.path("keywords")
    if kw_path:
        keywords = load_keyword_map(_read(kw_path))
    docs = []
    for path in config.corpus_paths():
        if not os.path.exists(path):
            raise ConfigError(f"corpus file not found: {path}")
        docs.extend(parse_documents(_read(path)))
    if lexicon is not None or keywords:
        docs = [augment_document(d, keywords, lexicon) for d in docs]
    return docs


def build_index_from_config(config, workers=1):
    lexicon = load_concept_lexicon(_read(config.path("lexicon"))) if config.path("lexicon") else None
    docs = load_corpus(config, lexicon)
    return build_index(docs, analyzer_config(config), partitions=workers, workers=workers)


def load_resources(config, for_training=False):
    """Load and validate every resource the configured stages reference.

    Raises :class:`ConfigError` before any search runs if one is missing.
    """
    names = set(config.stage_names)
    res = Resources()
    res.topics = load_topics(_read(_require(config, "topics", "running topics")))
    if "concepts" in names:
        res.lexicon = load_concept_lexicon(_read(_require(config, "lexicon", "stage 'concepts'")))
    if "embeddings" in names:
        res.embeddings = load_embedding_table(_read(_require(config, "embeddings", "stage 'embeddings'")))
    if "rf" in names:
        qrels_path = _require(config, "qrels", "stage 'rf'")
        res.qrels = read_qrels(qrels_path, config.path("strata"))
    if "ltr" in names or for_training:
        if config.path("embeddings") and res.embeddings is None:
            res.embeddings = load_embedding_table(_read(config.path("embeddings")))
        lexicon = load_concept_lexicon(_read(config.path("lexicon"))) if config.path("lexicon") else None
        res.documents = {d.doc_id: d for d in load_corpus(config, lexicon)}
    if "ltr" in names and not for_training:
        model_param = config.stage("ltr").get("model")
        if not model_param:
            raise ConfigError("stage 'ltr' needs 'model = <path>'")
        model_path = os.path.normpath(os.path.join(config.base_dir, model_param))
        if not os.path.exists(model_path):
            raise ConfigError(f"ltr model file not found: {model_path}")
        res.model = LinearRankModel.load(model_path)
    if "negation" in names:
        path = config.path("negation_rules")
        rules = parse_negation_rules(_read(path).decode("utf-8")) if path else bundled_negation_rules()
        window = config.stage("negation").get("scope_window")
        if window != rules.scope_window:
            rules = type(rules)(rules.pre_triggers, rules.post_triggers, rules.termination_terms, window)
        res.negation_rules = rules
    if "demographics" in names:
        path = config.path("demographic_rules")
        res.demographic_rules = (
            parse_demographic_rules(_read(path).decode("utf-8")) if path else bundled_demographic_rules()
        )
    return res


def load_or_build_index(config):
    path = config.path("index")
    if path and os.path.exists(path):
        index = load_index(path)
        if index.config != analyzer_config(config):
            raise ConfigError("index was built with a different analyzer configuration")
        return index
    return build_index_from_config(config)


def ranking_params(config):
    return RankingParams(config.k1, config.b, config.top_k)


def _expansion_params(stage):
    p = stage.params
    kwargs = {"expansion_weight": p["weight"]}
    if "feedback_docs" in p:
        kwargs["feedback_docs"] = p["feedback_docs"]
        kwargs["expansion_terms"] = p["expansion_terms"]
    if "max_neighbors" in p:
        kwargs["max_neighbors_per_word"] = p["max_neighbors"]
        kwargs["query_word_cap"] = p["query_word_cap"]
        kwargs["similarity_threshold"] = p["similarity_threshold"]
    return ExpansionParams(**kwargs)


def check_resources(config, resources):
    names = set(config.stage_names)
    needs = {"concepts": "lexicon", "embeddings": "embeddings", "rf": "qrels", "ltr": "model"}
    for stage, attr in needs.items():
        if stage in names and getattr(resources, attr) is None:
            raise ConfigError(f"stage {stage!r} needs a {attr} resource")
    if "ltr" in names and resources.documents is None:
        raise ConfigError("stage 'ltr' needs the corpus documents for title features")


def prepare_text(topic, config, resources):
    text = topic.field_text(config.field)
    for name in config.stage_names:
        if name == "demographics":
            text = normalize_demographics(text, resources.demographic_rules or bundled_demographic_rules())
        elif name == "negation":
            text = remove_negated(text, resources.negation_rules or bundled_negation_rules())
    return text


def build_topic_query(topic, config, index, resources):
    """Query after text stages and expansion stages, plus the pre-expansion query."""
    text = prepare_text(topic, config, resources)
    analyzer = index.config
    base_query = build_query(text, analyzer)
    query = base_query
    ranking = ranking_params(config)
    for stage in config.stages:
        if stage.name not in EXPANSION_STAGES:
            continue
        params = _expansion_params(stage)
        if stage.name == "concepts":
            query = expand_concepts(query, text, resources.lexicon, params.expansion_weight, analyzer)
        elif stage.name == "prf":
            query = expand_prf(query, index, config.weights, params, ranking)
        elif stage.name == "rf":
            query = expand_rf(query, index, config.weights, resources.qrels.grades(topic.topic_id), params, ranking)
        elif stage.name == "embeddings":
            query = expand_embeddings(query, resources.embeddings, params, analyzer)
    return base_query, query


def _ltr_feature_runs(base_query, index, config, stage):
    ranking = ranking_params(config)
    base = search(index, base_query, config.weights, ranking)
    prf_query = expand_prf(base_query, index, config.weights, _expansion_params(stage), ranking)
    return base, search(index, prf_query, config.weights, ranking)


def run_topic(topic, config, index, resources):
    base_query, query = build_topic_query(topic, config, index, resources)
    ranked = search(index, query, config.weights, ranking_params(config))
    ltr_stage = config.stage("ltr")
    if ltr_stage is None or not ranked:
        return ranked
    base, prf = _ltr_feature_runs(base_query, index, config, ltr_stage)
    extractor = FeatureExtractor(topic, config.field, base, prf, resources.embeddings, index.config)
    depth = ltr_stage.get("depth")
    features = {d: extractor(resources.documents[d]) for d, _ in ranked[:depth]}
    return rerank(resources.model, ranked, features, depth)


def run_pipeline(config, index, resources):
    """One ranked list per topic, tagged with ``config.run_tag``."""
    check_resources(config, resources)
    run = RankedRun(config.run_tag)
    for topic in resources.topics:
        run.topics[topic.topic_id] = run_topic(topic, config, index, resources)
    return run


def evaluate_weights(weights, topics, index, qrels, config, resources):
    """Mean infNDCG of the configured pipeline under ``weights``.

    Topics without judged-relevant documents are skipped. All-zero weights
    retrieve nothing and score 0, so the objective is defined on the whole grid.
    """
    topics = list(topics)
    if not topics:
        raise EvaluationError("no topics to evaluate")
    evaluated = [t for t in topics if qrels.relevant(t.topic_id)]
    if not evaluated:
        raise EvaluationError("none of the topics has a judged-relevant document")
    if not weights.active():
        return 0.0
    cfg = config.with_weights(weights)
    total = 0.0
    for topic in sorted(evaluated, key=lambda t: t.topic_id):
        check_sampling(qrels, topic.topic_id)
        ranked = run_topic(topic, cfg, index, resources)
        result = inferred_topic_metrics([d for d, _ in ranked], qrels.strata(topic.topic_id))
        total += result["infNDCG"]
    return total / len(evaluated)


def train_ltr(config, index, resources=None):
    """Train a rank model on the config's prior-year topics and judgments."""
    if resources is None:
        resources = load_resources(config, for_training=True)
    topics = load_topics(_read(_require(config, "train_topics", "train-ltr")))
    qrels = read_qrels(_require(config, "train_qrels", "train-ltr"), config.path("train_strata"))
    stage = config.stage("ltr")
    if stage is None:
        stage = default_stage("ltr", config.field)
    base_run = RankedRun("train-base")
    prf_run = RankedRun("train-prf")
    for topic in topics:
        base_query = build_query(prepare_text(topic, config, resources), index.config)
        base, prf = _ltr_feature_runs(base_query, index, config, stage)
        base_run.topics[topic.topic_id] = base
        prf_run.topics[topic.topic_id] = prf
    pairs = build_training_set(topics, qrels, base_run, prf_run, resources.embeddings, resources.documents,
                               config.field, seed=config.seed, config=index.config)
    if not pairs:
        raise EvaluationError("training data yields no preference pairs")
    log.info("training rank model on %d pairs", len(pairs))
    return train_ranker(pairs, stage.get("learning_rate"), stage.get("epochs"), config.seed)
