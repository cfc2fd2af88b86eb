import dataclasses

import pytest

from cdsbench.config import default_stage, load_config
from cdsbench.errors import ConfigError
from cdsbench.eval import format_run, read_qrels
from cdsbench.expansion import ExpansionParams, expand_prf
from cdsbench.pipeline import (
    build_index_from_config,
    check_resources,
    load_or_build_index,
    load_resources,
    run_pipeline,
    train_ltr,
)
from cdsbench.ranking import RankingParams, build_query, search
from cdsbench.textproc.negation import bundled_negation_rules, remove_negated


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    import shutil

    from conftest import MINICORPUS

    root = tmp_path_factory.mktemp("pipe") / "minicorpus"
    shutil.copytree(MINICORPUS, root)
    config = load_config(root / "baseline.cfg")
    return root, config, build_index_from_config(config)


def test_empty_stage_list_is_baseline_search(corpus):
    _, config, index = corpus
    resources = load_resources(config)
    run = run_pipeline(config, index, resources)
    for topic in resources.topics:
        expected = search(index, build_query(topic.summary, index.config), config.weights)
        assert run.topics[topic.topic_id] == expected


def test_negation_then_prf_matches_manual_composition(corpus):
    _, base, index = corpus
    config = dataclasses.replace(base, stages=(default_stage("negation"), default_stage("prf")))
    resources = load_resources(config)
    run = run_pipeline(config, index, resources)
    rules = bundled_negation_rules()
    params = ExpansionParams(expansion_weight=config.stage("prf").get("weight"))
    for topic in resources.topics:
        query = build_query(remove_negated(topic.summary, rules), index.config)
        query = expand_prf(query, index, config.weights, params, RankingParams())
        assert run.topics[topic.topic_id] == search(index, query, config.weights)


@pytest.mark.parametrize("name", ["baseline.cfg", "pipeline.cfg"])
def test_runs_are_byte_identical(corpus, name):
    root, _, _ = corpus
    config = load_config(root / name)
    texts = []
    for _ in range(2):
        index = build_index_from_config(config)
        texts.append(format_run(run_pipeline(config, index, load_resources(config))))
    assert texts[0] == texts[1]
    assert texts[0].splitlines()[0].endswith(config.run_tag)


def test_zero_weight_prf_equals_baseline(corpus):
    root, _, index = corpus
    base = load_config(root / "baseline.cfg")
    zero = load_config(root / "prf_zero.cfg")
    a = format_run(run_pipeline(base, index, load_resources(base)))
    b = format_run(run_pipeline(zero, index, load_resources(zero)))
    assert a == b


def test_check_resources_rejects_missing(corpus):
    _, base, _ = corpus
    config = dataclasses.replace(base, stages=(default_stage("concepts"),))
    resources = load_resources(base)
    with pytest.raises(ConfigError, match="lexicon"):
        check_resources(config, resources)


def test_persisted_index_is_reused(corpus, tmp_path):
    root, base, index = corpus
    from cdsbench.index import save_index

    path = tmp_path / "x.idx"
    save_index(index, path)
    config = dataclasses.replace(base, index=str(path))
    loaded = load_or_build_index(config)
    assert loaded.doc_ids == index.doc_ids
    with pytest.raises(ConfigError, match="analyzer"):
        load_or_build_index(dataclasses.replace(config, stem=False))


def test_train_and_apply_ltr(corpus, tmp_path):
    root, _, _ = corpus
    config = load_config(root / "ltr.cfg")
    index = build_index_from_config(config)
    model = train_ltr(config, index)
    assert int(model.metadata["pairs"]) > 0
    assert model.to_text() == train_ltr(config, index).to_text()
    model.save(root / "ltr_model.txt")
    run = run_pipeline(config, index, load_resources(config))
    qrels = read_qrels(config.path("qrels"), config.path("strata"))
    assert set(run.topics) == set(qrels.topics)
    no_ltr = dataclasses.replace(config, stages=config.stages[:-1])
    plain = run_pipeline(no_ltr, index, load_resources(no_ltr))
    for t in run.topics:
        assert sorted(d for d, _ in run.topics[t]) == sorted(d for d, _ in plain.topics[t])
