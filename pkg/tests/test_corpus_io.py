import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdsbench.corpus_io import (
    Document,
    Topic,
    augment_document,
    load_concept_lexicon,
    load_embedding_table,
    load_keyword_map,
    load_topics,
    parse_document,
    parse_documents,
    serialize_document,
    serialize_documents,
    serialize_topics,
    to_ascii,
)
from cdsbench.errors import FormatError
from cdsbench.textproc.concepts import DEFAULT_SEMANTIC_TYPES

LEXICON = """\
myocardial infarction|C0027051|Disease or Syndrome|myocardial infarction
acute myocardial infarction|C0155626|Disease or Syndrome|acute myocardial infarction
boston|C0006044|Geographic Area|boston
"""


class TestParseDocuments:
    def test_id_and_title_only(self):
        doc = parse_document("#id: D1\n#title: Heart failure\n")
        assert doc == Document("D1", "Heart failure")
        assert doc.abstract_text == "" and doc.body == "" and doc.mesh_keywords == ()

    def test_transliteration(self):
        doc = parse_document("#id: D1\n#title: naïve analysis\n".encode("utf-8"))
        assert doc.title == "naive analysis"

    def test_combining_accent_is_composed_first(self):
        assert to_ascii("naïve café") == "naive cafe"

    def test_unknown_non_latin_characters_dropped(self):
        assert to_ascii("β-blocker ≥ 5") == "-blocker  5"

    def test_missing_id(self):
        with pytest.raises(FormatError):
            parse_documents("#title: orphan\n#body: text\n")

    def test_text_before_first_tag(self):
        with pytest.raises(FormatError, match="line 1"):
            parse_documents("stray\n#id: D1\n")

    def test_unknown_tag(self):
        with pytest.raises(FormatError, match="unknown tag"):
            parse_documents("#id: D1\n#author: Smith\n")

    def test_repeated_tag(self):
        with pytest.raises(FormatError, match="repeated"):
            parse_documents("#id: D1\n#title: a\n#title: b\n")

    def test_duplicate_id(self):
        with pytest.raises(FormatError, match="duplicate"):
            parse_documents("#id: D1\n---\n#id: D1\n")

    def test_invalid_utf8(self):
        with pytest.raises(FormatError, match="UTF-8"):
            parse_documents(b"#id: D1\n#title: \xff\n")

    def test_multiline_body_and_lists(self):
        docs = parse_documents(
            "#id: D1\n#body: line one\nline two\n#mesh: Sepsis, Shock\n---\n#id: D2\n#concepts: C1, C2, C1\n"
        )
        assert docs[0].body == "line one\nline two"
        assert docs[0].mesh_keywords == ("Sepsis", "Shock")
        assert docs[1].concept_ids == ("C1", "C2")

    def test_bundled_corpus(self, minicorpus):
        docs = parse_documents((minicorpus / "docs.txt").read_bytes())
        assert len(docs) == 100
        assert all(d.title.isascii() and d.body.isascii() for d in docs)


_text = st.text(alphabet=st.characters(min_codepoint=32, max_codepoint=126), max_size=40).map(str.strip).filter(
    lambda s: not s.startswith("#") and s != "---"
)
_item = st.from_regex(r"[A-Za-z0-9][A-Za-z0-9 ]{0,10}[A-Za-z0-9]", fullmatch=True)


@given(
    doc_id=st.from_regex(r"[A-Za-z0-9_.]{1,12}", fullmatch=True),
    title=_text,
    abstract=_text,
    body=_text,
    mesh=st.lists(_item, max_size=3).map(tuple),
    concepts=st.lists(st.from_regex(r"C[0-9]{3}", fullmatch=True), max_size=3, unique=True).map(tuple),
)
def test_document_round_trip(doc_id, title, abstract, body, mesh, concepts):
    doc = Document(doc_id, title, abstract, body, mesh, concepts)
    again = parse_document(serialize_document(doc))
    assert again == doc
    assert parse_document(serialize_document(again)) == again


def test_documents_round_trip_stream(rng):
    from conftest import random_docs

    docs = random_docs(rng, 20)
    assert parse_documents(serialize_documents(docs)) == docs


class TestTopics:
    def test_thirty_topics(self):
        text = "".join(f"#topic: {i}\n#type: diagnosis\n#summary: case {i}\n" for i in range(1, 31))
        assert len(load_topics(text)) == 30

    def test_topic_22_verbatim(self):
        summary = "94 M with CAD s/p 4v-CABG, CHF, CRI presented with vfib arrest."
        (topic,) = load_topics(f"#topic: 22\n#type: treatment\n#summary: {summary}\n")
        assert topic == Topic(22, summary=summary, topic_type="treatment")

    def test_empty_note_accepted(self):
        (topic,) = load_topics("#topic: 3\n#note:\n#summary: fever\n")
        assert topic.note == "" and topic.summary == "fever"

    def test_no_text_rejected(self):
        with pytest.raises(FormatError):
            load_topics("#topic: 3\n#type: test\n")

    def test_bad_type(self):
        with pytest.raises(FormatError, match="type"):
            load_topics("#topic: 3\n#type: prognosis\n#summary: x\n")

    def test_duplicate_id(self):
        with pytest.raises(FormatError, match="duplicate"):
            load_topics("#topic: 3\n#summary: x\n#topic: 3\n#summary: y\n")

    def test_round_trip(self, minicorpus):
        topics = load_topics((minicorpus / "topics.txt").read_bytes())
        assert len(topics) == 5
        assert load_topics(serialize_topics(topics)) == topics

    def test_field_text(self):
        t = Topic(1, "n", "d", "s")
        assert [t.field_text(f) for f in ("note", "desc", "sum")] == ["n", "d", "s"]
        with pytest.raises(ValueError):
            t.field_text("title")


class TestLexicon:
    def test_three_entries(self):
        assert len(load_concept_lexicon(LEXICON).entries) == 3

    def test_duplicate_phrase(self):
        with pytest.raises(FormatError, match="duplicate"):
            load_concept_lexicon("fever|C1|Sign or Symptom|fever\nFever|C2|Finding|fever\n")

    def test_wrong_field_count_names_line(self):
        with pytest.raises(FormatError, match="line 2"):
            load_concept_lexicon("fever|C1|Sign or Symptom|fever\ncough|C2|Sign or Symptom\n")


class TestEmbeddings:
    def test_dimension(self):
        table = load_embedding_table("a 1 0 0\nb 0 1 0\n")
        assert table.dimension == 3 and len(table) == 2
        np.testing.assert_array_equal(table.vector("b"), [0, 1, 0])

    def test_ragged(self):
        with pytest.raises(FormatError, match="line 2"):
            load_embedding_table("a 1 0 0\nb 0 1 0 1\n")

    def test_empty(self):
        with pytest.raises(FormatError, match="dimension"):
            load_embedding_table("")

    def test_non_numeric_and_duplicate(self):
        with pytest.raises(FormatError):
            load_embedding_table("a 1 x\n")
        with pytest.raises(FormatError, match="duplicate"):
            load_embedding_table("a 1 0\na 0 1\n")


class TestAugment:
    lexicon = load_concept_lexicon(LEXICON)

    def test_absent_from_keyword_map(self):
        doc = augment_document(Document("D9", "x"), {"D1": ["Sepsis"]}, self.lexicon)
        assert doc.mesh_keywords == ()

    def test_keywords_attached(self):
        kw = load_keyword_map("D1\tSepsis, Shock, Septic\n")
        assert augment_document(Document("D1"), kw, self.lexicon).mesh_keywords == ("Sepsis", "Shock", "Septic")

    def test_concept_appended_once(self):
        doc = Document("D1", body="Myocardial infarction recurs; myocardial infarction again.")
        assert augment_document(doc, {}, self.lexicon).concept_ids == ("C0027051",)

    def test_disallowed_type_not_appended(self):
        doc = Document("D1", title="Trial in Boston")
        assert augment_document(doc, {}, self.lexicon).concept_ids == ()

    def test_longest_match_wins(self):
        doc = Document("D1", title="acute myocardial infarction")
        assert augment_document(doc, {}, self.lexicon).concept_ids == ("C0155626",)

    def test_default_types_are_the_nine(self):
        assert DEFAULT_SEMANTIC_TYPES == {
            "Disease or Syndrome", "Sign or Symptom", "Pathologic Function", "Diagnostic Procedure",
            "Anatomical Abnormality", "Laboratory Procedure", "Pharmacologic Substance", "Neoplastic Process",
            "Therapeutic or Preventive Procedure",
        }


@given(st.lists(st.sampled_from(
    ["acute", "myocardial", "infarction", "boston", "fever", "in", "the", "patient"]), max_size=25))
def test_augment_idempotent_and_closed(words):
    lexicon = load_concept_lexicon(LEXICON)
    doc = Document("D1", title=" ".join(words[:5]), body=" ".join(words[5:]))
    once = augment_document(doc, {"D1": ["Kw"]}, lexicon)
    assert augment_document(once, {"D1": ["Kw"]}, lexicon) == once
    assert set(once.concept_ids) <= lexicon.concept_ids
