"""Readers and writers for documents, topics, concept lexicons and embeddings.

Document records::

    #id: PMC123
    #title: Sepsis in the elderly
    #abstract: ...
    #body: first paragraph
    second paragraph
    #mesh: Sepsis, Aged
    #concepts: C0243026
    ---

A tag owns every following line up to the next tag or the ``---`` record
separator. Topic records use ``#topic:``, ``#type:``, ``#note:``, ``#desc:``
and ``#summary:`` the same way.
"""

import re
import unicodedata
from dataclasses import dataclass, replace

import numpy as np

from cdsbench.errors import FormatError
from cdsbench.textproc.analysis import tokenize
from cdsbench.textproc.concepts import ConceptLexicon, LexiconEntry, extract_concepts

TOPIC_TYPES = ("treatment", "diagnosis", "test", "unknown")

DOC_TAGS = ("id", "title", "abstract", "body", "mesh", "concepts")
TOPIC_TAGS = ("topic", "type", "note", "desc", "summary")

RECORD_SEPARATOR = "---"

# Latin-1 letters and their ASCII spellings; anything else non-ASCII is dropped.
TRANSLITERATION = {
    "À": "A", "Á": "A", "Â": "A", "Ã": "A", "Ä": "A", "Å": "A", "Æ": "AE", "Ç": "C",
    "È": "E", "É": "E", "Ê": "E", "Ë": "E", "Ì": "I", "Í": "I", "Î": "I", "Ï": "I",
    "Ð": "D", "Ñ": "N", "Ò": "O", "Ó": "O", "Ô": "O", "Õ": "O", "Ö": "O", "Ø": "O",
    "Ù": "U", "Ú": "U", "Û": "U", "Ü": "U", "Ý": "Y", "Þ": "TH", "ß": "ss",
    "à": "a", "á": "a", "â": "a", "ã": "a", "ä": "a", "å": "a", "æ": "ae", "ç": "c",
    "è": "e", "é": "e", "ê": "e", "ë": "e", "ì": "i", "í": "i", "î": "i", "ï": "i",
    "ð": "d", "ñ": "n", "ò": "o", "ó": "o", "ô": "o", "õ": "o", "ö": "o", "ø": "o",
    "ù": "u", "ú": "u", "û": "u", "ü": "u", "ý": "y", "þ": "th", "ÿ": "y",
}


def to_ascii(text):
    """Transliterate Latin-1 letters, drop every other non-ASCII character."""
    if text.isascii():
        return text
    # NFC first so combining sequences (e + U+0301) hit the table.
    text = unicodedata.normalize("NFC", text)
    return "".join(ch if ord(ch) < 128 else TRANSLITERATION.get(ch, "") for ch in text)


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str = ""
    abstract_text: str = ""
    body: str = ""
    mesh_keywords: tuple = ()
    concept_ids: tuple = ()

    def text_fields(self):
        return (self.title, self.abstract_text, self.body)


@dataclass(frozen=True)
class Topic:
    topic_id: int
    note: str = ""
    description: str = ""
    summary: str = ""
    topic_type: str = "unknown"

    def field_text(self, field):
        if field == "note":
            return self.note
        if field == "desc":
            return self.description
        if field == "sum":
            return self.summary
        raise ValueError(f"unknown topic field {field!r}")


def _decode(raw):
    if isinstance(raw, bytes):
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"not valid UTF-8: {exc}") from None
    if hasattr(raw, "read"):
        return _decode(raw.read())
    return raw


_TAG_RE = re.compile(r"^#([a-z]+):(.*)$")


def _split_records(text):
    """Yield ``(first_line_number, [(lineno, line), ...])`` per record."""
    record = []
    start = 1
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.strip() == RECORD_SEPARATOR:
            if record:
                yield start, record
            record = []
            start = lineno + 1
            continue
        if not record:
            start = lineno
        record.append((lineno, line))
    if record:
        yield start, record


def _parse_tagged(lines, tags, split_on=None):
    """Group tagged lines into ``{tag: text}``.

    ``split_on`` names a tag that, when it reappears, starts a new record
    (used for topics, which need no explicit separator).
    """
    records = []
    fields = {}
    current = None
    first_line = None
    for lineno, line in lines:
        m = _TAG_RE.match(line)
        if m and m.group(1) in tags:
            tag = m.group(1)
            if tag == split_on and tag in fields:
                records.append((first_line, fields))
                fields = {}
            if tag in fields:
                raise FormatError(f"tag #{tag}: repeated within one record", lineno)
            if not fields:
                first_line = lineno
            fields[tag] = [m.group(2).strip()]
            current = tag
            continue
        if m:
            raise FormatError(f"unknown tag #{m.group(1)}:", lineno)
        if current is None:
            if line.strip():
                raise FormatError("text before the first tag", lineno)
            continue
        fields[current].append(line)
    if fields:
        records.append((first_line, fields))
    return [(ln, {k: "\n".join(v).strip() for k, v in f.items()}) for ln, f in records]


def _split_list(value):
    return tuple(item.strip() for item in value.split(",") if item.strip())


def _document_from_fields(fields, lineno):
    doc_id = to_ascii(fields.get("id", "")).strip()
    if not doc_id:
        raise FormatError("missing or empty #id:", lineno)
    if any(ch.isspace() for ch in doc_id):
        raise FormatError(f"doc id {doc_id!r} contains whitespace", lineno)
    concepts = []
    for cid in _split_list(to_ascii(fields.get("concepts", ""))):
        if cid not in concepts:
            concepts.append(cid)
    return Document(
        doc_id=doc_id,
        title=to_ascii(fields.get("title", "")),
        abstract_text=to_ascii(fields.get("abstract", "")),
        body=to_ascii(fields.get("body", "")),
        mesh_keywords=_split_list(to_ascii(fields.get("mesh", ""))),
        concept_ids=tuple(concepts),
    )


def parse_documents(raw):
    """Parse a stream of ``---``-separated document records."""
    text = _decode(raw)
    docs = []
    seen = set()
    for _, lines in _split_records(text):
        parsed = _parse_tagged(lines, DOC_TAGS)
        if not parsed:
            continue
        for lineno, fields in parsed:
            doc = _document_from_fields(fields, lineno)
            if doc.doc_id in seen:
                raise FormatError(f"duplicate doc id {doc.doc_id!r}", lineno)
            seen.add(doc.doc_id)
            docs.append(doc)
    return docs


def parse_document(raw):
    """Parse exactly one document record."""
    docs = parse_documents(raw)
    if not docs:
        raise FormatError("missing or empty #id:")
    if len(docs) > 1:
        raise FormatError(f"expected one document, found {len(docs)}")
    return docs[0]


def serialize_document(doc):
    lines = [f"#id: {doc.doc_id}"]
    if doc.title:
        lines.append(f"#title: {doc.title}")
    if doc.abstract_text:
        lines.append(f"#abstract: {doc.abstract_text}")
    if doc.body:
        lines.append(f"#body: {doc.body}")
    if doc.mesh_keywords:
        lines.append(f"#mesh: {', '.join(doc.mesh_keywords)}")
    if doc.concept_ids:
        lines.append(f"#concepts: {', '.join(doc.concept_ids)}")
    return "\n".join(lines) + "\n"


def serialize_documents(docs):
    return f"{RECORD_SEPARATOR}\n".join(serialize_document(d) for d in docs)


def load_topics(raw):
    text = _decode(raw)
    topics = []
    seen = set()
    for _, lines in _split_records(text):
        for lineno, fields in _parse_tagged(lines, TOPIC_TAGS, split_on="topic"):
            raw_id = fields.get("topic", "")
            try:
                topic_id = int(raw_id)
            except ValueError:
                raise FormatError(f"topic id {raw_id!r} is not an integer", lineno) from None
            if topic_id <= 0:
                raise FormatError(f"topic id {topic_id} is not positive", lineno)
            if topic_id in seen:
                raise FormatError(f"duplicate topic id {topic_id}", lineno)
            topic_type = fields.get("type", "").strip().lower() or "unknown"
            if topic_type not in TOPIC_TYPES:
                raise FormatError(f"unknown topic type {topic_type!r}", lineno)
            topic = Topic(
                topic_id=topic_id,
                note=to_ascii(fields.get("note", "")),
                description=to_ascii(fields.get("desc", "")),
                summary=to_ascii(fields.get("summary", "")),
                topic_type=topic_type,
            )
            if not (topic.note or topic.description or topic.summary):
                raise FormatError(f"topic {topic_id} has no text", lineno)
            seen.add(topic_id)
            topics.append(topic)
    return topics


def serialize_topics(topics):
    chunks = []
    for t in topics:
        lines = [f"#topic: {t.topic_id}"]
        if t.topic_type != "unknown":
            lines.append(f"#type: {t.topic_type}")
        for tag, value in (("note", t.note), ("desc", t.description), ("summary", t.summary)):
            if value:
                lines.append(f"#{tag}: {value}")
        chunks.append("\n".join(lines) + "\n")
    return f"{RECORD_SEPARATOR}\n".join(chunks)


def load_concept_lexicon(raw, allowed_types=None):
    """Parse ``phrase|concept_id|semantic_type|preferred_name`` lines."""
    text = _decode(raw)
    entries = []
    seen = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) != 4:
            raise FormatError(f"expected 4 '|'-separated fields, got {len(parts)}", lineno)
        phrase_text, concept_id, semantic_type, preferred = parts
        phrase = tuple(tokenize(to_ascii(phrase_text)))
        if not phrase:
            raise FormatError("empty phrase", lineno)
        if not concept_id:
            raise FormatError("empty concept id", lineno)
        if phrase in seen:
            raise FormatError(f"duplicate phrase {phrase_text!r} (first on line {seen[phrase]})", lineno)
        seen[phrase] = lineno
        entries.append(LexiconEntry(phrase, concept_id, semantic_type, to_ascii(preferred)))
    if allowed_types is None:
        return ConceptLexicon(tuple(entries))
    return ConceptLexicon(tuple(entries), frozenset(allowed_types))


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Word vectors with a unit-normalized matrix for exhaustive cosine scans."""

    dimension: int
    words: tuple
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (len(self.words), self.dimension):
            raise ValueError("matrix shape does not match words x dimension")
        norms = np.linalg.norm(self.matrix, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        object.__setattr__(self, "_unit", np.ascontiguousarray(self.matrix / safe[:, None]))
        object.__setattr__(self, "_row", {w: i for i, w in enumerate(self.words)})

    @property
    def vectors(self):
        return {w: self.matrix[i] for i, w in enumerate(self.words)}

    @property
    def unit_matrix(self):
        return self._unit

    def __contains__(self, word):
        return word in self._row

    def __len__(self):
        return len(self.words)

    def row(self, word):
        return self._row.get(word)

    def vector(self, word):
        i = self._row.get(word)
        return None if i is None else self.matrix[i]


def load_embedding_table(raw):
    """Parse ``word v1 ... vd`` lines; every line must have the same ``d``."""
    text = _decode(raw)
    words = []
    rows = []
    dim = None
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        word = parts[0].lower()
        values = parts[1:]
        if not values:
            raise FormatError(f"word {word!r} has no components", lineno)
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise FormatError(f"expected {dim} components, got {len(values)}", lineno)
        try:
            vec = [float(v) for v in values]
        except ValueError:
            raise FormatError("non-numeric component", lineno) from None
        if not all(np.isfinite(vec)):
            raise FormatError("non-finite component", lineno)
        if word in seen:
            raise FormatError(f"duplicate word {word!r}", lineno)
        seen.add(word)
        words.append(word)
        rows.append(vec)
    if dim is None:
        raise FormatError("empty embedding file: dimension undeterminable")
    return EmbeddingTable(dim, tuple(words), np.asarray(rows, dtype=np.float64).reshape(len(rows), dim))


def load_keyword_map(raw):
    """Parse ``doc_id<TAB>keyword, keyword`` lines into a dict."""
    text = _decode(raw)
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        doc_id, sep, rest = line.partition("\t")
        if not sep or not doc_id.strip():
            raise FormatError("expected 'doc_id<TAB>keywords'", lineno)
        out[doc_id.strip()] = list(_split_list(to_ascii(rest)))
    return out


def augment_document(doc, keywords, lexicon):
    """Attach MeSH keywords and append lexicon concepts found in the text fields.

    A keyword-map entry replaces the document's own keywords. Concept ids
    already on the document are kept; new ones are appended once. Fields are
    matched separately so a phrase never spans title and abstract.
    """
    concepts = list(doc.concept_ids)
    if lexicon is not None:
        for text in doc.text_fields():
            for concept_id, _ in extract_concepts(text, lexicon):
                if concept_id not in concepts:
                    concepts.append(concept_id)
    mesh = tuple(keywords[doc.doc_id]) if doc.doc_id in keywords else doc.mesh_keywords
    return replace(doc, mesh_keywords=mesh, concept_ids=tuple(concepts))
