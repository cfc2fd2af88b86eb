"""Multi-facet inverted index with CSR postings and binary persistence."""

import io
import json
import struct
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from cdsbench.errors import BuildError, FormatError
from cdsbench.fileutil import atomic_write_bytes
from cdsbench.textproc.analysis import AnalyzerConfig, analyze


class Facet(str, Enum):
    TITLE = "title"
    ABSTRACT = "abstract"
    BODY = "body"
    MESH = "mesh"
    CONCEPTS = "concepts"
    ALL = "all"

    def __str__(self):
        return self.value


FACETS = tuple(Facet)

MAGIC = b"CDSBIDX\n"
FORMAT_VERSION = 1


@dataclass(eq=False)
class FacetIndex:
    vocab: tuple
    offsets: np.ndarray
    ords: np.ndarray
    tfs: np.ndarray
    doc_lens: np.ndarray

    def __post_init__(self):
        self.term_row = {t: i for i, t in enumerate(self.vocab)}
        n = self.doc_lens.shape[0]
        self.doc_lens_f = self.doc_lens.astype(np.float64)
        self.avglen = float(self.doc_lens.sum()) / n if n else 0.0

    def postings_arrays(self, term):
        row = self.term_row.get(term)
        if row is None:
            return _EMPTY_I32, _EMPTY_I32
        lo, hi = self.offsets[row], self.offsets[row + 1]
        return self.ords[lo:hi], self.tfs[lo:hi]

    def df(self, term):
        row = self.term_row.get(term)
        if row is None:
            return 0
        return int(self.offsets[row + 1] - self.offsets[row])

    def tf(self, term, ordinal):
        ords, tfs = self.postings_arrays(term)
        i = np.searchsorted(ords, ordinal)
        if i < ords.shape[0] and ords[i] == ordinal:
            return int(tfs[i])
        return 0

    def doc_counters(self):
        """Invert back to one ``Counter`` per document."""
        out = [Counter() for _ in range(self.doc_lens.shape[0])]
        for row, term in enumerate(self.vocab):
            lo, hi = self.offsets[row], self.offsets[row + 1]
            for d, tf in zip(self.ords[lo:hi].tolist(), self.tfs[lo:hi].tolist()):
                out[d][term] = tf
        return out


_EMPTY_I32 = np.zeros(0, dtype=np.int32)


class InvertedIndex:
    """Per-facet postings plus a forward store of the ``all`` facet.

    Built by :func:`build_index`; immutable afterwards.
    """

    def __init__(self, doc_ids, config, facets, forward):
        self.doc_ids = tuple(doc_ids)
        self.config = config
        self.facets = facets
        self._forward = forward
        self.ordinal = {d: i for i, d in enumerate(self.doc_ids)}

    @property
    def n_docs(self):
        return len(self.doc_ids)

    def facet(self, facet):
        return self.facets[Facet(facet)]

    def doc_ordinal(self, doc_id):
        try:
            return self.ordinal[doc_id]
        except KeyError:
            raise KeyError(f"unknown document {doc_id!r}") from None

    def doc_terms(self, ordinal):
        """``{term: tf}`` of the ``all`` facet for one document."""
        offsets, term_ids, tfs = self._forward
        lo, hi = offsets[ordinal], offsets[ordinal + 1]
        vocab = self.facets[Facet.ALL].vocab
        return {vocab[t]: int(c) for t, c in zip(term_ids[lo:hi].tolist(), tfs[lo:hi].tolist())}

    def __eq__(self, other):
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        return to_bytes(self) == to_bytes(other)

    __hash__ = None


def postings(index, facet, term):
    """``[(doc_ordinal, tf), ...]`` sorted by ordinal; empty for unseen terms."""
    ords, tfs = index.facet(facet).postings_arrays(term)
    return list(zip(ords.tolist(), tfs.tolist()))


def _doc_facet_terms(doc, config):
    title = analyze(doc.title, config)
    abstract = analyze(doc.abstract_text, config)
    body = analyze(doc.body, config)
    return {
        Facet.TITLE: title,
        Facet.ABSTRACT: abstract,
        Facet.BODY: body,
        Facet.MESH: analyze(" ".join(doc.mesh_keywords), config),
        # concept ids are opaque terms: no analysis, no stemming
        Facet.CONCEPTS: list(doc.concept_ids),
        Facet.ALL: title + abstract + body,
    }


def _assemble_facet(counters):
    n = len(counters)
    vocab = sorted(set().union(*counters)) if counters else []
    row = {t: i for i, t in enumerate(vocab)}
    counts = np.zeros(len(vocab) + 1, dtype=np.int64)
    for c in counters:
        for t in c:
            counts[row[t] + 1] += 1
    offsets = np.cumsum(counts)
    ords = np.empty(int(offsets[-1]), dtype=np.int32)
    tfs = np.empty(int(offsets[-1]), dtype=np.int32)
    fill = offsets[:-1].copy()
    for d, c in enumerate(counters):
        for t, tf in c.items():
            r = row[t]
            ords[fill[r]] = d
            tfs[fill[r]] = tf
            fill[r] += 1
    lens = np.array([sum(c.values()) for c in counters], dtype=np.int64).reshape(n)
    return FacetIndex(tuple(vocab), offsets, ords, tfs, lens)


def _assemble_forward(all_facet, counters):
    row = all_facet.term_row
    offsets = np.zeros(len(counters) + 1, dtype=np.int64)
    term_ids = []
    tfs = []
    for d, c in enumerate(counters):
        items = sorted((row[t], tf) for t, tf in c.items())
        term_ids.extend(i for i, _ in items)
        tfs.extend(tf for _, tf in items)
        offsets[d + 1] = offsets[d] + len(items)
    return offsets, np.asarray(term_ids, dtype=np.int32), np.asarray(tfs, dtype=np.int32)


def _assemble(doc_ids, config, per_facet_counters):
    facets = {f: _assemble_facet(per_facet_counters[f]) for f in FACETS}
    forward = _assemble_forward(facets[Facet.ALL], per_facet_counters[Facet.ALL])
    return InvertedIndex(doc_ids, config, facets, forward)


def _check_unique(doc_ids):
    seen = set()
    for d in doc_ids:
        if d in seen:
            raise BuildError(f"duplicate doc id {d!r}")
        seen.add(d)


def _build_single(docs, config):
    per_facet = {f: [] for f in FACETS}
    for doc in docs:
        for f, terms in _doc_facet_terms(doc, config).items():
            per_facet[f].append(Counter(terms))
    return _assemble([d.doc_id for d in docs], config, per_facet)


def build_index(docs, config=None, partitions=1, workers=1):
    """Index ``docs`` in input order (ordinal i is ``docs[i]``).

    With ``partitions > 1`` the corpus is split into contiguous chunks, built
    independently (optionally on ``workers`` threads) and merged; the result
    is identical to a single-pass build.
    """
    if config is None:
        config = AnalyzerConfig()
    docs = list(docs)
    _check_unique([d.doc_id for d in docs])
    if partitions <= 1 or len(docs) < 2:
        return _build_single(docs, config)
    size = -(-len(docs) // partitions)
    chunks = [docs[i : i + size] for i in range(0, len(docs), size)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(pool.map(lambda chunk: _build_single(chunk, config), chunks))
    return merge_indexes(parts)


def merge_indexes(parts):
    """Concatenate sub-indexes; ordinals follow the order of ``parts``."""
    parts = list(parts)
    if not parts:
        raise BuildError("nothing to merge")
    config = parts[0].config
    if any(p.config != config for p in parts):
        raise BuildError("cannot merge indexes built with different analyzer configs")
    doc_ids = [d for p in parts for d in p.doc_ids]
    _check_unique(doc_ids)
    per_facet = {f: [c for p in parts for c in p.facets[f].doc_counters()] for f in FACETS}
    return _assemble(doc_ids, config, per_facet)


def _header(index):
    arrays = []
    for f in FACETS:
        for name in ("offsets", "ords", "tfs", "doc_lens"):
            arr = getattr(index.facets[f], name)
            arrays.append([f"{f.value}.{name}", arr.dtype.str, int(arr.shape[0])])
    for name, arr in zip(("offsets", "term_ids", "tfs"), index._forward):
        arrays.append([f"forward.{name}", arr.dtype.str, int(arr.shape[0])])
    return {
        "doc_ids": list(index.doc_ids),
        "stem": index.config.stem,
        "stopwords": sorted(index.config.stopwords),
        "vocab": {f.value: list(index.facets[f].vocab) for f in FACETS},
        "arrays": arrays,
    }


def to_bytes(index):
    header = json.dumps(_header(index), sort_keys=True, separators=(",", ":")).encode("utf-8")
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<IQ", FORMAT_VERSION, len(header)))
    buf.write(header)
    for f in FACETS:
        fi = index.facets[f]
        for arr in (fi.offsets, fi.ords, fi.tfs, fi.doc_lens):
            buf.write(np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())
    for arr in index._forward:
        buf.write(np.ascontiguousarray(arr).astype(arr.dtype.newbyteorder("<"), copy=False).tobytes())
    return buf.getvalue()


def from_bytes(data):
    if not data.startswith(MAGIC):
        raise FormatError("not an index file (bad magic)")
    pos = len(MAGIC)
    try:
        version, header_len = struct.unpack_from("<IQ", data, pos)
    except struct.error:
        raise FormatError("truncated index header") from None
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported index format version {version}")
    pos += struct.calcsize("<IQ")
    try:
        header = json.loads(data[pos : pos + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"corrupt index header: {exc}") from None
    pos += header_len
    arrays = {}
    for name, dtype, length in header["arrays"]:
        dt = np.dtype(dtype)
        nbytes = dt.itemsize * length
        if pos + nbytes > len(data):
            raise FormatError(f"truncated index data in {name}")
        arrays[name] = np.frombuffer(data, dtype=dt, count=length, offset=pos).astype(dt.newbyteorder("="))
        pos += nbytes
    if pos != len(data):
        raise FormatError("trailing bytes after index data")
    config = AnalyzerConfig(stopwords=frozenset(header["stopwords"]), stem=header["stem"])
    facets = {}
    for f in FACETS:
        facets[f] = FacetIndex(
            tuple(header["vocab"][f.value]),
            arrays[f"{f.value}.offsets"],
            arrays[f"{f.value}.ords"],
            arrays[f"{f.value}.tfs"],
            arrays[f"{f.value}.doc_lens"],
        )
    forward = tuple(arrays[f"forward.{n}"] for n in ("offsets", "term_ids", "tfs"))
    return InvertedIndex(header["doc_ids"], config, facets, forward)


def save_index(index, path):
    atomic_write_bytes(path, to_bytes(index))


def load_index(path):
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
