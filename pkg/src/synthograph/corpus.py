"""On-disk document, embedding and lexicon formats plus global token indexing.

Documents arrive pre-tokenized and pre-parsed as line-delimited JSON: one
document object per line with `doc_id`, `paragraphs` (paragraph -> sentence
-> token records), and optional `gold_mentions`, `gold_graph` and
`synthesis_labels`. A loaded corpus is immutable and safe to share across
threads.
"""

from __future__ import annotations

import json
import re
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import graph as graph_mod

ROOT_HEAD = -1

ENTITY_LABELS = (
    "target",
    "material",
    "descriptor",
    "amt_unit",
    "cnd_misc",
    "cnd_unit",
    "intermed",
    "operation",
    "number",
    "amt_misc",
    "prop_unit",
    "prop_type",
    "prop_misc",
    "synth_aprt",
    "char_aprt",
    "brand",
    "meta",
    "ref",
)

TOKEN_FIELDS = ("surface", "pos", "lemma", "dep_head", "dep_label")


class CorpusFormatError(Exception):
    """A malformed record in a corpus, embedding or lexicon file."""

    def __init__(self, message: str, *, line: int | None = None, fieldname: str | None = None):
        self.line = line
        self.fieldname = fieldname
        where = []
        if line is not None:
            where.append(f"line {line}")
        if fieldname is not None:
            where.append(f"field {fieldname}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class CorpusValidationError(Exception):
    """A structurally invalid document."""

    def __init__(self, message: str, *, doc_id: str | None = None, sent_id: int | None = None):
        self.doc_id = doc_id
        self.sent_id = sent_id
        where = []
        if doc_id is not None:
            where.append(f"document {doc_id}")
        if sent_id is not None:
            where.append(f"sentence {sent_id}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str
    lemma: str
    dep_head: int
    dep_label: str

    @property
    def is_root(self) -> bool:
        return self.dep_head == ROOT_HEAD


@dataclass
class Sentence:
    sent_id: int
    tokens: list[Token]

    def __len__(self) -> int:
        return len(self.tokens)

    def root_index(self) -> int:
        for i, t in enumerate(self.tokens):
            if t.is_root:
                return i
        raise CorpusValidationError("sentence has no root token", sent_id=self.sent_id)

    def children(self, index: int) -> list[int]:
        return [i for i, t in enumerate(self.tokens) if t.dep_head == index]

    def depth(self, index: int) -> int:
        """Arc distance from the token up to the sentence root."""
        d = 0
        i = index
        while not self.tokens[i].is_root:
            i = self.tokens[i].dep_head
            d += 1
            if d > len(self.tokens):
                raise CorpusValidationError("dependency cycle", sent_id=self.sent_id)
        return d

    def subtree(self, index: int) -> set[int]:
        """Token indices of the full dependency subtree rooted at `index`."""
        out = {index}
        stack = [index]
        while stack:
            for c in self.children(stack.pop()):
                if c not in out:
                    out.add(c)
                    stack.append(c)
        return out

    def validate(self, doc_id: str = "?") -> None:
        n = len(self.tokens)
        roots = [i for i, t in enumerate(self.tokens) if t.is_root]
        if len(roots) != 1:
            raise CorpusValidationError(
                f"expected exactly one root token, found {len(roots)}",
                doc_id=doc_id,
                sent_id=self.sent_id,
            )
        for i, t in enumerate(self.tokens):
            if not t.surface:
                raise CorpusValidationError(
                    f"token {i} has empty surface", doc_id=doc_id, sent_id=self.sent_id
                )
            if not t.is_root and not 0 <= t.dep_head < n:
                raise CorpusValidationError(
                    f"token {i} head {t.dep_head} out of range", doc_id=doc_id, sent_id=self.sent_id
                )
            if t.dep_head == i:
                raise CorpusValidationError(
                    f"token {i} is its own head", doc_id=doc_id, sent_id=self.sent_id
                )
        # One root plus per-token head implies a tree iff every token reaches the root.
        if len(self.subtree(roots[0])) != n:
            raise CorpusValidationError(
                "dependency arcs do not form a tree", doc_id=doc_id, sent_id=self.sent_id
            )


@dataclass(frozen=True)
class EntityMention:
    sent_id: int
    start: int
    end: int
    label: str


@dataclass
class Document:
    doc_id: str
    paragraphs: list[list[Sentence]]
    gold_mentions: list[EntityMention] | None = None
    gold_graph: graph_mod.ActionGraph | None = None
    synthesis_labels: list[bool] | None = None

    @property
    def sentences(self) -> list[Sentence]:
        return [s for para in self.paragraphs for s in para]

    def sentence(self, sent_id: int) -> Sentence:
        return self.sentences[sent_id]

    def validate(self) -> None:
        sentences = self.sentences
        for i, sent in enumerate(sentences):
            if sent.sent_id != i:
                raise CorpusValidationError(
                    f"sentence ids not contiguous (found {sent.sent_id} at {i})", doc_id=self.doc_id
                )
            sent.validate(self.doc_id)
        if self.gold_mentions is not None:
            for m in self.gold_mentions:
                if not 0 <= m.sent_id < len(sentences):
                    raise CorpusValidationError(
                        f"mention sent_id {m.sent_id} out of range", doc_id=self.doc_id
                    )
                if not 0 <= m.start < m.end <= len(sentences[m.sent_id].tokens):
                    raise CorpusValidationError(
                        f"mention span ({m.start},{m.end}) outside sentence",
                        doc_id=self.doc_id,
                        sent_id=m.sent_id,
                    )
                if m.label not in ENTITY_LABELS:
                    raise CorpusValidationError(
                        f"unknown entity label {m.label!r}", doc_id=self.doc_id, sent_id=m.sent_id
                    )
        if self.synthesis_labels is not None and len(self.synthesis_labels) != len(self.paragraphs):
            raise CorpusValidationError(
                f"{len(self.synthesis_labels)} synthesis labels for "
                f"{len(self.paragraphs)} paragraphs",
                doc_id=self.doc_id,
            )
        if self.gold_graph is not None:
            try:
                graph_mod.validate_graph(self.gold_graph, self)
            except graph_mod.GraphValidationError as e:
                raise CorpusValidationError(f"gold graph invalid: {e}", doc_id=self.doc_id) from e


class TokenIndex:
    """Bijection between (sent_id, offset) pairs and document-global indices."""

    def __init__(self, doc: Document):
        self._starts: list[int] = []
        total = 0
        for sent in doc.sentences:
            self._starts.append(total)
            total += len(sent.tokens)
        self.n_tokens = total

    def to_global(self, sent_id: int, offset: int) -> int:
        start = self._starts[sent_id]
        limit = self._starts[sent_id + 1] if sent_id + 1 < len(self._starts) else self.n_tokens
        if not 0 <= start + offset < limit:
            raise IndexError(f"offset {offset} outside sentence {sent_id}")
        return start + offset

    def to_local(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.n_tokens:
            raise IndexError(f"global token index {index} out of range")
        sent_id = bisect_right(self._starts, index) - 1
        return sent_id, index - self._starts[sent_id]

    def span_globals(self, sent_id: int, start: int, end: int) -> frozenset[int]:
        return frozenset(self.to_global(sent_id, i) for i in range(start, end))


def global_token_index(doc: Document) -> TokenIndex:
    return TokenIndex(doc)


@dataclass
class EmbeddingTable:
    dimension: int
    entries: dict[str, np.ndarray]
    unknown: np.ndarray

    def lookup(self, surface: str) -> np.ndarray:
        return self.entries.get(surface, self.unknown)

    def __contains__(self, surface: str) -> bool:
        return surface in self.entries


@dataclass
class LexiconSet:
    lexicons: dict[str, frozenset[str]]

    @classmethod
    def empty(cls) -> "LexiconSet":
        return cls(lexicons={})

    @property
    def names(self) -> list[str]:
        return sorted(self.lexicons)

    def member(self, name: str, term: str) -> bool:
        return term.lower() in self.lexicons.get(name, frozenset())


def _require(record, key, line, path):
    if key not in record:
        raise CorpusFormatError("missing field", line=line, fieldname=f"{path}.{key}")
    return record[key]


def _token_from_dict(rec, line, path) -> Token:
    if not isinstance(rec, dict):
        raise CorpusFormatError("token record is not an object", line=line, fieldname=path)
    surface = _require(rec, "surface", line, path)
    pos = _require(rec, "pos", line, path)
    lemma = _require(rec, "lemma", line, path)
    dep_head = _require(rec, "dep_head", line, path)
    dep_label = _require(rec, "dep_label", line, path)
    if not isinstance(dep_head, int) or isinstance(dep_head, bool):
        raise CorpusFormatError("dep_head must be an integer", line=line, fieldname=f"{path}.dep_head")
    for name, value in (("surface", surface), ("pos", pos), ("lemma", lemma), ("dep_label", dep_label)):
        if not isinstance(value, str):
            raise CorpusFormatError(f"{name} must be a string", line=line, fieldname=f"{path}.{name}")
    return Token(surface=surface, pos=pos, lemma=lemma, dep_head=dep_head, dep_label=dep_label)


def document_from_dict(data: dict, line: int | None = None) -> Document:
    if not isinstance(data, dict):
        raise CorpusFormatError("document record is not an object", line=line)
    doc_id = _require(data, "doc_id", line, "$")
    raw_paragraphs = _require(data, "paragraphs", line, "$")
    if not isinstance(raw_paragraphs, list):
        raise CorpusFormatError("paragraphs must be a list", line=line, fieldname="paragraphs")
    paragraphs: list[list[Sentence]] = []
    sent_id = 0
    for p, para in enumerate(raw_paragraphs):
        if not isinstance(para, list):
            raise CorpusFormatError(
                "paragraph must be a list of sentences", line=line, fieldname=f"paragraphs[{p}]"
            )
        sentences = []
        for s, sent in enumerate(para):
            if not isinstance(sent, list):
                raise CorpusFormatError(
                    "sentence must be a list of tokens", line=line, fieldname=f"paragraphs[{p}][{s}]"
                )
            tokens = [
                _token_from_dict(tok, line, f"paragraphs[{p}][{s}][{t}]")
                for t, tok in enumerate(sent)
            ]
            sentences.append(Sentence(sent_id=sent_id, tokens=tokens))
            sent_id += 1
        paragraphs.append(sentences)
    gold_mentions = None
    if data.get("gold_mentions") is not None:
        gold_mentions = []
        for i, m in enumerate(data["gold_mentions"]):
            path = f"gold_mentions[{i}]"
            gold_mentions.append(
                EntityMention(
                    sent_id=_require(m, "sent_id", line, path),
                    start=_require(m, "start", line, path),
                    end=_require(m, "end", line, path),
                    label=_require(m, "label", line, path),
                )
            )
    gold_graph = None
    if data.get("gold_graph") is not None:
        try:
            gold_graph = graph_mod.ActionGraph.from_dict(data["gold_graph"])
        except (KeyError, TypeError, ValueError, graph_mod.GraphValidationError) as e:
            raise CorpusFormatError(f"bad gold_graph: {e}", line=line, fieldname="gold_graph") from e
    synthesis_labels = None
    if data.get("synthesis_labels") is not None:
        synthesis_labels = [bool(x) for x in data["synthesis_labels"]]
    doc = Document(
        doc_id=doc_id,
        paragraphs=paragraphs,
        gold_mentions=gold_mentions,
        gold_graph=gold_graph,
        synthesis_labels=synthesis_labels,
    )
    doc.validate()
    return doc


def document_to_dict(doc: Document) -> dict:
    out: dict = {
        "doc_id": doc.doc_id,
        "paragraphs": [
            [
                [
                    {
                        "surface": t.surface,
                        "pos": t.pos,
                        "lemma": t.lemma,
                        "dep_head": t.dep_head,
                        "dep_label": t.dep_label,
                    }
                    for t in sent.tokens
                ]
                for sent in para
            ]
            for para in doc.paragraphs
        ],
    }
    if doc.gold_mentions is not None:
        out["gold_mentions"] = [
            {"sent_id": m.sent_id, "start": m.start, "end": m.end, "label": m.label}
            for m in doc.gold_mentions
        ]
    if doc.gold_graph is not None:
        out["gold_graph"] = doc.gold_graph.to_dict()
    if doc.synthesis_labels is not None:
        out["synthesis_labels"] = doc.synthesis_labels
    return out


def load_corpus(path) -> list[Document]:
    """Read a line-delimited corpus file, validating every document."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                data = json.loads(raw)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"invalid JSON: {e.msg}", line=line_no) from e
            docs.append(document_from_dict(data, line=line_no))
    return docs


def write_corpus(docs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(document_to_dict(doc), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def load_embeddings(path) -> EmbeddingTable:
    """Read a plain-text embedding file: `word v1 v2 ... vD` per line."""
    entries: dict[str, np.ndarray] = {}
    total = None
    count = 0
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            parts = raw.split()
            if len(parts) < 2:
                raise CorpusFormatError("expected a word and at least one value", line=line_no)
            word, values = parts[0], parts[1:]
            if dimension is None:
                dimension = len(values)
                total = np.zeros(dimension)
            elif len(values) != dimension:
                raise CorpusFormatError(
                    f"dimension {len(values)} differs from {dimension}", line=line_no
                )
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as e:
                raise CorpusFormatError(f"non-numeric value: {e}", line=line_no) from e
            entries[word] = vec
            total += vec
            count += 1
    if dimension is None:
        raise CorpusFormatError("embedding file is empty, dimension undefined")
    return EmbeddingTable(dimension=dimension, entries=entries, unknown=total / count)


def load_lexicons(path) -> LexiconSet:
    """Read a directory of one-term-per-line files; file stem names the lexicon."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"lexicon directory not found: {root}")
    lexicons: dict[str, frozenset[str]] = {}
    for entry in sorted(root.iterdir()):
        if not entry.is_file() or entry.name.startswith("."):
            continue
        terms = set()
        with open(entry, encoding="utf-8") as fh:
            for raw in fh:
                term = raw.strip().lower()
                if term:
                    terms.add(term)
        lexicons[entry.stem] = frozenset(terms)
    return LexiconSet(lexicons=lexicons)


_TOKEN_RE = re.compile(r"\w+(?:[\w\-./]*\w)?|[^\w\s]", re.UNICODE)
_SENT_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


def tokenize_text(text: str) -> list[str]:
    """Fallback whitespace-plus-punctuation tokenizer for raw-text ingestion."""
    return _TOKEN_RE.findall(text)


def document_from_text(doc_id: str, paragraphs: list[str]) -> Document:
    """Build a minimally annotated Document from raw paragraph strings.

    Tokens get placeholder tags and a flat dependency tree; gold-annotated
    evaluation requires the pre-parsed format instead.
    """
    out: list[list[Sentence]] = []
    sent_id = 0
    for text in paragraphs:
        sentences = []
        for chunk in _SENT_SPLIT_RE.split(text.strip()):
            surfaces = tokenize_text(chunk)
            if not surfaces:
                continue
            tokens = [
                Token(
                    surface=s,
                    pos="X",
                    lemma=s.lower(),
                    dep_head=ROOT_HEAD if i == 0 else 0,
                    dep_label="root" if i == 0 else "dep",
                )
                for i, s in enumerate(surfaces)
            ]
            sentences.append(Sentence(sent_id=sent_id, tokens=tokens))
            sent_id += 1
        out.append(sentences)
    doc = Document(doc_id=doc_id, paragraphs=out)
    doc.validate()
    return doc
