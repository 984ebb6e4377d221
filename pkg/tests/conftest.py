from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from synthograph import load_corpus, load_embeddings, load_lexicons
from synthograph.corpus import EmbeddingTable, LexiconSet, Sentence, Token

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def sample_corpus():
    return load_corpus(DATA_DIR / "sample_corpus.jsonl")


@pytest.fixture(scope="session")
def sample_embeddings():
    return load_embeddings(DATA_DIR / "embeddings.txt")


@pytest.fixture(scope="session")
def sample_lexicons():
    return load_lexicons(DATA_DIR / "lexicons")


@pytest.fixture
def empty_lexicons():
    return LexiconSet.empty()


def make_sentence(rows, sent_id=0) -> Sentence:
    """rows: (surface, pos, lemma, dep_head, dep_label) tuples."""
    tokens = [Token(surface=s, pos=p, lemma=l, dep_head=h, dep_label=d) for s, p, l, h, d in rows]
    return Sentence(sent_id=sent_id, tokens=tokens)


def flat_sentence(surfaces, sent_id=0) -> Sentence:
    """Minimal parse: first token is the root, everything hangs off it."""
    rows = [
        (s, "X", s.lower(), -1 if i == 0 else 0, "root" if i == 0 else "dep")
        for i, s in enumerate(surfaces)
    ]
    return make_sentence(rows, sent_id=sent_id)


def toy_embeddings(words, dim=4, seed=7) -> EmbeddingTable:
    rng = np.random.default_rng(seed)
    entries = {w: rng.normal(size=dim) for w in words}
    unknown = (
        np.mean(list(entries.values()), axis=0) if entries else np.zeros(dim)
    )
    return EmbeddingTable(dimension=dim, entries=entries, unknown=unknown)
