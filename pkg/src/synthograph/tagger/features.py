"""Per-token feature templates: sparse binary names plus a dense embedding block.

Templates: lowercased surface in a +-2 window, collapsed word shape,
prefixes/suffixes up to length 3, contains-digit, capitalization class,
POS in a +-1 window, dependency label, lemma, and lexicon memberships.
The dense block is the token's pre-trained embedding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:
    from ..corpus import EmbeddingTable, LexiconSet, Sentence

BOS = "<s>"
EOS = "</s>"


def word_shape(surface: str) -> str:
    """Character-class pattern with runs collapsed: U/L/D/P."""
    out = []
    for ch in surface:
        if ch.isupper():
            cls = "U"
        elif ch.islower():
            cls = "L"
        elif ch.isdigit():
            cls = "D"
        else:
            cls = "P"
        if not out or out[-1] != cls:
            out.append(cls)
    return "".join(out)


def capitalization_class(surface: str) -> str:
    alpha = [c for c in surface if c.isalpha()]
    if not alpha:
        return "none"
    if all(c.islower() for c in alpha):
        return "lower"
    if all(c.isupper() for c in alpha):
        return "upper"
    if surface[0].isupper() and all(c.islower() for c in alpha[1:]):
        return "title"
    return "mixed"


def token_feature_names(sentence: "Sentence", lex: "LexiconSet") -> list[list[str]]:
    """Fired feature names per token, in fixed template order."""
    tokens = sentence.tokens
    n = len(tokens)
    surfaces = [t.surface for t in tokens]
    lowered = [s.lower() for s in surfaces]
    out = []
    for i, tok in enumerate(tokens):
        feats = []
        for off in (-2, -1, 0, 1, 2):
            j = i + off
            if j < 0:
                word = BOS
            elif j >= n:
                word = EOS
            else:
                word = lowered[j]
            feats.append(f"w[{off}]={word}")
        feats.append(f"shape={word_shape(tok.surface)}")
        low = lowered[i]
        for k in (1, 2, 3):
            if k <= len(low):
                feats.append(f"pre{k}={low[:k]}")
                feats.append(f"suf{k}={low[-k:]}")
        if any(c.isdigit() for c in tok.surface):
            feats.append("has_digit")
        feats.append(f"cap={capitalization_class(tok.surface)}")
        for off in (-1, 0, 1):
            j = i + off
            if j < 0:
                pos = BOS
            elif j >= n:
                pos = EOS
            else:
                pos = tokens[j].pos
            feats.append(f"pos[{off}]={pos}")
        feats.append(f"dep={tok.dep_label}")
        feats.append(f"lemma={tok.lemma.lower()}")
        for name in lex.names:
            if lex.member(name, tok.surface):
                feats.append(f"lex:{name}")
        out.append(feats)
    return out


@dataclass
class SentenceFeatures:
    names: list[list[str]]
    dense: np.ndarray  # (n_tokens, emb_dim)

    def __len__(self) -> int:
        return len(self.names)


def extract_features(
    sentence: "Sentence", lex: "LexiconSet", emb: "EmbeddingTable"
) -> SentenceFeatures:
    names = token_feature_names(sentence, lex)
    if names:
        dense = np.stack([emb.lookup(t.surface) for t in sentence.tokens])
    else:
        dense = np.zeros((0, emb.dimension))
    return SentenceFeatures(names=names, dense=dense)


class FeatureVectorizer:
    """Frozen feature-name table; unseen names at test time contribute zero."""

    def __init__(self, feature_names: Sequence[str], emb_dim: int):
        self.feature_names = list(feature_names)
        self.emb_dim = emb_dim
        self._index = {name: i for i, name in enumerate(self.feature_names)}

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @classmethod
    def fit(cls, featurized: Iterable[SentenceFeatures], emb_dim: int) -> "FeatureVectorizer":
        """Freeze feature ids from a training pass, lexicographically."""
        seen: set[str] = set()
        for sf in featurized:
            for names in sf.names:
                seen.update(names)
        return cls(feature_names=sorted(seen), emb_dim=emb_dim)

    def transform_names(self, names: Iterable[str]) -> np.ndarray:
        ids = {self._index[n] for n in names if n in self._index}
        return np.fromiter(sorted(ids), dtype=int, count=len(ids))
