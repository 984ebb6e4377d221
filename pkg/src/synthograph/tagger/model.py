"""Local/transition scoring and exact linear-chain inference.

`chain_*` and `viterbi_path` operate on plain score arrays; the model-level
wrappers add feature extraction, the factorization-kind contract and the
hard BILOU transition constraints used at decode time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import logsumexp

from .features import FeatureVectorizer, SentenceFeatures, extract_features
from .labels import LabelAlphabet, bilou_decode

if TYPE_CHECKING:
    from ..corpus import EmbeddingTable, EntityMention, LexiconSet, Sentence

KIND_INDEPENDENT = "independent"
KIND_CRF = "crf"
NEG_INF = -np.inf


@dataclass
class TaggerModel:
    alphabet: LabelAlphabet
    vectorizer: FeatureVectorizer
    kind: str
    local_weights: np.ndarray  # (n_tags, n_features)
    dense_weights: np.ndarray  # (n_tags, emb_dim)
    transitions: np.ndarray  # (n_tags, n_tags); unused for kind=independent
    training_trace: list[float] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in (KIND_INDEPENDENT, KIND_CRF):
            raise ValueError(f"unknown factorization kind {self.kind!r}")
        d = len(self.alphabet)
        if self.local_weights.shape != (d, self.vectorizer.n_features):
            raise ValueError("local weight shape mismatch")
        if self.dense_weights.shape != (d, self.vectorizer.emb_dim):
            raise ValueError("dense weight shape mismatch")
        if self.transitions.shape != (d, d):
            raise ValueError("transition matrix shape mismatch")
        for name, arr in (
            ("local", self.local_weights),
            ("dense", self.dense_weights),
            ("transition", self.transitions),
        ):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} weights contain non-finite values")

    def _require_kind(self, kind: str, op: str) -> None:
        if self.kind != kind:
            raise ValueError(f"{op} requires a {kind} model, got {self.kind}")


def sentence_local_scores(model: TaggerModel, feats: SentenceFeatures) -> np.ndarray:
    """Per-token tag scores: summed sparse-feature weights plus the dense block."""
    n = len(feats)
    scores = np.zeros((n, len(model.alphabet)))
    for t, names in enumerate(feats.names):
        ids = model.vectorizer.transform_names(names)
        if ids.size:
            scores[t] = model.local_weights[:, ids].sum(axis=1)
    if model.vectorizer.emb_dim and n:
        scores += feats.dense @ model.dense_weights.T
    return scores


def chain_score(local: np.ndarray, trans: np.ndarray, tags: np.ndarray) -> float:
    """Unnormalized score of one tag sequence."""
    tags = np.asarray(tags, dtype=int)
    if tags.size == 0:
        return 0.0
    total = float(local[np.arange(len(tags)), tags].sum())
    if len(tags) > 1:
        total += float(trans[tags[:-1], tags[1:]].sum())
    return total


def chain_log_partition(local: np.ndarray, trans: np.ndarray) -> float:
    """Forward algorithm in the log domain."""
    t_len = local.shape[0]
    if t_len == 0:
        return 0.0
    alpha = local[0].astype(float)
    for t in range(1, t_len):
        alpha = local[t] + logsumexp(alpha[:, None] + trans, axis=0)
    return float(logsumexp(alpha))


def chain_log_partition_backward(local: np.ndarray, trans: np.ndarray) -> float:
    """Backward-pass computation of the same quantity, for cross-checks."""
    t_len = local.shape[0]
    if t_len == 0:
        return 0.0
    beta = np.zeros(local.shape[1])
    for t in range(t_len - 2, -1, -1):
        beta = logsumexp(trans + (local[t + 1] + beta)[None, :], axis=1)
    return float(logsumexp(local[0] + beta))


def chain_marginals(
    local: np.ndarray, trans: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-position tag marginals, per-step transition marginals, and log Z."""
    t_len, n_tags = local.shape
    if t_len == 0:
        return np.zeros((0, n_tags)), np.zeros((0, n_tags, n_tags)), 0.0
    alpha = np.empty((t_len, n_tags))
    alpha[0] = local[0]
    for t in range(1, t_len):
        alpha[t] = local[t] + logsumexp(alpha[t - 1][:, None] + trans, axis=0)
    beta = np.zeros((t_len, n_tags))
    for t in range(t_len - 2, -1, -1):
        beta[t] = logsumexp(trans + (local[t + 1] + beta[t + 1])[None, :], axis=1)
    log_z = float(logsumexp(alpha[-1]))
    node = np.exp(alpha + beta - log_z)
    edge = np.empty((t_len - 1, n_tags, n_tags))
    for t in range(1, t_len):
        edge[t - 1] = np.exp(
            alpha[t - 1][:, None] + trans + (local[t] + beta[t])[None, :] - log_z
        )
    return node, edge, log_z


def viterbi_path(
    local: np.ndarray,
    trans: np.ndarray,
    start_mask: np.ndarray | None = None,
    trans_mask: np.ndarray | None = None,
    end_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    """Exact argmax tag sequence and its score.

    Ties are broken toward the lower tag id at the latest differing
    position (argmax scans pick the first maximum, and the path is
    reconstructed from the end). Masks mark allowed starts, transitions
    and ends; disallowed entries score -inf.
    """
    t_len, n_tags = local.shape
    if t_len == 0:
        return np.zeros(0, dtype=int), 0.0
    scored_trans = np.where(trans_mask, trans, NEG_INF) if trans_mask is not None else trans
    delta = local[0].astype(float).copy()
    if start_mask is not None:
        delta = np.where(start_mask, delta, NEG_INF)
    back = np.zeros((t_len, n_tags), dtype=int)
    for t in range(1, t_len):
        cand = delta[:, None] + scored_trans
        back[t] = np.argmax(cand, axis=0)
        delta = local[t] + np.take_along_axis(cand, back[t][None, :], axis=0)[0]
    if end_mask is not None:
        delta = np.where(end_mask, delta, NEG_INF)
    best_last = int(np.argmax(delta))
    score = float(delta[best_last])
    if not np.isfinite(score):
        raise ValueError("no sequence satisfies the decoding constraints")
    tags = np.empty(t_len, dtype=int)
    tags[-1] = best_last
    for t in range(t_len - 1, 0, -1):
        tags[t - 1] = back[t, tags[t]]
    return tags, score


def predict_independent(model: TaggerModel, feats: SentenceFeatures) -> np.ndarray:
    """Per-token argmax of local scores; ties go to the lowest tag id."""
    model._require_kind(KIND_INDEPENDENT, "predict_independent")
    scores = sentence_local_scores(model, feats)
    return np.argmax(scores, axis=1)


def log_partition(model: TaggerModel, feats: SentenceFeatures) -> float:
    model._require_kind(KIND_CRF, "log_partition")
    return chain_log_partition(sentence_local_scores(model, feats), model.transitions)


def viterbi_decode(
    model: TaggerModel, feats: SentenceFeatures, constrained: bool = True
) -> np.ndarray:
    """Exact decoding; BILOU-violating transitions are hard-forbidden."""
    model._require_kind(KIND_CRF, "viterbi_decode")
    local = sentence_local_scores(model, feats)
    if constrained:
        tags, _ = viterbi_path(
            local,
            model.transitions,
            start_mask=model.alphabet.start_mask,
            trans_mask=model.alphabet.transition_mask,
            end_mask=model.alphabet.end_mask,
        )
    else:
        tags, _ = viterbi_path(local, model.transitions)
    return tags


def tag_mentions(
    model: TaggerModel, sentence: "Sentence", lex: "LexiconSet", emb: "EmbeddingTable"
) -> list["EntityMention"]:
    """Feature extraction, decoding per model kind, then BILOU decoding."""
    if not sentence.tokens:
        return []
    feats = extract_features(sentence, lex, emb)
    if model.kind == KIND_CRF:
        tags = viterbi_decode(model, feats)
    else:
        tags = predict_independent(model, feats)
    return bilou_decode(tags, model.alphabet, sent_id=sentence.sent_id)
