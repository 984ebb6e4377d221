"""Training for the independent (per-token maxent) and CRF factorizations.

Both trainers minimize the mean L2-regularized negative log-likelihood with
the shared deterministic batch optimizer. The CRF gradient is computed as
empirical-minus-expected feature counts via the forward-backward algorithm,
with sentences batched by length for speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from ..optim import minimize_batch_gd
from .features import FeatureVectorizer, extract_features
from .labels import LabelAlphabet, bilou_encode
from .model import KIND_CRF, KIND_INDEPENDENT, TaggerModel

if TYPE_CHECKING:
    from ..corpus import EmbeddingTable, EntityMention, LexiconSet, Sentence


@dataclass
class TrainConfig:
    reg_lambda: float = 0.1
    max_iters: int = 200
    rel_tol: float = 1e-6


@dataclass
class PackedDataset:
    """Training corpus flattened to matrices over all tokens."""

    feats: sp.csr_matrix  # (n_tokens, n_features) binary
    dense: np.ndarray  # (n_tokens, emb_dim)
    bounds: np.ndarray  # (n_sentences + 1,) token offsets
    tags: np.ndarray  # (n_tokens,) gold tag ids
    n_tags: int

    @property
    def n_tokens(self) -> int:
        return int(self.bounds[-1])

    @property
    def n_sentences(self) -> int:
        return len(self.bounds) - 1

    def sentence_slices(self) -> list[slice]:
        return [slice(int(a), int(b)) for a, b in zip(self.bounds[:-1], self.bounds[1:])]


def _as_tags(
    gold, length: int, alphabet: LabelAlphabet
) -> np.ndarray:
    """Accept either a mention list or a precomputed tag-id sequence."""
    if isinstance(gold, np.ndarray) or (
        isinstance(gold, (list, tuple)) and gold and isinstance(gold[0], (int, np.integer))
    ):
        tags = np.asarray(gold, dtype=int)
        if len(tags) != length:
            raise ValueError(f"tag sequence length {len(tags)} != sentence length {length}")
        return tags
    return bilou_encode(gold, length, alphabet)


def pack_dataset(
    tagged: Sequence[tuple["Sentence", object]],
    lex: "LexiconSet",
    emb: "EmbeddingTable",
    alphabet: LabelAlphabet,
    vectorizer: FeatureVectorizer | None = None,
) -> tuple[PackedDataset, FeatureVectorizer]:
    featurized = [extract_features(sent, lex, emb) for sent, _ in tagged]
    if vectorizer is None:
        vectorizer = FeatureVectorizer.fit(featurized, emb_dim=emb.dimension)
    rows, cols = [], []
    dense_blocks = []
    tag_blocks = []
    bounds = [0]
    offset = 0
    for (sent, gold), sf in zip(tagged, featurized):
        tag_blocks.append(_as_tags(gold, len(sf), alphabet))
        dense_blocks.append(sf.dense)
        for t, names in enumerate(sf.names):
            for fid in vectorizer.transform_names(names):
                rows.append(offset + t)
                cols.append(int(fid))
        offset += len(sf)
        bounds.append(offset)
    feats = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(offset, vectorizer.n_features)
    )
    dense = np.vstack(dense_blocks) if dense_blocks else np.zeros((0, emb.dimension))
    tags = np.concatenate(tag_blocks) if tag_blocks else np.zeros(0, dtype=int)
    packed = PackedDataset(
        feats=feats, dense=dense, bounds=np.array(bounds), tags=tags, n_tags=len(alphabet)
    )
    return packed, vectorizer


def _split_params(x: np.ndarray, n_tags: int, n_feats: int, emb_dim: int, with_trans: bool):
    w_end = n_tags * n_feats
    e_end = w_end + n_tags * emb_dim
    w = x[:w_end].reshape(n_tags, n_feats)
    e = x[w_end:e_end].reshape(n_tags, emb_dim)
    a = x[e_end:].reshape(n_tags, n_tags) if with_trans else None
    return w, e, a


def _all_local_scores(packed: PackedDataset, w: np.ndarray, e: np.ndarray) -> np.ndarray:
    scores = packed.feats @ w.T
    if packed.dense.shape[1]:
        scores = scores + packed.dense @ e.T
    return np.asarray(scores)


def maxent_objective(
    x: np.ndarray, packed: PackedDataset, reg_lambda: float
) -> tuple[float, np.ndarray]:
    """Mean per-token softmax NLL plus (lambda/2)||theta||^2, with gradient."""
    d = packed.n_tags
    w, e, _ = _split_params(x, d, packed.feats.shape[1], packed.dense.shape[1], with_trans=False)
    scores = _all_local_scores(packed, w, e)
    n = packed.n_tokens
    log_norm = logsumexp(scores, axis=1)
    gold = scores[np.arange(n), packed.tags]
    nll = float(np.sum(log_norm - gold)) / n
    probs = np.exp(scores - log_norm[:, None])
    probs[np.arange(n), packed.tags] -= 1.0
    probs /= n
    grad_w = np.asarray((packed.feats.T @ probs).T) + reg_lambda * w
    grad_e = probs.T @ packed.dense + reg_lambda * e
    obj = nll + 0.5 * reg_lambda * (float(np.sum(w * w)) + float(np.sum(e * e)))
    return obj, np.concatenate([grad_w.ravel(), grad_e.ravel()])


def _length_groups(packed: PackedDataset) -> dict[int, list[int]]:
    groups: dict[int, list[int]] = {}
    for i, (a, b) in enumerate(zip(packed.bounds[:-1], packed.bounds[1:])):
        groups.setdefault(int(b - a), []).append(i)
    return groups


def crf_objective(
    x: np.ndarray, packed: PackedDataset, reg_lambda: float
) -> tuple[float, np.ndarray]:
    """Mean per-sentence conditional NLL plus L2, gradient via forward-backward."""
    d = packed.n_tags
    n_feats = packed.feats.shape[1]
    emb_dim = packed.dense.shape[1]
    w, e, a = _split_params(x, d, n_feats, emb_dim, with_trans=True)
    scores = _all_local_scores(packed, w, e)
    n_sents = packed.n_sentences
    bounds = packed.bounds
    nll = 0.0
    delta = np.zeros_like(scores)  # d(nll)/d(local scores), summed then scaled
    grad_a = np.zeros((d, d))
    for length, sent_ids in sorted(_length_groups(packed).items()):
        if length == 0:
            continue
        idx = np.stack([np.arange(bounds[i], bounds[i + 1]) for i in sent_ids])
        local = scores[idx]  # (batch, length, d)
        tags = packed.tags[idx]  # (batch, length)
        batch = len(sent_ids)
        alpha = np.empty((batch, length, d))
        alpha[:, 0] = local[:, 0]
        for t in range(1, length):
            alpha[:, t] = local[:, t] + logsumexp(alpha[:, t - 1][:, :, None] + a[None], axis=1)
        log_z = logsumexp(alpha[:, -1], axis=1)
        beta = np.zeros((batch, length, d))
        for t in range(length - 2, -1, -1):
            beta[:, t] = logsumexp(a[None] + (local[:, t + 1] + beta[:, t + 1])[:, None, :], axis=2)
        gold_local = np.take_along_axis(local, tags[:, :, None], axis=2)[:, :, 0].sum(axis=1)
        gold_trans = a[tags[:, :-1], tags[:, 1:]].sum(axis=1) if length > 1 else 0.0
        nll += float(np.sum(log_z - gold_local - gold_trans))
        marg = np.exp(alpha + beta - log_z[:, None, None])
        np.subtract.at(marg, (np.arange(batch)[:, None], np.arange(length)[None, :], tags), 1.0)
        delta[idx.ravel()] += marg.reshape(-1, d)
        for t in range(1, length):
            edge = np.exp(
                alpha[:, t - 1][:, :, None]
                + a[None]
                + (local[:, t] + beta[:, t])[:, None, :]
                - log_z[:, None, None]
            )
            grad_a += edge.sum(axis=0)
            np.add.at(grad_a, (tags[:, t - 1], tags[:, t]), -1.0)
    nll /= n_sents
    delta /= n_sents
    grad_a /= n_sents
    grad_w = np.asarray((packed.feats.T @ delta).T) + reg_lambda * w
    grad_e = delta.T @ packed.dense + reg_lambda * e
    grad_a += reg_lambda * a
    obj = nll + 0.5 * reg_lambda * (
        float(np.sum(w * w)) + float(np.sum(e * e)) + float(np.sum(a * a))
    )
    return obj, np.concatenate([grad_w.ravel(), grad_e.ravel(), grad_a.ravel()])


def _prepare(
    tagged: Sequence[tuple["Sentence", object]],
    lex: "LexiconSet",
    emb: "EmbeddingTable",
    alphabet: LabelAlphabet | None,
) -> tuple[PackedDataset, FeatureVectorizer, LabelAlphabet]:
    if not tagged:
        raise ValueError("no training sentences")
    alphabet = alphabet or LabelAlphabet()
    packed, vectorizer = pack_dataset(tagged, lex, emb, alphabet)
    return packed, vectorizer, alphabet


def train_maxent(
    tagged: Sequence[tuple["Sentence", object]],
    lex: "LexiconSet",
    emb: "EmbeddingTable",
    config: TrainConfig | None = None,
    alphabet: LabelAlphabet | None = None,
) -> TaggerModel:
    """Fit the conditionally-independent factorization."""
    config = config or TrainConfig()
    packed, vectorizer, alphabet = _prepare(tagged, lex, emb, alphabet)
    d = len(alphabet)
    x0 = np.zeros(d * vectorizer.n_features + d * vectorizer.emb_dim)
    result = minimize_batch_gd(
        lambda x: maxent_objective(x, packed, config.reg_lambda),
        x0,
        max_iters=config.max_iters,
        rel_tol=config.rel_tol,
    )
    w, e, _ = _split_params(result.x, d, vectorizer.n_features, vectorizer.emb_dim, False)
    return TaggerModel(
        alphabet=alphabet,
        vectorizer=vectorizer,
        kind=KIND_INDEPENDENT,
        local_weights=w.copy(),
        dense_weights=e.copy(),
        transitions=np.zeros((d, d)),
        training_trace=result.trace,
    )


def train_crf(
    tagged: Sequence[tuple["Sentence", object]],
    lex: "LexiconSet",
    emb: "EmbeddingTable",
    config: TrainConfig | None = None,
    alphabet: LabelAlphabet | None = None,
) -> TaggerModel:
    """Fit the linear-chain CRF factorization."""
    config = config or TrainConfig()
    packed, vectorizer, alphabet = _prepare(tagged, lex, emb, alphabet)
    for i, sl in enumerate(packed.sentence_slices()):
        if not alphabet.is_wellformed(packed.tags[sl]):
            sent = tagged[i][0]
            raise ValueError(
                f"gold tag sequence for sentence {getattr(sent, 'sent_id', i)} "
                "is not BILOU-well-formed"
            )
    d = len(alphabet)
    x0 = np.zeros(d * vectorizer.n_features + d * vectorizer.emb_dim + d * d)
    result = minimize_batch_gd(
        lambda x: crf_objective(x, packed, config.reg_lambda),
        x0,
        max_iters=config.max_iters,
        rel_tol=config.rel_tol,
    )
    w, e, a = _split_params(result.x, d, vectorizer.n_features, vectorizer.emb_dim, True)
    return TaggerModel(
        alphabet=alphabet,
        vectorizer=vectorizer,
        kind=KIND_CRF,
        local_weights=w.copy(),
        dense_weights=e.copy(),
        transitions=a.copy(),
        training_trace=result.trace,
    )
