"""Synthesis-paragraph screening.

A paragraph is represented by the mean of its token embeddings plus four
binary cues (operations-lexicon hit, digit, temperature unit, length), and
classified with L2-regularized logistic regression.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .optim import minimize_batch_gd

if TYPE_CHECKING:
    from .corpus import Document, EmbeddingTable, LexiconSet, Sentence

N_BINARY_FEATURES = 4
LONG_PARAGRAPH_TOKENS = 40
TEMPERATURE_TOKENS = frozenset({"°c", "℃", "°f", "°", "k", "kelvin", "celsius", "degc"})
OPERATIONS_LEXICON = "operations"
SCHEMA_VERSION = 1


@dataclass
class ScreenerModel:
    weights: np.ndarray  # (emb_dim + N_BINARY_FEATURES,)
    bias: float
    schema_version: int = SCHEMA_VERSION
    training_trace: list[float] | None = field(default=None, compare=False)

    def predict_proba(self, features: np.ndarray) -> float:
        if features.shape != self.weights.shape:
            raise ValueError(
                f"feature length {features.shape} does not match model {self.weights.shape}"
            )
        z = float(self.weights @ features) + self.bias
        return 1.0 / (1.0 + np.exp(-z))


def featurize_paragraph(
    paragraph: Sequence["Sentence"], emb: "EmbeddingTable", lex: "LexiconSet"
) -> np.ndarray:
    """Mean token embedding concatenated with the four binary cues."""
    tokens = [t for sent in paragraph for t in sent.tokens]
    if not tokens:
        raise ValueError("cannot featurize an empty paragraph")
    mean = np.mean([emb.lookup(t.surface) for t in tokens], axis=0)
    has_operation = any(lex.member(OPERATIONS_LEXICON, t.surface) for t in tokens)
    has_digit = any(c.isdigit() for t in tokens for c in t.surface)
    has_temperature = any(t.surface.lower() in TEMPERATURE_TOKENS for t in tokens)
    is_long = len(tokens) > LONG_PARAGRAPH_TOKENS
    bits = np.array([has_operation, has_digit, has_temperature, is_long], dtype=float)
    return np.concatenate([mean, bits])


def train_screener(
    examples: Sequence[tuple[np.ndarray, bool]],
    *,
    reg_lambda: float = 0.1,
    max_iters: int = 500,
    rel_tol: float = 1e-8,
) -> ScreenerModel:
    """Fit logistic regression by deterministic full-batch descent.

    The data term is the mean logistic loss, so duplicating the dataset
    leaves the optimum unchanged; the bias is unregularized.
    """
    if not examples:
        raise ValueError("no training examples")
    labels = {bool(y) for _, y in examples}
    if len(labels) < 2:
        raise ValueError("training data contains a single class")
    x = np.stack([np.asarray(f, dtype=float) for f, _ in examples])
    y = np.array([1.0 if lab else -1.0 for _, lab in examples])
    n, dim = x.shape

    def objective(params: np.ndarray) -> tuple[float, np.ndarray]:
        w, b = params[:-1], params[-1]
        margins = y * (x @ w + b)
        # log(1 + exp(-m)) evaluated stably
        loss = float(np.mean(np.logaddexp(0.0, -margins)))
        sig = 1.0 / (1.0 + np.exp(margins))
        coeff = -y * sig / n
        grad_w = x.T @ coeff + reg_lambda * w
        grad_b = float(np.sum(coeff))
        obj = loss + 0.5 * reg_lambda * float(w @ w)
        return obj, np.concatenate([grad_w, [grad_b]])

    result = minimize_batch_gd(
        objective, np.zeros(dim + 1), max_iters=max_iters, rel_tol=rel_tol
    )
    return ScreenerModel(
        weights=result.x[:-1].copy(), bias=float(result.x[-1]), training_trace=result.trace
    )


def select_synthesis_paragraphs(
    doc: "Document", model: ScreenerModel, emb: "EmbeddingTable", lex: "LexiconSet"
) -> list[int]:
    """Indices of paragraphs predicted as synthesis text, in document order.

    Downstream stages treat the concatenation of the selected paragraphs as
    one synthesis procedure.
    """
    selected = []
    for i, para in enumerate(doc.paragraphs):
        if not any(sent.tokens for sent in para):
            continue
        if model.predict_proba(featurize_paragraph(para, emb, lex)) >= 0.5:
            selected.append(i)
    return selected
