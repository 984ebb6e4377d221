"""Versioned on-disk container for trained models.

One JSON envelope for the screener, tagger and origin models: a format tag,
schema version, model type tag, and a payload with float arrays stored as
base64 little-endian 64-bit floats. Loading rejects version and type
mismatches with an error naming expected/found.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from .graph import OriginModel
from .screen import ScreenerModel
from .tagger import FeatureVectorizer, LabelAlphabet, TaggerModel

FORMAT_TAG = "synthograph-model"
FORMAT_VERSION = 1

TYPE_SCREENER = "screener"
TYPE_TAGGER = "tagger"
TYPE_ORIGIN = "origin"


class ModelIOError(Exception):
    """Corrupt, mistyped or wrong-version model file."""


def _encode_array(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype="<f8")
    return {"shape": list(arr.shape), "data": base64.b64encode(data.tobytes()).decode("ascii")}


def _decode_array(rec: dict) -> np.ndarray:
    try:
        raw = base64.b64decode(rec["data"])
        arr = np.frombuffer(raw, dtype="<f8").astype(float)
        return arr.reshape(rec["shape"])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelIOError(f"corrupt array payload: {e}") from e


def _payload(model) -> tuple[str, dict]:
    if isinstance(model, ScreenerModel):
        return TYPE_SCREENER, {
            "weights": _encode_array(model.weights),
            "bias": model.bias,
            "schema_version": model.schema_version,
        }
    if isinstance(model, TaggerModel):
        return TYPE_TAGGER, {
            "kind": model.kind,
            "labels": list(model.alphabet.labels),
            "feature_names": model.vectorizer.feature_names,
            "emb_dim": model.vectorizer.emb_dim,
            "local_weights": _encode_array(model.local_weights),
            "dense_weights": _encode_array(model.dense_weights),
            "transitions": _encode_array(model.transitions),
        }
    if isinstance(model, OriginModel):
        return TYPE_ORIGIN, {
            "gamma": model.gamma,
            "alpha": model.alpha,
            "vocab": list(model.vocab),
            "emissions": {op: _encode_array(row) for op, row in sorted(model.emissions.items())},
        }
    raise ModelIOError(f"cannot serialize model of type {type(model).__name__}")


def save_model(path, model) -> None:
    type_tag, payload = _payload(model)
    envelope = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "type": type_tag,
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(envelope, fh, sort_keys=True)
        fh.write("\n")


def load_model(path, expected_type: str | None = None):
    try:
        with open(path, encoding="utf-8") as fh:
            envelope = json.load(fh)
    except json.JSONDecodeError as e:
        raise ModelIOError(f"corrupt model file {path}: {e.msg}") from e
    if not isinstance(envelope, dict) or envelope.get("format") != FORMAT_TAG:
        raise ModelIOError(f"{path} is not a {FORMAT_TAG} file")
    version = envelope.get("version")
    if version != FORMAT_VERSION:
        raise ModelIOError(f"version mismatch: expected {FORMAT_VERSION}, found {version}")
    type_tag = envelope.get("type")
    if expected_type is not None and type_tag != expected_type:
        raise ModelIOError(f"model type mismatch: expected {expected_type}, found {type_tag}")
    payload = envelope.get("payload")
    if not isinstance(payload, dict):
        raise ModelIOError("missing model payload")
    try:
        if type_tag == TYPE_SCREENER:
            return ScreenerModel(
                weights=_decode_array(payload["weights"]),
                bias=float(payload["bias"]),
                schema_version=int(payload["schema_version"]),
            )
        if type_tag == TYPE_TAGGER:
            return TaggerModel(
                alphabet=LabelAlphabet(payload["labels"]),
                vectorizer=FeatureVectorizer(payload["feature_names"], int(payload["emb_dim"])),
                kind=payload["kind"],
                local_weights=_decode_array(payload["local_weights"]),
                dense_weights=_decode_array(payload["dense_weights"]),
                transitions=_decode_array(payload["transitions"]),
            )
        if type_tag == TYPE_ORIGIN:
            return OriginModel(
                gamma=float(payload["gamma"]),
                alpha=float(payload["alpha"]),
                vocab=tuple(payload["vocab"]),
                emissions={op: _decode_array(row) for op, row in payload["emissions"].items()},
            )
    except (KeyError, TypeError, ValueError) as e:
        raise ModelIOError(f"corrupt {type_tag} payload: {e}") from e
    raise ModelIOError(f"unknown model type {type_tag!r}")
