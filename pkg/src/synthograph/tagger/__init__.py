"""Entity-mention tagging: feature templates, exact inference, training."""

from .labels import LabelAlphabet, bilou_decode, bilou_encode
from .features import FeatureVectorizer, SentenceFeatures, extract_features, token_feature_names
from .model import (
    TaggerModel,
    chain_log_partition,
    chain_log_partition_backward,
    chain_marginals,
    chain_score,
    log_partition,
    predict_independent,
    sentence_local_scores,
    tag_mentions,
    viterbi_decode,
    viterbi_path,
)
from .train import TrainConfig, crf_objective, maxent_objective, pack_dataset, train_crf, train_maxent

__all__ = [
    "LabelAlphabet",
    "bilou_encode",
    "bilou_decode",
    "FeatureVectorizer",
    "SentenceFeatures",
    "extract_features",
    "token_feature_names",
    "TaggerModel",
    "sentence_local_scores",
    "predict_independent",
    "log_partition",
    "viterbi_decode",
    "viterbi_path",
    "chain_log_partition",
    "chain_log_partition_backward",
    "chain_marginals",
    "chain_score",
    "tag_mentions",
    "TrainConfig",
    "pack_dataset",
    "train_maxent",
    "train_crf",
    "maxent_objective",
    "crf_objective",
]
