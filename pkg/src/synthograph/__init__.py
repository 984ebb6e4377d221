"""Action-graph extraction from inorganic-materials synthesis procedure text."""

__version__ = "0.1.0"

from .corpus import (
    Document,
    EmbeddingTable,
    EntityMention,
    LexiconSet,
    Sentence,
    Token,
    global_token_index,
    load_corpus,
    load_embeddings,
    load_lexicons,
)
from .graph import (
    ActionGraph,
    OriginModel,
    apply_origin_model,
    assemble_graph,
    complete_data_loglik,
    induce_edges_sequential,
    train_origin_model,
    validate_graph,
)
from .events import add_implicit_arguments, build_events, extract_events, split_sentence_events
from .screen import ScreenerModel, featurize_paragraph, select_synthesis_paragraphs, train_screener
from .evaluation import PRF, align_nodes, edge_prf, entity_prf, f1_score, micro_average

__all__ = [
    "__version__",
    "Document",
    "Sentence",
    "Token",
    "EntityMention",
    "EmbeddingTable",
    "LexiconSet",
    "load_corpus",
    "load_embeddings",
    "load_lexicons",
    "global_token_index",
    "ActionGraph",
    "OriginModel",
    "assemble_graph",
    "validate_graph",
    "induce_edges_sequential",
    "train_origin_model",
    "apply_origin_model",
    "complete_data_loglik",
    "split_sentence_events",
    "build_events",
    "extract_events",
    "add_implicit_arguments",
    "ScreenerModel",
    "featurize_paragraph",
    "train_screener",
    "select_synthesis_paragraphs",
    "PRF",
    "f1_score",
    "entity_prf",
    "align_nodes",
    "edge_prf",
    "micro_average",
]
