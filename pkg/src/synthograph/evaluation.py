"""Segment-level entity metrics and graph evaluation.

Graph scoring aligns nodes by exact global-token-index matches, then scores
edges (association and reference pooled, direction respected) under two
regimes: Setting 1 ignores edges touching unaligned nodes, Setting 2
penalizes them as false positives / false negatives. Counts micro-average
across documents.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .graph import IMPLICIT, ActionGraph

if TYPE_CHECKING:
    from .corpus import EntityMention, TokenIndex


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both are 0."""
    if not 0.0 <= precision <= 1.0 or not 0.0 <= recall <= 1.0:
        raise ValueError(f"precision/recall must lie in [0,1], got ({precision}, {recall})")
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class PRF:
    tp: int
    fp: int
    fn: int

    @property
    def precision(self) -> float:
        return 1.0 if self.tp + self.fp == 0 else self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float:
        return 1.0 if self.tp + self.fn == 0 else self.tp / (self.tp + self.fn)

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)

    def as_dict(self, percent: bool = True) -> dict:
        scale = 100.0 if percent else 1.0
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": scale * self.precision,
            "recall": scale * self.recall,
            "f1": scale * self.f1,
        }


def micro_average(counts: Iterable[PRF | tuple[int, int, int]]) -> PRF:
    """Pool counts across documents, then compute one PRF."""
    tp = fp = fn = 0
    for c in counts:
        if isinstance(c, PRF):
            a, b, d = c.tp, c.fp, c.fn
        else:
            a, b, d = c
        if a < 0 or b < 0 or d < 0:
            raise ValueError("negative count")
        tp, fp, fn = tp + a, fp + b, fn + d
    return PRF(tp=tp, fp=fp, fn=fn)


def entity_prf(
    pred: Iterable["EntityMention"], gold: Iterable["EntityMention"]
) -> tuple[PRF, dict[str, PRF]]:
    """Exact-span exact-label matching; every non-TP prediction is an FP."""
    pred_counts = Counter((m.sent_id, m.start, m.end, m.label) for m in pred)
    gold_counts = Counter((m.sent_id, m.start, m.end, m.label) for m in gold)
    per_label: dict[str, list[int]] = {}

    def bucket(label: str) -> list[int]:
        return per_label.setdefault(label, [0, 0, 0])

    tp = fp = fn = 0
    for key, n_pred in pred_counts.items():
        matched = min(n_pred, gold_counts.get(key, 0))
        tp += matched
        fp += n_pred - matched
        bucket(key[3])[0] += matched
        bucket(key[3])[1] += n_pred - matched
    for key, n_gold in gold_counts.items():
        missed = n_gold - min(n_gold, pred_counts.get(key, 0))
        fn += missed
        bucket(key[3])[2] += missed
    overall = PRF(tp=tp, fp=fp, fn=fn)
    return overall, {label: PRF(*c) for label, c in sorted(per_label.items())}


def explicit_aligned_share(aligned: float, unaligned: float) -> float:
    """Aligned share among explicit predicted nodes only."""
    if aligned + unaligned <= 0:
        return 0.0
    return aligned / (aligned + unaligned)


@dataclass
class NodeAlignment:
    mapping: dict[int, int]  # predicted node id -> gold node id (injective)
    aligned_explicit: int
    unaligned_explicit: int
    implicit: int
    unmatched_gold: frozenset[int]

    @property
    def total_predicted(self) -> int:
        return self.aligned_explicit + self.unaligned_explicit + self.implicit

    @property
    def fraction_aligned(self) -> float:
        return self.aligned_explicit / self.total_predicted if self.total_predicted else 0.0

    @property
    def fraction_unaligned(self) -> float:
        return self.unaligned_explicit / self.total_predicted if self.total_predicted else 0.0

    @property
    def fraction_implicit(self) -> float:
        return self.implicit / self.total_predicted if self.total_predicted else 0.0

    @property
    def explicit_aligned_share(self) -> float:
        return explicit_aligned_share(self.aligned_explicit, self.unaligned_explicit)


def align_nodes(pred: ActionGraph, gold: ActionGraph, index: "TokenIndex") -> NodeAlignment:
    """Align predicted to gold nodes by exact token-index-set matches.

    Implicit nodes are never aligned. When several gold nodes share a span,
    the earliest unmatched one (by event index) wins.
    """
    gold_by_span: dict[frozenset[int], list[int]] = {}
    for n in sorted(gold.nodes, key=lambda n: (n.event_index, n.node_id)):
        if n.kind == IMPLICIT or not n.has_span:
            continue
        key = index.span_globals(n.sent_id, n.start, n.end)
        gold_by_span.setdefault(key, []).append(n.node_id)
    taken: set[int] = set()
    mapping: dict[int, int] = {}
    aligned = unaligned = implicit = 0
    for n in sorted(pred.nodes, key=lambda n: (n.event_index, n.node_id)):
        if n.kind == IMPLICIT or not n.has_span:
            implicit += 1
            continue
        key = index.span_globals(n.sent_id, n.start, n.end)
        target = next(
            (g for g in gold_by_span.get(key, ()) if g not in taken),
            None,
        )
        if target is None:
            unaligned += 1
        else:
            mapping[n.node_id] = target
            taken.add(target)
            aligned += 1
    unmatched = frozenset(n.node_id for n in gold.nodes) - frozenset(mapping.values())
    return NodeAlignment(
        mapping=mapping,
        aligned_explicit=aligned,
        unaligned_explicit=unaligned,
        implicit=implicit,
        unmatched_gold=unmatched,
    )


def _directed_edges(graph: ActionGraph) -> set[tuple[int, int]]:
    """Association and reference edges pooled as directed node-id pairs."""
    edges = {(op, node) for op, node in graph.association_edges}
    edges |= {(node, op) for node, op, _sem in graph.reference_edges}
    return edges


def edge_prf(
    pred: ActionGraph, gold: ActionGraph, alignment: NodeAlignment, setting: int
) -> PRF:
    """Edge precision/recall under Setting 1 (ignore) or Setting 2 (penalize)."""
    if setting not in (1, 2):
        raise ValueError(f"setting must be 1 or 2, got {setting}")
    pred_edges = _directed_edges(pred)
    gold_edges = _directed_edges(gold)
    amap = alignment.mapping
    tp = fp = fn = 0
    matched: set[tuple[int, int]] = set()
    for a, b in pred_edges:
        if a in amap and b in amap:
            image = (amap[a], amap[b])
            if image in gold_edges:
                tp += 1
                matched.add(image)
            else:
                fp += 1
        elif setting == 2:
            fp += 1
    for a, b in gold_edges:
        if (a, b) in matched:
            continue
        both_matched = a not in alignment.unmatched_gold and b not in alignment.unmatched_gold
        if both_matched or setting == 2:
            fn += 1
    return PRF(tp=tp, fp=fp, fn=fn)


@dataclass
class GraphEvaluation:
    doc_id: str
    alignment: NodeAlignment
    setting1: PRF
    setting2: PRF


def evaluate_graph_pair(
    doc_id: str, pred: ActionGraph, gold: ActionGraph, index: "TokenIndex"
) -> GraphEvaluation:
    alignment = align_nodes(pred, gold, index)
    return GraphEvaluation(
        doc_id=doc_id,
        alignment=alignment,
        setting1=edge_prf(pred, gold, alignment, setting=1),
        setting2=edge_prf(pred, gold, alignment, setting=2),
    )


def graph_report(evaluations: Sequence[GraphEvaluation]) -> dict:
    """Aggregate per-document evaluations into the metrics report record."""
    micro1 = micro_average(e.setting1 for e in evaluations)
    micro2 = micro_average(e.setting2 for e in evaluations)
    aligned = sum(e.alignment.aligned_explicit for e in evaluations)
    unaligned = sum(e.alignment.unaligned_explicit for e in evaluations)
    implicit = sum(e.alignment.implicit for e in evaluations)
    total = aligned + unaligned + implicit
    return {
        "per_document": [
            {
                "doc_id": e.doc_id,
                "alignment": {
                    "aligned": e.alignment.fraction_aligned,
                    "unaligned": e.alignment.fraction_unaligned,
                    "implicit": e.alignment.fraction_implicit,
                },
                "setting1": e.setting1.as_dict(),
                "setting2": e.setting2.as_dict(),
            }
            for e in evaluations
        ],
        "micro": {"setting1": micro1.as_dict(), "setting2": micro2.as_dict()},
        "alignment": {
            "aligned": aligned / total if total else 0.0,
            "unaligned": unaligned / total if total else 0.0,
            "implicit": implicit / total if total else 0.0,
        },
    }


def format_graph_report(report: dict, model_name: str = "pipeline") -> str:
    """Human-readable table mirroring the evaluation column layout."""
    a = report["alignment"]
    m1, m2 = report["micro"]["setting1"], report["micro"]["setting2"]
    header = (
        f"{'Model':<14} {'Aligned':>8} {'Unaligned':>10} "
        f"{'P1':>7} {'R1':>7} {'F1-1':>7} {'P2':>7} {'R2':>7} {'F1-2':>7}"
    )
    row = (
        f"{model_name:<14} {100 * a['aligned']:>7.2f}% {100 * a['unaligned']:>9.2f}% "
        f"{m1['precision']:>7.2f} {m1['recall']:>7.2f} {m1['f1']:>7.2f} "
        f"{m2['precision']:>7.2f} {m2['recall']:>7.2f} {m2['f1']:>7.2f}"
    )
    return "\n".join([header, "-" * len(header), row])
