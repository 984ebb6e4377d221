"""Action-graph data model and the two reference-edge inducers.

A graph holds operation nodes, explicit argument spans and implicit
argument nodes, joined by association edges (operation -> own argument)
and reference edges (argument -> originating earlier operation).
Reference edges are induced either sequentially (always the previous
operation) or by a generative origin model trained with hard EM that
combines a geometric recency prior with smoothed lexical emissions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from . import diagnostics

if TYPE_CHECKING:
    from .events import Event

OPERATION = "operation"
ARGUMENT = "argument"
IMPLICIT = "implicit"
NODE_KINDS = (OPERATION, ARGUMENT, IMPLICIT)

RAW_MATERIAL = "raw-material"
INTERMEDIATE = "intermediate"
APPARATUS = "apparatus"
SEM_TYPES = (RAW_MATERIAL, INTERMEDIATE, APPARATUS)

IMPLICIT_LEMMA = "<implicit>"
UNKNOWN_LEMMA = "<unk>"


class GraphValidationError(Exception):
    """The graph violates an action-graph invariant."""


class AssignmentError(Exception):
    """An origin assignment points outside the allowed candidate set."""


@dataclass
class GraphNode:
    node_id: int
    kind: str
    event_index: int
    sem_type: str | None = None
    sent_id: int | None = None
    start: int | None = None
    end: int | None = None
    head_lemma: str | None = field(default=None, compare=False)

    @property
    def has_span(self) -> bool:
        return self.sent_id is not None and self.start is not None and self.end is not None


@dataclass
class ActionGraph:
    nodes: list[GraphNode]
    association_edges: list[tuple[int, int]]
    reference_edges: list[tuple[int, int, str]]
    n_events: int

    def __post_init__(self) -> None:
        self.nodes.sort(key=lambda n: n.node_id)
        self.association_edges = sorted(tuple(e) for e in self.association_edges)
        self.reference_edges = sorted(tuple(e) for e in self.reference_edges)
        self._by_id = {n.node_id: n for n in self.nodes}

    def node(self, node_id: int) -> GraphNode:
        return self._by_id[node_id]

    def has_node(self, node_id: int) -> bool:
        return node_id in self._by_id

    def operations_by_event(self) -> list[GraphNode | None]:
        """Operation node per event index (None for events lacking one)."""
        ops: list[GraphNode | None] = [None] * self.n_events
        for n in self.nodes:
            if n.kind == OPERATION:
                ops[n.event_index] = n
        return ops

    def reference_needing_nodes(self) -> list[GraphNode]:
        """Intermediate arguments plus all implicit nodes, in graph order."""
        out = []
        for n in self.nodes:
            if n.kind == IMPLICIT or (n.kind == ARGUMENT and n.sem_type == INTERMEDIATE):
                out.append(n)
        return out

    def referenced_node_ids(self) -> set[int]:
        return {src for src, _op, _sem in self.reference_edges}

    def to_dict(self) -> dict:
        nodes = []
        for n in self.nodes:
            rec: dict = {"id": n.node_id, "kind": n.kind, "event_index": n.event_index}
            if n.sem_type is not None:
                rec["sem_type"] = n.sem_type
            if n.has_span:
                rec["sent_id"] = n.sent_id
                rec["start"] = n.start
                rec["end"] = n.end
            nodes.append(rec)
        return {
            "nodes": nodes,
            "association_edges": [list(e) for e in self.association_edges],
            "reference_edges": [list(e) for e in self.reference_edges],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ActionGraph":
        nodes = []
        for rec in data.get("nodes", ()):
            kind = rec["kind"]
            if kind not in NODE_KINDS:
                raise GraphValidationError(f"unknown node kind {kind!r}")
            sem = rec.get("sem_type")
            if sem is not None and sem not in SEM_TYPES:
                raise GraphValidationError(f"unknown sem_type {sem!r}")
            nodes.append(
                GraphNode(
                    node_id=int(rec["id"]),
                    kind=kind,
                    event_index=int(rec["event_index"]),
                    sem_type=sem,
                    sent_id=rec.get("sent_id"),
                    start=rec.get("start"),
                    end=rec.get("end"),
                )
            )
        n_events = 1 + max((n.event_index for n in nodes), default=-1)
        assoc = [(int(a), int(b)) for a, b in data.get("association_edges", ())]
        refs = [(int(a), int(b), str(sem)) for a, b, sem in data.get("reference_edges", ())]
        return cls(nodes=nodes, association_edges=assoc, reference_edges=refs, n_events=n_events)


def assemble_graph(events: Sequence["Event"]) -> ActionGraph:
    """Build a graph from ordered events: nodes plus association edges only."""
    nodes: list[GraphNode] = []
    assoc: list[tuple[int, int]] = []
    next_id = 0
    for ev in events:
        op_id = None
        if ev.operation is not None:
            nodes.append(
                GraphNode(
                    node_id=next_id,
                    kind=OPERATION,
                    event_index=ev.event_index,
                    sent_id=ev.operation.sent_id,
                    start=ev.operation.start,
                    end=ev.operation.end,
                    head_lemma=ev.operation.lemma,
                )
            )
            op_id = next_id
            next_id += 1
        else:
            diagnostics.emit("event_without_operation", event_index=ev.event_index, sent_id=ev.sent_id)
        for arg in ev.arguments:
            kind = IMPLICIT if arg.implicit else ARGUMENT
            nodes.append(
                GraphNode(
                    node_id=next_id,
                    kind=kind,
                    event_index=ev.event_index,
                    sem_type=arg.sem_type,
                    sent_id=arg.sent_id,
                    start=arg.start,
                    end=arg.end,
                    head_lemma=IMPLICIT_LEMMA if arg.implicit else arg.head_lemma,
                )
            )
            if op_id is not None:
                assoc.append((op_id, next_id))
            next_id += 1
    n_events = 1 + max((ev.event_index for ev in events), default=-1)
    return ActionGraph(nodes=nodes, association_edges=assoc, reference_edges=[], n_events=n_events)


def validate_graph(graph: ActionGraph, doc=None) -> None:
    """Raise GraphValidationError on the first violated invariant.

    With `doc` given, also checks that every node span resolves to a valid
    (sent_id, token-range) pair of the document.
    """
    seen_ids: set[int] = set()
    ops_by_event: dict[int, int] = {}
    for n in graph.nodes:
        if n.node_id in seen_ids:
            raise GraphValidationError(f"duplicate node id {n.node_id}")
        seen_ids.add(n.node_id)
        if n.kind not in NODE_KINDS:
            raise GraphValidationError(f"node {n.node_id}: unknown kind {n.kind!r}")
        if not 0 <= n.event_index < graph.n_events:
            raise GraphValidationError(f"node {n.node_id}: event index {n.event_index} out of range")
        if n.kind == OPERATION:
            if n.event_index in ops_by_event:
                raise GraphValidationError(f"event {n.event_index} has two operation nodes")
            ops_by_event[n.event_index] = n.node_id
            if n.sem_type is not None:
                raise GraphValidationError(f"operation node {n.node_id} carries a sem_type")
        else:
            if n.sem_type not in SEM_TYPES:
                raise GraphValidationError(f"node {n.node_id}: bad sem_type {n.sem_type!r}")
        if n.kind == IMPLICIT and n.has_span:
            raise GraphValidationError(f"implicit node {n.node_id} carries a token span")
        if n.kind in (OPERATION, ARGUMENT) and not n.has_span:
            raise GraphValidationError(f"{n.kind} node {n.node_id} lacks a token span")
        if doc is not None and n.has_span:
            sentences = doc.sentences
            if not 0 <= n.sent_id < len(sentences):
                raise GraphValidationError(f"node {n.node_id}: sent_id {n.sent_id} out of range")
            if not 0 <= n.start < n.end <= len(sentences[n.sent_id].tokens):
                raise GraphValidationError(
                    f"node {n.node_id}: span ({n.start},{n.end}) outside sentence {n.sent_id}"
                )
    for op_id, node_id in graph.association_edges:
        if op_id not in seen_ids or node_id not in seen_ids:
            raise GraphValidationError(f"association edge ({op_id},{node_id}) references a missing node")
        op = graph.node(op_id)
        arg = graph.node(node_id)
        if op.kind != OPERATION:
            raise GraphValidationError(f"association edge source {op_id} is not an operation")
        if arg.kind == OPERATION:
            raise GraphValidationError(f"association edge target {node_id} is an operation")
        if op.event_index != arg.event_index:
            raise GraphValidationError(
                f"association edge ({op_id},{node_id}) crosses events "
                f"{op.event_index} -> {arg.event_index}"
            )
    ref_sources: set[int] = set()
    for node_id, op_id, sem in graph.reference_edges:
        if node_id not in seen_ids or op_id not in seen_ids:
            raise GraphValidationError(f"reference edge ({node_id},{op_id}) references a missing node")
        src = graph.node(node_id)
        dst = graph.node(op_id)
        if dst.kind != OPERATION:
            raise GraphValidationError(f"reference edge target {op_id} is not an operation")
        if src.kind == OPERATION:
            raise GraphValidationError(f"reference edge source {node_id} is an operation")
        if src.kind == ARGUMENT and src.sem_type != INTERMEDIATE:
            raise GraphValidationError(
                f"explicit {src.sem_type} node {node_id} must not carry a reference edge"
            )
        if sem != src.sem_type:
            raise GraphValidationError(
                f"reference edge ({node_id},{op_id}) sem_type {sem!r} != node {src.sem_type!r}"
            )
        if dst.event_index >= src.event_index:
            raise GraphValidationError(
                f"reference edge ({node_id},{op_id}): target event {dst.event_index} "
                f"does not precede source event {src.event_index}"
            )
        if node_id in ref_sources:
            raise GraphValidationError(f"node {node_id} carries more than one reference edge")
        ref_sources.add(node_id)


def attach_head_lemmas(graph: ActionGraph, doc) -> ActionGraph:
    """Fill node.head_lemma from the document (for graphs loaded from disk).

    The head of a span is its dependency-highest token; implicit nodes get
    the reserved implicit symbol.
    """
    for n in graph.nodes:
        if n.kind == IMPLICIT:
            n.head_lemma = IMPLICIT_LEMMA
        elif n.has_span:
            sent = doc.sentences[n.sent_id]
            n.head_lemma = span_head_lemma(sent, n.start, n.end)
    return graph


def span_head_lemma(sentence, start: int, end: int) -> str:
    """Lemma of the dependency-highest token in [start, end); ties go left."""
    best = start
    best_depth = sentence.depth(start)
    for i in range(start + 1, end):
        d = sentence.depth(i)
        if d < best_depth:
            best, best_depth = i, d
    return sentence.tokens[best].lemma.lower()


def _latest_operation_before(ops: Sequence[GraphNode | None], event_index: int) -> GraphNode | None:
    for j in range(event_index - 1, -1, -1):
        if ops[j] is not None:
            return ops[j]
    return None


def induce_edges_sequential(graph: ActionGraph) -> ActionGraph:
    """Link every reference-needing node to the previous operation.

    Nodes in the first event (or with no preceding operation at all) get no
    edge and are flagged raw. Nodes that already carry a reference edge are
    left alone, which makes the inducer idempotent.
    """
    ops = graph.operations_by_event()
    already = graph.referenced_node_ids()
    new_edges = list(graph.reference_edges)
    for n in graph.reference_needing_nodes():
        if n.node_id in already:
            continue
        target = _latest_operation_before(ops, n.event_index)
        if target is None:
            diagnostics.emit("raw_node", node_id=n.node_id, event_index=n.event_index)
            continue
        new_edges.append((n.node_id, target.node_id, n.sem_type))
    return ActionGraph(
        nodes=graph.nodes,
        association_edges=list(graph.association_edges),
        reference_edges=new_edges,
        n_events=graph.n_events,
    )


@dataclass
class OriginModel:
    """Generative origin model: geometric recency times lexical emission."""

    gamma: float
    alpha: float
    vocab: tuple[str, ...]
    emissions: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0,1), got {self.gamma}")
        self._vocab_index = {w: i for i, w in enumerate(self.vocab)}

    @classmethod
    def uniform(cls, vocab: Iterable[str], gamma: float = 0.5, alpha: float = 0.1) -> "OriginModel":
        words = tuple(dict.fromkeys(tuple(vocab) + (IMPLICIT_LEMMA, UNKNOWN_LEMMA)))
        return cls(gamma=gamma, alpha=alpha, vocab=words, emissions={})

    def symbol_index(self, symbol: str) -> int:
        return self._vocab_index.get(symbol, self._vocab_index[UNKNOWN_LEMMA])

    def emission_logprob(self, symbol: str, op_lemma: str) -> float:
        row = self.emissions.get(op_lemma)
        if row is None:
            return -math.log(len(self.vocab))
        return float(np.log(row[self.symbol_index(symbol)]))

    def origin_score(self, symbol: str, op_lemma: str, distance: int) -> float:
        """log[(1-gamma) * gamma^distance] + log P(symbol | op_lemma)."""
        recency = math.log1p(-self.gamma) + distance * math.log(self.gamma)
        return recency + self.emission_logprob(symbol, op_lemma)


def _node_symbol(node: GraphNode) -> str:
    if node.kind == IMPLICIT:
        return IMPLICIT_LEMMA
    return node.head_lemma if node.head_lemma is not None else UNKNOWN_LEMMA


def _op_lemma(op: GraphNode) -> str:
    return op.head_lemma if op.head_lemma is not None else UNKNOWN_LEMMA


def _best_origin(model: OriginModel, node: GraphNode, ops: Sequence[GraphNode | None]) -> int | None:
    """Argmax over candidate origins; ties resolved to the largest j."""
    symbol = _node_symbol(node)
    best_j = None
    best_score = -math.inf
    for j in range(node.event_index):
        op = ops[j]
        if op is None:
            continue
        s = model.origin_score(symbol, _op_lemma(op), node.event_index - 1 - j)
        if s >= best_score:
            best_j, best_score = j, s
    return best_j


def _estimate_emissions(
    counts: dict[str, np.ndarray], vocab: tuple[str, ...], alpha: float
) -> dict[str, np.ndarray]:
    v = len(vocab)
    return {op: (c + alpha) / (c.sum() + alpha * v) for op, c in counts.items()}


@dataclass
class OriginTrainResult:
    model: OriginModel
    assignments: list[dict[int, int]]
    loglik_trace: list[float]
    iterations: int
    converged: bool


def train_origin_model(
    graphs: Sequence[ActionGraph],
    *,
    gamma_init: float = 0.5,
    alpha: float = 0.1,
    max_iters: int = 50,
) -> OriginTrainResult:
    """Hard-EM fit of the origin model over assembled graphs.

    Latent per reference-needing node: the index of the originating event.
    Initialization is the sequential assignment; the E-step takes argmax
    origins (ties to the most recent), the M-step re-fits the geometric
    recency parameter (clamped to [0.01, 0.99]) and add-alpha emissions.
    """
    if not graphs:
        raise ValueError("no graphs to train on")
    ops_per_graph = [g.operations_by_event() for g in graphs]
    vocab_set: set[str] = set()
    nodes_per_graph: list[list[GraphNode]] = []
    for g, ops in zip(graphs, ops_per_graph):
        usable = []
        for n in g.reference_needing_nodes():
            if any(ops[j] is not None for j in range(n.event_index)):
                usable.append(n)
                vocab_set.add(_node_symbol(n))
        nodes_per_graph.append(usable)
    if not any(nodes_per_graph):
        raise ValueError("corpus has no reference-needing nodes with candidate origins")
    vocab = tuple(sorted(vocab_set | {IMPLICIT_LEMMA, UNKNOWN_LEMMA}))
    symbol_index = {w: i for i, w in enumerate(vocab)}

    def sequential_assignments() -> list[dict[int, int]]:
        out = []
        for ops, usable in zip(ops_per_graph, nodes_per_graph):
            a: dict[int, int] = {}
            for n in usable:
                for j in range(n.event_index - 1, -1, -1):
                    if ops[j] is not None:
                        a[n.node_id] = j
                        break
            out.append(a)
        return out

    def m_step(assignments: list[dict[int, int]], gamma: float | None) -> OriginModel:
        distances: list[int] = []
        counts: dict[str, np.ndarray] = {}
        for g, ops, assign in zip(graphs, ops_per_graph, assignments):
            for node_id, j in assign.items():
                node = g.node(node_id)
                distances.append(node.event_index - 1 - j)
                op_lemma = _op_lemma(ops[j])
                row = counts.setdefault(op_lemma, np.zeros(len(vocab)))
                row[symbol_index[_node_symbol(node)]] += 1.0
        if gamma is None:
            mean_d = float(np.mean(distances))
            gamma = min(max(mean_d / (1.0 + mean_d), 0.01), 0.99)
        return OriginModel(
            gamma=gamma, alpha=alpha, vocab=vocab, emissions=_estimate_emissions(counts, vocab, alpha)
        )

    assignments = sequential_assignments()
    model = m_step(assignments, gamma=gamma_init)
    trace = [complete_data_loglik(model, graphs, assignments)]
    iterations = 0
    converged = False
    for iterations in range(1, max_iters + 1):
        new_assignments = []
        for g, ops, usable in zip(graphs, ops_per_graph, nodes_per_graph):
            a = {}
            for n in usable:
                j = _best_origin(model, n, ops)
                if j is not None:
                    a[n.node_id] = j
            new_assignments.append(a)
        model = m_step(new_assignments, gamma=None)
        trace.append(complete_data_loglik(model, graphs, new_assignments))
        if new_assignments == assignments:
            converged = True
            assignments = new_assignments
            break
        assignments = new_assignments
    return OriginTrainResult(
        model=model, assignments=assignments, loglik_trace=trace, iterations=iterations, converged=converged
    )


def complete_data_loglik(
    model: OriginModel, graphs: Sequence[ActionGraph], assignments: Sequence[Mapping[int, int]]
) -> float:
    """Sum of origin scores over all assigned nodes."""
    total = 0.0
    for g, assign in zip(graphs, assignments):
        ops = g.operations_by_event()
        for node_id, j in assign.items():
            node = g.node(node_id)
            if not 0 <= j < node.event_index:
                raise AssignmentError(
                    f"node {node_id}: origin {j} not before event {node.event_index}"
                )
            if ops[j] is None:
                raise AssignmentError(f"node {node_id}: origin event {j} has no operation")
            total += model.origin_score(_node_symbol(node), _op_lemma(ops[j]), node.event_index - 1 - j)
    return total


def apply_origin_model(model: OriginModel, graph: ActionGraph) -> ActionGraph:
    """Add one reference edge per reference-needing node by argmax origin."""
    ops = graph.operations_by_event()
    already = graph.referenced_node_ids()
    new_edges = list(graph.reference_edges)
    for n in graph.reference_needing_nodes():
        if n.node_id in already:
            continue
        j = _best_origin(model, n, ops)
        if j is None:
            diagnostics.emit("raw_node", node_id=n.node_id, event_index=n.event_index)
            continue
        new_edges.append((n.node_id, ops[j].node_id, n.sem_type))
    return ActionGraph(
        nodes=graph.nodes,
        association_edges=list(graph.association_edges),
        reference_edges=new_edges,
        n_events=graph.n_events,
    )
