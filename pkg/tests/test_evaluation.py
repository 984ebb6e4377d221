import pytest

from synthograph.corpus import EntityMention, global_token_index
from synthograph.evaluation import (
    PRF,
    NodeAlignment,
    align_nodes,
    edge_prf,
    entity_prf,
    evaluate_graph_pair,
    explicit_aligned_share,
    f1_score,
    format_graph_report,
    graph_report,
    micro_average,
)
from synthograph.graph import ActionGraph, GraphNode


class TestF1:
    def test_reference_values(self):
        assert f1_score(0.7304, 0.9438) == pytest.approx(0.8235, abs=1e-4)
        assert f1_score(0.7698, 0.6741) == pytest.approx(0.7188, abs=1e-4)

    def test_harmonic_mean_of_equals(self):
        for x in (0.0, 0.3, 0.725, 1.0):
            assert f1_score(x, x) == pytest.approx(x)

    def test_symmetry_and_bounds(self):
        import random

        rng = random.Random(7)
        for _ in range(200):
            p, r = rng.random(), rng.random()
            f = f1_score(p, r)
            assert f == pytest.approx(f1_score(r, p))
            assert 0.0 <= f <= (p + r) / 2 + 1e-12

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            f1_score(1.2, 0.5)
        with pytest.raises(ValueError):
            f1_score(0.5, -0.1)


class TestEntityPRF:
    def test_identity(self):
        gold = [EntityMention(0, 0, 2, "material"), EntityMention(1, 3, 4, "operation")]
        overall, per_label = entity_prf(gold, gold)
        assert (overall.precision, overall.recall, overall.f1) == (1.0, 1.0, 1.0)
        assert per_label["material"].tp == 1

    def test_no_partial_credit(self):
        pred = [EntityMention(0, 0, 1, "material")]
        gold = [EntityMention(0, 0, 2, "material")]
        overall, _ = entity_prf(pred, gold)
        assert (overall.tp, overall.fp, overall.fn) == (0, 1, 1)

    def test_hand_arithmetic(self):
        gold = [EntityMention(0, i, i + 1, "number") for i in range(5)]
        pred = gold[:3] + [EntityMention(0, 10, 11, "number")]
        overall, _ = entity_prf(pred, gold)
        assert (overall.tp, overall.fp, overall.fn) == (3, 1, 2)
        assert overall.precision == pytest.approx(0.75)
        assert overall.recall == pytest.approx(0.6)
        assert overall.f1 == pytest.approx(2 * 0.75 * 0.6 / 1.35)

    def test_swapping_pred_gold_swaps_p_r(self):
        pred = [EntityMention(0, 0, 1, "material"), EntityMention(0, 2, 3, "number")]
        gold = [EntityMention(0, 0, 1, "material"), EntityMention(0, 5, 6, "ref"),
                EntityMention(0, 7, 8, "ref")]
        a, _ = entity_prf(pred, gold)
        b, _ = entity_prf(gold, pred)
        assert a.precision == pytest.approx(b.recall)
        assert a.recall == pytest.approx(b.precision)

    def test_label_mismatch_not_matched(self):
        pred = [EntityMention(0, 0, 1, "material")]
        gold = [EntityMention(0, 0, 1, "target")]
        overall, per_label = entity_prf(pred, gold)
        assert overall.tp == 0
        assert per_label["material"].fp == 1
        assert per_label["target"].fn == 1


class TestMicroAverage:
    def test_single_document_identity(self):
        assert micro_average([(3, 1, 2)]) == PRF(3, 1, 2)

    def test_hand_arithmetic(self):
        prf = micro_average([(1, 0, 0), (0, 1, 1)])
        assert prf.precision == pytest.approx(0.5)
        assert prf.recall == pytest.approx(0.5)
        assert prf.f1 == pytest.approx(0.5)

    def test_permutation_invariant(self):
        counts = [(3, 1, 0), (0, 2, 5), (7, 0, 1)]
        assert micro_average(counts) == micro_average(list(reversed(counts)))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            micro_average([(-1, 0, 0)])

    def test_zero_denominator_convention(self):
        prf = PRF(0, 0, 0)
        assert prf.precision == 1.0 and prf.recall == 1.0 and prf.f1 == 1.0


def simple_graph(spans, edges=(), implicit_events=()):
    """spans: list of (kind, sem, sent, start, end, event); edges: (src_idx, dst_idx, ref?)"""
    nodes = []
    for i, (kind, sem, sent, start, end, event) in enumerate(spans):
        nodes.append(
            GraphNode(node_id=i, kind=kind, event_index=event, sem_type=sem,
                      sent_id=sent, start=start, end=end)
        )
    next_id = len(nodes)
    for event in implicit_events:
        nodes.append(GraphNode(node_id=next_id, kind="implicit", event_index=event,
                               sem_type="apparatus"))
        next_id += 1
    assoc, refs = [], []
    for src, dst, *rest in edges:
        if rest and rest[0] == "ref":
            refs.append((src, dst, nodes[src].sem_type or "intermediate"))
        else:
            assoc.append((src, dst))
    n_events = 1 + max((n.event_index for n in nodes), default=-1)
    return ActionGraph(nodes=nodes, association_edges=assoc, reference_edges=refs, n_events=n_events)


@pytest.fixture
def doc_index(sample_corpus):
    return global_token_index(sample_corpus[0])


OP = ("operation", None)
ARG = ("argument", "intermediate")


def two_event_graph(shift=0):
    return simple_graph(
        [
            OP + (1, 4, 5, 0),
            ARG + (2, 1 + shift, 2 + shift, 1),
            OP + (2, 3, 4, 1),
        ],
        edges=[(2, 1), (1, 2, "ref")],
    )


class TestAlignNodes:
    def test_identity_alignment(self, doc_index):
        g = two_event_graph()
        alignment = align_nodes(g, g, doc_index)
        assert alignment.fraction_aligned == 1.0
        assert alignment.fraction_unaligned == 0.0
        assert alignment.unmatched_gold == frozenset()

    def test_share_reference_value(self):
        assert explicit_aligned_share(0.3985, 0.3095) == pytest.approx(0.5628, abs=1e-4)

    def test_shifted_span_unaligned(self, doc_index):
        pred = two_event_graph(shift=1)
        gold = two_event_graph(shift=0)
        alignment = align_nodes(pred, gold, doc_index)
        assert alignment.aligned_explicit == 2
        assert alignment.unaligned_explicit == 1
        assert len(alignment.unmatched_gold) == 1

    def test_implicit_nodes_never_aligned(self, doc_index):
        pred = simple_graph([OP + (1, 4, 5, 0)], implicit_events=(0,))
        gold = simple_graph([OP + (1, 4, 5, 0)], implicit_events=(0,))
        alignment = align_nodes(pred, gold, doc_index)
        assert alignment.aligned_explicit == 1
        assert alignment.implicit == 1
        # the gold implicit node stays unmatched
        assert len(alignment.unmatched_gold) == 1

    def test_duplicate_span_matches_earliest_by_event(self, doc_index):
        dup_gold = simple_graph([ARG + (2, 1, 2, 1), ARG + (2, 1, 2, 2)])
        pred = simple_graph([ARG + (2, 1, 2, 2)])
        alignment = align_nodes(pred, dup_gold, doc_index)
        assert alignment.mapping == {0: 0}

    def test_injective(self, doc_index):
        pred = simple_graph([ARG + (2, 1, 2, 1), ARG + (2, 1, 2, 2)])
        gold = simple_graph([ARG + (2, 1, 2, 1)])
        alignment = align_nodes(pred, gold, doc_index)
        assert list(alignment.mapping.values()) == [0]
        assert alignment.unaligned_explicit == 1


class TestEdgePRF:
    def test_identical_graphs_perfect(self, doc_index):
        g = two_event_graph()
        alignment = align_nodes(g, g, doc_index)
        for setting in (1, 2):
            prf = edge_prf(g, g, alignment, setting)
            assert (prf.precision, prf.recall, prf.f1) == (1.0, 1.0, 1.0)

    def test_bad_setting_rejected(self, doc_index):
        g = two_event_graph()
        alignment = align_nodes(g, g, doc_index)
        with pytest.raises(ValueError):
            edge_prf(g, g, alignment, 3)

    def test_unaligned_endpoint_fixture(self, doc_index):
        # gold: 3 edges; pred: 2 correct + 1 with an unaligned endpoint
        gold = simple_graph(
            [OP + (1, 4, 5, 0), ARG + (2, 1, 2, 1), OP + (2, 3, 4, 1), ARG + (2, 9, 11, 2)],
            edges=[(2, 1), (1, 2, "ref"), (3, 2, "ref")],
        )
        pred = simple_graph(
            [OP + (1, 4, 5, 0), ARG + (2, 1, 2, 1), OP + (2, 3, 4, 1), ARG + (2, 9, 10, 2)],
            edges=[(2, 1), (1, 2, "ref"), (3, 2, "ref")],
        )
        alignment = align_nodes(pred, gold, doc_index)
        s1 = edge_prf(pred, gold, alignment, 1)
        assert (s1.tp, s1.fp, s1.fn) == (2, 0, 0)
        s2 = edge_prf(pred, gold, alignment, 2)
        assert (s2.tp, s2.fp, s2.fn) == (2, 1, 1)

    def test_setting2_never_beats_setting1(self, doc_index):
        gold = two_event_graph()
        pred = simple_graph(
            [OP + (1, 4, 5, 0), ARG + (2, 1, 2, 1), OP + (2, 11, 12, 1)],
            edges=[(2, 1), (1, 2, "ref")],
        )
        alignment = align_nodes(pred, gold, doc_index)
        s1 = edge_prf(pred, gold, alignment, 1)
        s2 = edge_prf(pred, gold, alignment, 2)
        assert s2.precision <= s1.precision + 1e-12
        assert s2.recall <= s1.recall + 1e-12

    def test_tp_plus_fn_counts_gold_in_scope(self, doc_index):
        gold = two_event_graph()
        pred = simple_graph(
            [OP + (1, 4, 5, 0), ARG + (2, 1, 2, 1), OP + (2, 11, 12, 1)],
            edges=[(2, 1), (1, 2, "ref")],
        )
        alignment = align_nodes(pred, gold, doc_index)
        gold_edges = 2
        s2 = edge_prf(pred, gold, alignment, 2)
        assert s2.tp + s2.fn == gold_edges
        matched_gold_edges = sum(
            1
            for (a, b) in [(2, 1), (1, 2)]
            if a not in alignment.unmatched_gold and b not in alignment.unmatched_gold
        )
        s1 = edge_prf(pred, gold, alignment, 1)
        assert s1.tp + s1.fn == matched_gold_edges

    def test_direction_respected(self, doc_index):
        base = [OP + (1, 4, 5, 0), ARG + (2, 1, 2, 1), OP + (2, 3, 4, 1)]
        gold = simple_graph(base, edges=[(1, 0, "ref")])
        pred_assoc_only = simple_graph(base, edges=[(0, 1)])
        alignment = align_nodes(pred_assoc_only, gold, doc_index)
        prf = edge_prf(pred_assoc_only, gold, alignment, 1)
        assert prf.tp == 0  # (0->1) does not match gold (1->0)


class TestReports:
    def test_graph_report_structure(self, sample_corpus):
        doc = sample_corpus[0]
        index = global_token_index(doc)
        ev = evaluate_graph_pair(doc.doc_id, doc.gold_graph, doc.gold_graph, index)
        report = graph_report([ev])
        assert report["micro"]["setting1"]["f1"] == pytest.approx(100.0)
        assert set(report["alignment"]) == {"aligned", "unaligned", "implicit"}
        table = format_graph_report(report)
        assert "Aligned" in table and "100.00" in table
