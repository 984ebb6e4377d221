"""Command-line interface: every pipeline stage as a deterministic subcommand.

Stages read and write the documented on-disk formats so each can be
unit-replaced: `screen`, `train-tagger`, `tag`, `extract`, `induce`,
`train-origin`, `evaluate` and the end-to-end `pipeline`. The
SYNTHOGRAPH_LOG environment variable sets diagnostic verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__, corpus, evaluation, events, modelio, screen
from .diagnostics import DiagnosticCounter
from .graph import (
    ActionGraph,
    apply_origin_model,
    assemble_graph,
    attach_head_lemmas,
    induce_edges_sequential,
    train_origin_model,
    validate_graph,
)
from .tagger import TrainConfig, tag_mentions, train_crf, train_maxent

log = logging.getLogger("synthograph")


class PipelineError(Exception):
    def __init__(self, stage: str, message: str, doc_id: str | None = None):
        self.stage = stage
        self.doc_id = doc_id
        super().__init__(message)


def _check_path(path, stage: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise PipelineError(stage, f"{what} not found: {p}")
    return p


def _load_inputs(args, stage: str):
    _check_path(args.corpus, stage, "corpus file")
    _check_path(args.embeddings, stage, "embeddings file")
    _check_path(args.lexicons, stage, "lexicon directory")
    docs = corpus.load_corpus(args.corpus)
    emb = corpus.load_embeddings(args.embeddings)
    lex = corpus.load_lexicons(args.lexicons)
    return docs, emb, lex


def _synthesis_indices(doc, screener, emb, lex) -> list[int]:
    """Paragraph selection: model if given, else gold labels, else everything."""
    if screener is not None:
        return screen.select_synthesis_paragraphs(doc, screener, emb, lex)
    if doc.synthesis_labels is not None:
        return [i for i, flag in enumerate(doc.synthesis_labels) if flag]
    return list(range(len(doc.paragraphs)))


def _procedure_sentences(doc, indices) -> list:
    return [sent for i in indices for sent in doc.paragraphs[i]]


def _tagged_pairs(docs) -> list:
    pairs = []
    for doc in docs:
        if doc.gold_mentions is None:
            continue
        by_sent: dict[int, list] = {}
        for m in doc.gold_mentions:
            by_sent.setdefault(m.sent_id, []).append(m)
        for sent in doc.sentences:
            pairs.append((sent, by_sent.get(sent.sent_id, [])))
    return pairs


def _train_tagger_from_gold(docs, emb, lex, kind: str, reg_lambda: float, max_iters: int):
    pairs = _tagged_pairs(docs)
    if not pairs:
        raise PipelineError("train-tagger", "no document carries gold mentions to train on")
    config = TrainConfig(reg_lambda=reg_lambda, max_iters=max_iters)
    trainer = train_crf if kind == "crf" else train_maxent
    return trainer(pairs, lex, emb, config=config)


def _extract_document_graph(doc, sentences, mentions) -> ActionGraph:
    evs = events.extract_events(sentences, mentions)
    events.add_implicit_arguments(evs)
    return assemble_graph(evs)


def _graph_path(out_dir: Path, doc_id: str) -> Path:
    safe = doc_id.replace(os.sep, "_")
    return out_dir / f"{safe}.graph.json"


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_manifest(out_dir: Path, args, timings: dict, counter: DiagnosticCounter) -> None:
    manifest = {
        "tool": "synthograph",
        "version": __version__,
        "config": {k: str(v) if isinstance(v, Path) else v for k, v in vars(args).items() if k != "func"},
        "stage_seconds": timings,
        "diagnostics": dict(sorted(counter.counts.items())),
    }
    _write_json(out_dir / "manifest.json", manifest)


class _StageTimer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    def __call__(self, name: str):
        timer = self

        class _Ctx:
            def __enter__(self_inner):
                self_inner.t0 = time.perf_counter()

            def __exit__(self_inner, *exc):
                timer.timings[name] = round(time.perf_counter() - self_inner.t0, 6)
                return False

        return _Ctx()


def cmd_screen(args) -> int:
    docs, emb, lex = _load_inputs(args, "screen")
    if args.train:
        examples = []
        for doc in docs:
            if doc.synthesis_labels is None:
                continue
            for para, label in zip(doc.paragraphs, doc.synthesis_labels):
                if any(sent.tokens for sent in para):
                    examples.append((screen.featurize_paragraph(para, emb, lex), label))
        if not examples:
            raise PipelineError("screen", "no synthesis_labels found in corpus to train on")
        model = screen.train_screener(examples, reg_lambda=args.reg_lambda, max_iters=args.max_iters)
        modelio.save_model(args.model, model)
        log.info("screener saved to %s", args.model)
        return 0
    _check_path(args.model, "screen", "screener model")
    model = modelio.load_model(args.model, expected_type=modelio.TYPE_SCREENER)
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        for doc in docs:
            indices = screen.select_synthesis_paragraphs(doc, model, emb, lex)
            out.write(json.dumps({"doc_id": doc.doc_id, "synthesis_paragraphs": indices}))
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_train_tagger(args) -> int:
    docs, emb, lex = _load_inputs(args, "train-tagger")
    model = _train_tagger_from_gold(docs, emb, lex, args.tagger, args.reg_lambda, args.max_iters)
    modelio.save_model(args.model, model)
    log.info("tagger (%s) saved to %s", args.tagger, args.model)
    return 0


def cmd_tag(args) -> int:
    docs, emb, lex = _load_inputs(args, "tag")
    _check_path(args.model, "tag", "tagger model")
    model = modelio.load_model(args.model, expected_type=modelio.TYPE_TAGGER)
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8")
    try:
        for doc in docs:
            mentions = []
            for sent in doc.sentences:
                for m in tag_mentions(model, sent, lex, emb):
                    mentions.append(
                        {"sent_id": m.sent_id, "start": m.start, "end": m.end, "label": m.label}
                    )
            out.write(json.dumps({"doc_id": doc.doc_id, "mentions": mentions}))
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _predicted_mentions(doc, sentences, tagger_model, lex, emb, use_gold: bool):
    if use_gold:
        if doc.gold_mentions is None:
            raise PipelineError("extract", "document has no gold mentions", doc_id=doc.doc_id)
        wanted = {s.sent_id for s in sentences}
        return [m for m in doc.gold_mentions if m.sent_id in wanted]
    mentions = []
    for sent in sentences:
        mentions.extend(tag_mentions(tagger_model, sent, lex, emb))
    return mentions


def cmd_extract(args) -> int:
    docs, emb, lex = _load_inputs(args, "extract")
    screener = None
    if args.screener_model:
        _check_path(args.screener_model, "extract", "screener model")
        screener = modelio.load_model(args.screener_model, expected_type=modelio.TYPE_SCREENER)
    tagger_model = None
    if not args.use_gold_mentions:
        _check_path(args.model, "extract", "tagger model")
        tagger_model = modelio.load_model(args.model, expected_type=modelio.TYPE_TAGGER)
    out_dir = Path(args.out)
    for doc in docs:
        try:
            indices = _synthesis_indices(doc, screener, emb, lex)
            sentences = _procedure_sentences(doc, indices)
            mentions = _predicted_mentions(
                doc, sentences, tagger_model, lex, emb, args.use_gold_mentions
            )
            graph = _extract_document_graph(doc, sentences, mentions)
            validate_graph(graph, doc)
        except PipelineError:
            raise
        except Exception as e:
            raise PipelineError("extract", str(e), doc_id=doc.doc_id) from e
        _write_json(_graph_path(out_dir, doc.doc_id), graph.to_dict())
    return 0


def _load_stage_graphs(args, docs, stage: str) -> list[ActionGraph]:
    graphs = []
    if args.from_gold:
        # Perfect node segmentation: keep gold nodes and association edges,
        # drop gold reference edges so the inducer under test supplies them.
        for doc in docs:
            if doc.gold_graph is None:
                raise PipelineError(stage, "document has no gold graph", doc_id=doc.doc_id)
            stripped = ActionGraph.from_dict(doc.gold_graph.to_dict())
            stripped.reference_edges = []
            graphs.append(attach_head_lemmas(stripped, doc))
    else:
        if not args.graphs:
            raise PipelineError(stage, "either --graphs or --from-gold is required")
        graph_dir = _check_path(args.graphs, stage, "graph directory")
        for doc in docs:
            path = _graph_path(graph_dir, doc.doc_id)
            if not path.exists():
                raise PipelineError(stage, f"graph file missing: {path}", doc_id=doc.doc_id)
            with open(path, encoding="utf-8") as fh:
                graphs.append(attach_head_lemmas(ActionGraph.from_dict(json.load(fh)), doc))
    return graphs


def cmd_induce(args) -> int:
    _check_path(args.corpus, "induce", "corpus file")
    docs = corpus.load_corpus(args.corpus)
    graphs = _load_stage_graphs(args, docs, "induce")
    if args.inducer == "generative":
        if args.origin_model:
            _check_path(args.origin_model, "induce", "origin model")
            model = modelio.load_model(args.origin_model, expected_type=modelio.TYPE_ORIGIN)
        else:
            model = train_origin_model(
                graphs, gamma_init=args.gamma, alpha=args.alpha, max_iters=args.max_iters
            ).model
        induced = [apply_origin_model(model, g) for g in graphs]
    else:
        induced = [induce_edges_sequential(g) for g in graphs]
    out_dir = Path(args.out)
    for doc, graph in zip(docs, induced):
        try:
            validate_graph(graph, doc)
        except Exception as e:
            raise PipelineError("induce", str(e), doc_id=doc.doc_id) from e
        _write_json(_graph_path(out_dir, doc.doc_id), graph.to_dict())
    return 0


def cmd_train_origin(args) -> int:
    _check_path(args.corpus, "train-origin", "corpus file")
    docs = corpus.load_corpus(args.corpus)
    graphs = _load_stage_graphs(args, docs, "train-origin")
    result = train_origin_model(
        graphs, gamma_init=args.gamma, alpha=args.alpha, max_iters=args.max_iters
    )
    modelio.save_model(args.model, result.model)
    log.info(
        "origin model saved to %s (gamma=%.4f, %d EM iterations)",
        args.model,
        result.model.gamma,
        result.iterations,
    )
    return 0


def _evaluate_graphs(docs, pred_graphs) -> dict | None:
    evaluations = []
    for doc, pred in zip(docs, pred_graphs):
        if doc.gold_graph is None:
            continue
        index = corpus.global_token_index(doc)
        evaluations.append(evaluation.evaluate_graph_pair(doc.doc_id, pred, doc.gold_graph, index))
    if not evaluations:
        return None
    return evaluation.graph_report(evaluations)


def cmd_evaluate(args) -> int:
    _check_path(args.corpus, "evaluate", "corpus file")
    docs = corpus.load_corpus(args.corpus)
    pred_dir = _check_path(args.pred, "evaluate", "prediction directory")
    pred_graphs = []
    eval_docs = []
    for doc in docs:
        if doc.gold_graph is None:
            continue
        path = _graph_path(pred_dir, doc.doc_id)
        if not path.exists():
            raise PipelineError("evaluate", f"graph file missing: {path}", doc_id=doc.doc_id)
        with open(path, encoding="utf-8") as fh:
            pred_graphs.append(ActionGraph.from_dict(json.load(fh)))
        eval_docs.append(doc)
    report = _evaluate_graphs(eval_docs, pred_graphs)
    if report is None:
        raise PipelineError("evaluate", "no documents carry gold graphs")
    print(evaluation.format_graph_report(report))
    if args.out:
        _write_json(Path(args.out), report)
    return 0


def cmd_pipeline(args) -> int:
    timer = _StageTimer()
    counter = DiagnosticCounter()
    log.addHandler(counter)
    try:
        with timer("load"):
            docs, emb, lex = _load_inputs(args, "pipeline")
            screener = None
            if args.screener_model:
                _check_path(args.screener_model, "pipeline", "screener model")
                screener = modelio.load_model(args.screener_model, expected_type=modelio.TYPE_SCREENER)
        with timer("tagger"):
            if args.model:
                _check_path(args.model, "pipeline", "tagger model")
                tagger_model = modelio.load_model(args.model, expected_type=modelio.TYPE_TAGGER)
            else:
                tagger_model = _train_tagger_from_gold(
                    docs, emb, lex, args.tagger, args.reg_lambda, args.max_iters
                )
        with timer("extract"):
            assembled = []
            for doc in docs:
                try:
                    indices = _synthesis_indices(doc, screener, emb, lex)
                    sentences = _procedure_sentences(doc, indices)
                    mentions = []
                    for sent in sentences:
                        mentions.extend(tag_mentions(tagger_model, sent, lex, emb))
                    assembled.append(_extract_document_graph(doc, sentences, mentions))
                except Exception as e:
                    raise PipelineError("extract", str(e), doc_id=doc.doc_id) from e
        with timer("induce"):
            if args.inducer == "generative":
                if args.origin_model:
                    _check_path(args.origin_model, "pipeline", "origin model")
                    origin = modelio.load_model(args.origin_model, expected_type=modelio.TYPE_ORIGIN)
                else:
                    origin = train_origin_model(
                        assembled, gamma_init=args.gamma, alpha=args.alpha
                    ).model
                induced = [apply_origin_model(origin, g) for g in assembled]
            else:
                induced = [induce_edges_sequential(g) for g in assembled]
        out_dir = Path(args.out)
        with timer("write"):
            for doc, graph in zip(docs, induced):
                try:
                    validate_graph(graph, doc)
                except Exception as e:
                    raise PipelineError("write", str(e), doc_id=doc.doc_id) from e
                _write_json(_graph_path(out_dir, doc.doc_id), graph.to_dict())
        with timer("evaluate"):
            report = _evaluate_graphs(docs, induced)
            if report is not None:
                _write_json(out_dir / "metrics.json", report)
                print(evaluation.format_graph_report(report, model_name=args.inducer))
        _write_manifest(out_dir, args, timer.timings, counter)
    finally:
        log.removeHandler(counter)
    return 0


def _add_common_io(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--corpus", required=True, help="line-delimited corpus file")
    parser.add_argument("--embeddings", required=True, help="plain-text embedding file")
    parser.add_argument("--lexicons", required=True, help="directory of lexicon files")


def _add_train_knobs(parser: argparse.ArgumentParser, max_iters: int) -> None:
    parser.add_argument("--lambda", dest="reg_lambda", type=float, default=0.1,
                        help="L2 regularization strength")
    parser.add_argument("--max-iters", type=int, default=max_iters, help="iteration cap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthograph",
        description="Extract action graphs from inorganic-synthesis procedure text.",
    )
    parser.add_argument("--version", action="version", version=f"synthograph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("screen", help="train or apply the synthesis-paragraph screener")
    _add_common_io(p)
    p.add_argument("--model", required=True, help="screener model file")
    p.add_argument("--train", action="store_true", help="train from synthesis_labels and save")
    p.add_argument("--out", help="output JSONL (default stdout)")
    _add_train_knobs(p, max_iters=500)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("train-tagger", help="train an entity tagger on gold mentions")
    _add_common_io(p)
    p.add_argument("--tagger", choices=["independent", "crf"], default="crf")
    p.add_argument("--model", required=True, help="output model file")
    _add_train_knobs(p, max_iters=200)
    p.set_defaults(func=cmd_train_tagger)

    p = sub.add_parser("tag", help="tag entity mentions with a trained model")
    _add_common_io(p)
    p.add_argument("--model", required=True, help="tagger model file")
    p.add_argument("--out", help="output JSONL (default stdout)")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("extract", help="screen, tag and assemble association graphs")
    _add_common_io(p)
    p.add_argument("--model", help="tagger model file")
    p.add_argument("--screener-model", help="screener model file (default: gold labels or all)")
    p.add_argument("--use-gold-mentions", action="store_true",
                   help="build events from gold mentions instead of a tagger")
    p.add_argument("--out", required=True, help="output directory for graph files")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("induce", help="add reference edges to assembled graphs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--graphs", help="directory of assembled graph files")
    p.add_argument("--from-gold", action="store_true", help="induce over gold graph nodes")
    p.add_argument("--inducer", choices=["sequential", "generative"], default="sequential")
    p.add_argument("--origin-model", help="trained origin model (generative inducer)")
    p.add_argument("--gamma", type=float, default=0.5, help="initial recency parameter")
    p.add_argument("--alpha", type=float, default=0.1, help="emission smoothing")
    p.add_argument("--max-iters", type=int, default=50, help="EM iteration cap")
    p.add_argument("--out", required=True, help="output directory for graph files")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("train-origin", help="train the generative origin model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--graphs", help="directory of assembled graph files")
    p.add_argument("--from-gold", action="store_true", help="train over gold graph nodes")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--model", required=True, help="output model file")
    p.set_defaults(func=cmd_train_origin)

    p = sub.add_parser("evaluate", help="score predicted graphs against gold annotations")
    p.add_argument("--corpus", required=True, help="corpus with gold graphs")
    p.add_argument("--pred", required=True, help="directory of predicted graph files")
    p.add_argument("--out", help="metrics JSON output file")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    _add_common_io(p)
    p.add_argument("--screener-model", help="screener model (default: gold labels or all)")
    p.add_argument("--model", help="tagger model (default: train on gold mentions)")
    p.add_argument("--tagger", choices=["independent", "crf"], default="crf")
    p.add_argument("--inducer", choices=["sequential", "generative"], default="sequential")
    p.add_argument("--origin-model", help="origin model (generative inducer)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=42, help="random seed recorded in the manifest")
    p.add_argument("--alpha", type=float, default=0.1, help="origin emission smoothing")
    p.add_argument("--gamma", type=float, default=0.5, help="origin initial recency")
    _add_train_knobs(p, max_iters=200)
    p.set_defaults(func=cmd_pipeline)

    return parser


def _configure_logging() -> None:
    level_name = os.environ.get("SYNTHOGRAPH_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(level)


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as e:
        record = {"error": {"stage": e.stage, "doc_id": e.doc_id, "message": str(e)}}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1
    except (
        corpus.CorpusFormatError,
        corpus.CorpusValidationError,
        modelio.ModelIOError,
        ValueError,
        OSError,
    ) as e:
        record = {"error": {"stage": args.command, "doc_id": None, "message": str(e)}}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
