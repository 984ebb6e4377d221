#!/usr/bin/env python3
"""Build the bundled sample corpus, embeddings and lexicons under data/.

The three documents are hand-authored hydrothermal/sol-gel style procedures
with dependency parses, gold mentions, paragraph labels, and gold action
graphs whose reference edges follow the sequential ground truth. Run from
the repository root: python scripts/make_sample_data.py
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from synthograph import corpus as C  # noqa: E402
from synthograph import events as E  # noqa: E402
from synthograph.graph import assemble_graph, induce_edges_sequential, validate_graph  # noqa: E402

DATA = ROOT / "data"


def sent(*rows):
    """Each row: (surface, pos, lemma, dep_head, dep_label)."""
    return [
        {"surface": s, "pos": p, "lemma": l, "dep_head": h, "dep_label": d}
        for s, p, l, h, d in rows
    ]


def mention(sent_id, start, end, label):
    return {"sent_id": sent_id, "start": start, "end": end, "label": label}


DOC1 = {
    "doc_id": "sample-hydrothermal-01",
    "paragraphs": [
        [
            # sent 0: Silver vanadates have attracted broad interest .
            sent(
                ("Silver", "NNP", "silver", 1, "compound"),
                ("vanadates", "NNS", "vanadate", 3, "nsubj"),
                ("have", "VBP", "have", 3, "aux"),
                ("attracted", "VBN", "attract", -1, "root"),
                ("broad", "JJ", "broad", 5, "amod"),
                ("interest", "NN", "interest", 3, "obj"),
                (".", ".", ".", 3, "punct"),
            ),
        ],
        [
            # sent 1: AgNO3 and NH4VO3 were dissolved in deionized water .
            sent(
                ("AgNO3", "NNP", "agno3", 4, "nsubj:pass"),
                ("and", "CC", "and", 2, "cc"),
                ("NH4VO3", "NNP", "nh4vo3", 0, "conj"),
                ("were", "VBD", "be", 4, "aux:pass"),
                ("dissolved", "VBN", "dissolve", -1, "root"),
                ("in", "IN", "in", 7, "case"),
                ("deionized", "JJ", "deionized", 7, "amod"),
                ("water", "NN", "water", 4, "obl"),
                (".", ".", ".", 4, "punct"),
            ),
            # sent 2: The mixture was stirred for 30 min and a black solid appeared .
            sent(
                ("The", "DT", "the", 1, "det"),
                ("mixture", "NN", "mixture", 3, "nsubj:pass"),
                ("was", "VBD", "be", 3, "aux:pass"),
                ("stirred", "VBN", "stir", -1, "root"),
                ("for", "IN", "for", 6, "case"),
                ("30", "CD", "30", 6, "nummod"),
                ("min", "NN", "min", 3, "obl"),
                ("and", "CC", "and", 11, "cc"),
                ("a", "DT", "a", 10, "det"),
                ("black", "JJ", "black", 10, "amod"),
                ("solid", "NN", "solid", 11, "nsubj"),
                ("appeared", "VBD", "appear", 3, "conj"),
                (".", ".", ".", 3, "punct"),
            ),
            # sent 3: The black slurry was sealed in an autoclave and maintained
            #         at 180 °C for 24 h .
            sent(
                ("The", "DT", "the", 2, "det"),
                ("black", "JJ", "black", 2, "amod"),
                ("slurry", "NN", "slurry", 4, "nsubj:pass"),
                ("was", "VBD", "be", 4, "aux:pass"),
                ("sealed", "VBN", "seal", -1, "root"),
                ("in", "IN", "in", 7, "case"),
                ("an", "DT", "a", 7, "det"),
                ("autoclave", "NN", "autoclave", 4, "obl"),
                ("and", "CC", "and", 9, "cc"),
                ("maintained", "VBN", "maintain", 4, "conj"),
                ("at", "IN", "at", 12, "case"),
                ("180", "CD", "180", 12, "nummod"),
                ("°C", "NN", "°c", 9, "obl"),
                ("for", "IN", "for", 15, "case"),
                ("24", "CD", "24", 15, "nummod"),
                ("h", "NN", "h", 9, "obl"),
                (".", ".", ".", 4, "punct"),
            ),
        ],
    ],
    "synthesis_labels": [False, True],
    "gold_mentions": [
        mention(1, 0, 1, "material"),
        mention(1, 2, 3, "material"),
        mention(1, 4, 5, "operation"),
        mention(1, 6, 8, "material"),
        mention(2, 1, 2, "intermed"),
        mention(2, 3, 4, "operation"),
        mention(2, 5, 6, "number"),
        mention(2, 6, 7, "cnd_unit"),
        mention(2, 9, 11, "intermed"),
        mention(2, 11, 12, "operation"),
        mention(3, 1, 3, "intermed"),
        mention(3, 4, 5, "operation"),
        mention(3, 7, 8, "synth_aprt"),
        mention(3, 9, 10, "operation"),
        mention(3, 11, 12, "number"),
        mention(3, 12, 13, "cnd_unit"),
        mention(3, 14, 15, "number"),
        mention(3, 15, 16, "cnd_unit"),
    ],
}

DOC2 = {
    "doc_id": "sample-solgel-02",
    "paragraphs": [
        [
            # sent 0: TiO2 powder was mixed with citric acid .
            sent(
                ("TiO2", "NNP", "tio2", 1, "compound"),
                ("powder", "NN", "powder", 3, "nsubj:pass"),
                ("was", "VBD", "be", 3, "aux:pass"),
                ("mixed", "VBN", "mix", -1, "root"),
                ("with", "IN", "with", 6, "case"),
                ("citric", "JJ", "citric", 6, "amod"),
                ("acid", "NN", "acid", 3, "obl"),
                (".", ".", ".", 3, "punct"),
            ),
            # sent 1: The resulting gel was dried at 100 °C and calcined for 2 h .
            sent(
                ("The", "DT", "the", 2, "det"),
                ("resulting", "VBG", "result", 2, "amod"),
                ("gel", "NN", "gel", 4, "nsubj:pass"),
                ("was", "VBD", "be", 4, "aux:pass"),
                ("dried", "VBN", "dry", -1, "root"),
                ("at", "IN", "at", 7, "case"),
                ("100", "CD", "100", 7, "nummod"),
                ("°C", "NN", "°c", 4, "obl"),
                ("and", "CC", "and", 9, "cc"),
                ("calcined", "VBN", "calcine", 4, "conj"),
                ("for", "IN", "for", 12, "case"),
                ("2", "CD", "2", 12, "nummod"),
                ("h", "NN", "h", 9, "obl"),
                (".", ".", ".", 4, "punct"),
            ),
            # sent 2: The product was ground in a mortar .
            sent(
                ("The", "DT", "the", 1, "det"),
                ("product", "NN", "product", 3, "nsubj:pass"),
                ("was", "VBD", "be", 3, "aux:pass"),
                ("ground", "VBN", "grind", -1, "root"),
                ("in", "IN", "in", 6, "case"),
                ("a", "DT", "a", 6, "det"),
                ("mortar", "NN", "mortar", 3, "obl"),
                (".", ".", ".", 3, "punct"),
            ),
        ],
        [
            # sent 3: The phase purity was examined by X-ray diffraction .
            sent(
                ("The", "DT", "the", 2, "det"),
                ("phase", "NN", "phase", 2, "compound"),
                ("purity", "NN", "purity", 4, "nsubj:pass"),
                ("was", "VBD", "be", 4, "aux:pass"),
                ("examined", "VBN", "examine", -1, "root"),
                ("by", "IN", "by", 7, "case"),
                ("X-ray", "NN", "x-ray", 7, "compound"),
                ("diffraction", "NN", "diffraction", 4, "obl"),
                (".", ".", ".", 4, "punct"),
            ),
        ],
    ],
    "synthesis_labels": [True, False],
    "gold_mentions": [
        mention(0, 0, 1, "material"),
        mention(0, 1, 2, "descriptor"),
        mention(0, 3, 4, "operation"),
        mention(0, 5, 7, "material"),
        mention(1, 2, 3, "intermed"),
        mention(1, 4, 5, "operation"),
        mention(1, 6, 7, "number"),
        mention(1, 7, 8, "cnd_unit"),
        mention(1, 9, 10, "operation"),
        mention(1, 11, 12, "number"),
        mention(1, 12, 13, "cnd_unit"),
        mention(2, 1, 2, "intermed"),
        mention(2, 3, 4, "operation"),
        mention(2, 6, 7, "synth_aprt"),
    ],
}

DOC3 = {
    "doc_id": "sample-hydrothermal-03",
    "paragraphs": [
        [
            # sent 0: Lithium batteries demand new cathode materials .
            sent(
                ("Lithium", "NNP", "lithium", 1, "compound"),
                ("batteries", "NNS", "battery", 2, "nsubj"),
                ("demand", "VBP", "demand", -1, "root"),
                ("new", "JJ", "new", 5, "amod"),
                ("cathode", "NN", "cathode", 5, "compound"),
                ("materials", "NNS", "material", 2, "obj"),
                (".", ".", ".", 2, "punct"),
            ),
        ],
        [
            # sent 1: LiOH and MnO2 were dispersed in distilled water .
            sent(
                ("LiOH", "NNP", "lioh", 4, "nsubj:pass"),
                ("and", "CC", "and", 2, "cc"),
                ("MnO2", "NNP", "mno2", 0, "conj"),
                ("were", "VBD", "be", 4, "aux:pass"),
                ("dispersed", "VBN", "disperse", -1, "root"),
                ("in", "IN", "in", 7, "case"),
                ("distilled", "JJ", "distilled", 7, "amod"),
                ("water", "NN", "water", 4, "obl"),
                (".", ".", ".", 4, "punct"),
            ),
        ],
        [
            # sent 2: The suspension was heated to 160 °C in a Teflon vessel and
            #         cooled to room temperature .
            sent(
                ("The", "DT", "the", 1, "det"),
                ("suspension", "NN", "suspension", 3, "nsubj:pass"),
                ("was", "VBD", "be", 3, "aux:pass"),
                ("heated", "VBN", "heat", -1, "root"),
                ("to", "IN", "to", 6, "case"),
                ("160", "CD", "160", 6, "nummod"),
                ("°C", "NN", "°c", 3, "obl"),
                ("in", "IN", "in", 10, "case"),
                ("a", "DT", "a", 10, "det"),
                ("Teflon", "NNP", "teflon", 10, "compound"),
                ("vessel", "NN", "vessel", 3, "obl"),
                ("and", "CC", "and", 12, "cc"),
                ("cooled", "VBN", "cool", 3, "conj"),
                ("to", "IN", "to", 15, "case"),
                ("room", "NN", "room", 15, "compound"),
                ("temperature", "NN", "temperature", 12, "obl"),
                (".", ".", ".", 3, "punct"),
            ),
            # sent 3: The final product was filtered and washed with ethanol .
            sent(
                ("The", "DT", "the", 2, "det"),
                ("final", "JJ", "final", 2, "amod"),
                ("product", "NN", "product", 4, "nsubj:pass"),
                ("was", "VBD", "be", 4, "aux:pass"),
                ("filtered", "VBN", "filter", -1, "root"),
                ("and", "CC", "and", 6, "cc"),
                ("washed", "VBN", "wash", 4, "conj"),
                ("with", "IN", "with", 8, "case"),
                ("ethanol", "NN", "ethanol", 6, "obl"),
                (".", ".", ".", 4, "punct"),
            ),
        ],
    ],
    "synthesis_labels": [False, True, True],
    "gold_mentions": [
        mention(1, 0, 1, "material"),
        mention(1, 2, 3, "material"),
        mention(1, 4, 5, "operation"),
        mention(1, 6, 8, "material"),
        mention(2, 1, 2, "intermed"),
        mention(2, 3, 4, "operation"),
        mention(2, 5, 6, "number"),
        mention(2, 6, 7, "cnd_unit"),
        mention(2, 9, 11, "synth_aprt"),
        mention(2, 12, 13, "operation"),
        mention(2, 14, 16, "cnd_misc"),
        mention(3, 1, 2, "descriptor"),
        mention(3, 2, 3, "intermed"),
        mention(3, 4, 5, "operation"),
        mention(3, 6, 7, "operation"),
        mention(3, 8, 9, "material"),
    ],
}


def derive_gold_graph(record: dict) -> dict:
    """Gold graph = events from gold mentions + sequential reference edges."""
    doc = C.document_from_dict({k: v for k, v in record.items() if k != "gold_graph"})
    synthesis = [i for i, flag in enumerate(record["synthesis_labels"]) if flag]
    sentences = [s for i in synthesis for s in doc.paragraphs[i]]
    wanted = {s.sent_id for s in sentences}
    mentions = [m for m in doc.gold_mentions if m.sent_id in wanted]
    evs = E.extract_events(sentences, mentions)
    E.add_implicit_arguments(evs)
    graph = induce_edges_sequential(assemble_graph(evs))
    validate_graph(graph, doc)
    return graph.to_dict()


def vec_for(word: str, dim: int) -> list[float]:
    """Deterministic pseudo-random unit-scale vector from the word's hash."""
    digest = hashlib.sha256(word.encode("utf-8")).digest()
    vals = [(digest[i] / 255.0) * 2.0 - 1.0 for i in range(dim)]
    return [round(v, 4) for v in vals]


LEXICONS = {
    "operations": [
        "dissolved", "stirred", "appeared", "sealed", "maintained", "mixed",
        "dried", "calcined", "ground", "dispersed", "heated", "cooled",
        "filtered", "washed", "annealed", "sintered",
    ],
    "stopwords": [
        "the", "a", "an", "was", "were", "and", "in", "with", "for", "at",
        "to", "of", "under", "by", "have",
    ],
    "chemicals": [
        "agno3", "nh4vo3", "water", "ethanol", "lioh", "mno2", "tio2",
        "acid", "citric", "silver", "lithium",
    ],
    "conditions": ["°c", "h", "min", "k", "°f"],
    "amounts": ["mg", "g", "ml", "mol", "wt%"],
    "descriptors": [
        "black", "final", "resulting", "deionized", "distilled", "vigorous",
        "white", "broad", "new",
    ],
    "apparatuses": ["autoclave", "mortar", "vessel", "furnace", "oven", "crucible"],
}


def main() -> None:
    DATA.mkdir(exist_ok=True)
    records = []
    for record in (DOC1, DOC2, DOC3):
        record = dict(record)
        record["gold_graph"] = derive_gold_graph(record)
        records.append(record)
    with open(DATA / "sample_corpus.jsonl", "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
    # Round-trip check: the written corpus must load and validate.
    docs = C.load_corpus(DATA / "sample_corpus.jsonl")
    assert len(docs) == 3 and all(d.gold_graph is not None for d in docs)

    dim = 8
    vocab = sorted(
        {
            tok["surface"]
            for record in records
            for para in record["paragraphs"]
            for sentence in para
            for tok in sentence
        }
    )
    with open(DATA / "embeddings.txt", "w", encoding="utf-8") as fh:
        for word in vocab:
            values = " ".join(f"{v:.4f}" for v in vec_for(word, dim))
            fh.write(f"{word} {values}\n")

    lexdir = DATA / "lexicons"
    lexdir.mkdir(exist_ok=True)
    for name, terms in LEXICONS.items():
        with open(lexdir / f"{name}.txt", "w", encoding="utf-8") as fh:
            fh.write("\n".join(terms) + "\n")
    print(f"wrote {len(records)} documents, {len(vocab)} embeddings, {len(LEXICONS)} lexicons")


if __name__ == "__main__":
    main()
