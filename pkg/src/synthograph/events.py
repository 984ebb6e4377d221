"""Sentence-to-event segmentation and event assembly.

Multi-operation sentences are split into event phrases by breaking off the
dependency subtree of every token that attaches to the sentence root with a
`conj` relation; tagged mentions are then grouped into events per phrase and
implicit argument nodes are inserted for elided intermediates/apparatuses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

from . import diagnostics
from .graph import APPARATUS, IMPLICIT_LEMMA, INTERMEDIATE, RAW_MATERIAL, span_head_lemma

if TYPE_CHECKING:
    from .corpus import EntityMention, Sentence

# Entity label -> argument semantic type; unlisted labels carry no node.
LABEL_TO_SEM = {
    "material": RAW_MATERIAL,
    "target": RAW_MATERIAL,
    "intermed": INTERMEDIATE,
    "synth_aprt": APPARATUS,
}
OPERATION_LABEL = "operation"


@dataclass(frozen=True)
class EventPhrase:
    sent_id: int
    tokens: frozenset[int]
    head: int


@dataclass
class Operation:
    sent_id: int
    start: int
    end: int
    lemma: str


@dataclass
class EventArgument:
    sem_type: str
    implicit: bool = False
    sent_id: int | None = None
    start: int | None = None
    end: int | None = None
    head_lemma: str | None = None


@dataclass
class Event:
    sent_id: int
    operation: Operation | None
    arguments: list[EventArgument] = field(default_factory=list)
    event_index: int = -1

    def has_argument(self, sem_type: str) -> bool:
        return any(a.sem_type == sem_type for a in self.arguments)


def split_sentence_events(sentence: "Sentence", operation_count: int) -> list[EventPhrase]:
    """Partition a sentence into event phrases via the conj-to-root heuristic.

    Applied only to sentences holding multiple operation mentions; otherwise
    the whole sentence is one phrase headed by the parse root.
    """
    root = sentence.root_index()
    whole = EventPhrase(
        sent_id=sentence.sent_id, tokens=frozenset(range(len(sentence.tokens))), head=root
    )
    if operation_count <= 1:
        return [whole]
    conj_heads = [
        i
        for i, t in enumerate(sentence.tokens)
        if t.dep_label == "conj" and t.dep_head == root
    ]
    if not conj_heads:
        return [whole]
    phrases = []
    split_off: set[int] = set()
    for head in conj_heads:
        sub = sentence.subtree(head)
        phrases.append(EventPhrase(sent_id=sentence.sent_id, tokens=frozenset(sub), head=head))
        split_off |= sub
    main = frozenset(range(len(sentence.tokens))) - split_off
    phrases.append(EventPhrase(sent_id=sentence.sent_id, tokens=main, head=root))
    phrases.sort(key=lambda p: p.head)
    return phrases


def build_events(
    phrases: Sequence[EventPhrase],
    mentions: Iterable["EntityMention"],
    sentence: "Sentence",
) -> list[Event]:
    """Group mentions into one event per phrase.

    A mention belongs to the phrase containing its start token. The first
    operation mention of a phrase anchors the event; any further ones are
    dropped with a diagnostic. Mentions with unmapped labels are ignored.
    """
    per_phrase: list[list["EntityMention"]] = [[] for _ in phrases]
    for m in sorted(mentions, key=lambda m: (m.start, m.end)):
        for i, phrase in enumerate(phrases):
            if m.start in phrase.tokens:
                per_phrase[i].append(m)
                break
    events = []
    for phrase, members in zip(phrases, per_phrase):
        operation = None
        arguments = []
        for m in members:
            if m.label == OPERATION_LABEL:
                if operation is None:
                    operation = Operation(
                        sent_id=m.sent_id,
                        start=m.start,
                        end=m.end,
                        lemma=span_head_lemma(sentence, m.start, m.end),
                    )
                else:
                    diagnostics.emit(
                        "extra_operation_dropped",
                        sent_id=m.sent_id,
                        start=m.start,
                        end=m.end,
                    )
                continue
            sem = LABEL_TO_SEM.get(m.label)
            if sem is None:
                continue
            arguments.append(
                EventArgument(
                    sem_type=sem,
                    sent_id=m.sent_id,
                    start=m.start,
                    end=m.end,
                    head_lemma=span_head_lemma(sentence, m.start, m.end),
                )
            )
        if operation is None and not arguments:
            diagnostics.emit("degenerate_event", sent_id=phrase.sent_id, head=phrase.head)
        events.append(Event(sent_id=phrase.sent_id, operation=operation, arguments=arguments))
    return events


def extract_events(
    sentences: Sequence["Sentence"], mentions: Iterable["EntityMention"]
) -> list[Event]:
    """Run splitting and grouping over a whole procedure, in reading order."""
    by_sent: dict[int, list["EntityMention"]] = {}
    for m in mentions:
        by_sent.setdefault(m.sent_id, []).append(m)
    events: list[Event] = []
    for sent in sentences:
        sent_mentions = by_sent.get(sent.sent_id, [])
        n_ops = sum(1 for m in sent_mentions if m.label == OPERATION_LABEL)
        phrases = split_sentence_events(sent, n_ops)
        events.extend(build_events(phrases, sent_mentions, sent))
    for i, ev in enumerate(events):
        ev.event_index = i
    return events


def add_implicit_arguments(events: list[Event]) -> list[Event]:
    """Insert implicit intermediate/apparatus nodes for elided arguments.

    Every event after the first lacking an intermediate argument gains an
    implicit one; every event lacking an apparatus argument gains an
    implicit apparatus. The first event gets no implicit intermediate since
    nothing precedes it.
    """
    for i, ev in enumerate(events):
        if i > 0 and not ev.has_argument(INTERMEDIATE):
            ev.arguments.append(
                EventArgument(sem_type=INTERMEDIATE, implicit=True, head_lemma=IMPLICIT_LEMMA)
            )
        if not ev.has_argument(APPARATUS):
            ev.arguments.append(
                EventArgument(sem_type=APPARATUS, implicit=True, head_lemma=IMPLICIT_LEMMA)
            )
    return events
