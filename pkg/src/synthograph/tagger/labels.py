"""Tag alphabet (entity labels crossed with BILOU positions) and span codec."""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from ..corpus import ENTITY_LABELS, EntityMention

POSITIONS = ("B", "I", "L", "U")
OUTSIDE = "O"


class LabelAlphabet:
    """Dense tag ids: O is 0, then B/I/L/U per entity label in order."""

    def __init__(self, labels: Iterable[str] = ENTITY_LABELS):
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate entity labels")
        self._tags = (OUTSIDE,) + tuple(
            f"{pos}-{label}" for label in self.labels for pos in POSITIONS
        )
        self._ids = {tag: i for i, tag in enumerate(self._tags)}

    def __len__(self) -> int:
        return len(self._tags)

    @property
    def n_tags(self) -> int:
        return len(self._tags)

    @property
    def outside_id(self) -> int:
        return 0

    def tag_name(self, tag_id: int) -> str:
        return self._tags[tag_id]

    def tag_id(self, name: str) -> int:
        return self._ids[name]

    def split(self, tag_id: int) -> tuple[str | None, str | None]:
        """(position, label) for a tag id; (None, None) for O."""
        if tag_id == 0:
            return None, None
        pos, label = self._tags[tag_id].split("-", 1)
        return pos, label

    def allowed_start(self, tag_id: int) -> bool:
        pos, _ = self.split(tag_id)
        return pos in (None, "B", "U")

    def allowed_end(self, tag_id: int) -> bool:
        pos, _ = self.split(tag_id)
        return pos in (None, "L", "U")

    def allowed_transition(self, prev: int, cur: int) -> bool:
        ppos, plabel = self.split(prev)
        cpos, clabel = self.split(cur)
        if ppos in ("B", "I"):
            # An open span must continue or close under the same label.
            return cpos in ("I", "L") and clabel == plabel
        # O, L-x and U-x close cleanly; the next tag must not continue a span.
        return cpos in (None, "B", "U")

    @cached_property
    def start_mask(self) -> np.ndarray:
        return np.array([self.allowed_start(i) for i in range(len(self))], dtype=bool)

    @cached_property
    def end_mask(self) -> np.ndarray:
        return np.array([self.allowed_end(i) for i in range(len(self))], dtype=bool)

    @cached_property
    def transition_mask(self) -> np.ndarray:
        n = len(self)
        mask = np.zeros((n, n), dtype=bool)
        for a in range(n):
            for b in range(n):
                mask[a, b] = self.allowed_transition(a, b)
        return mask

    def is_wellformed(self, tags: Sequence[int]) -> bool:
        tags = list(tags)
        if not tags:
            return True
        if not self.allowed_start(tags[0]) or not self.allowed_end(tags[-1]):
            return False
        return all(self.allowed_transition(a, b) for a, b in zip(tags, tags[1:]))


def bilou_encode(
    mentions: Iterable[EntityMention], length: int, alphabet: LabelAlphabet
) -> np.ndarray:
    """Encode non-overlapping mentions as a BILOU tag-id sequence."""
    tags = np.zeros(length, dtype=int)
    ordered = sorted(mentions, key=lambda m: (m.start, m.end))
    prev_end = 0
    for m in ordered:
        if not 0 <= m.start < m.end <= length:
            raise ValueError(f"mention span ({m.start},{m.end}) out of bounds for length {length}")
        if m.start < prev_end:
            raise ValueError(f"overlapping mentions at token {m.start}")
        prev_end = m.end
        if m.label not in alphabet.labels:
            raise ValueError(f"unknown label {m.label!r}")
        if m.end - m.start == 1:
            tags[m.start] = alphabet.tag_id(f"U-{m.label}")
        else:
            tags[m.start] = alphabet.tag_id(f"B-{m.label}")
            tags[m.start + 1 : m.end - 1] = alphabet.tag_id(f"I-{m.label}")
            tags[m.end - 1] = alphabet.tag_id(f"L-{m.label}")
    return tags


def bilou_decode(
    tags: Sequence[int], alphabet: LabelAlphabet, sent_id: int = 0
) -> list[EntityMention]:
    """Decode any tag sequence into mentions, repairing ill-formed runs.

    An I or L with no open segment of its label opens one (acts as B); a
    segment still open at a label change or at the end of the sentence is
    closed at the previous token.
    """
    mentions: list[EntityMention] = []
    open_label: str | None = None
    open_start = 0

    def close(end: int) -> None:
        nonlocal open_label
        if open_label is not None and end > open_start:
            mentions.append(EntityMention(sent_id=sent_id, start=open_start, end=end, label=open_label))
        open_label = None

    for t, tag_id in enumerate(tags):
        pos, label = alphabet.split(int(tag_id))
        if pos is None:
            close(t)
        elif pos == "U":
            close(t)
            mentions.append(EntityMention(sent_id=sent_id, start=t, end=t + 1, label=label))
        elif pos == "B":
            close(t)
            open_label, open_start = label, t
        elif label == open_label:
            if pos == "L":
                mentions.append(
                    EntityMention(sent_id=sent_id, start=open_start, end=t + 1, label=label)
                )
                open_label = None
        else:
            close(t)
            open_label, open_start = label, t
    close(len(tags))
    return mentions
