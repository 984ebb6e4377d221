"""Structured diagnostic stream shared by the extraction stages.

Each dropped or degenerate item is logged as one JSON record on the
`synthograph` logger. The CLI attaches a counting handler to roll the
records up into the run manifest.
"""

from __future__ import annotations

import json
import logging
from collections import Counter

logger = logging.getLogger("synthograph")


def emit(event: str, **fields) -> None:
    record = {"event": event, **fields}
    logger.info("%s", json.dumps(record, sort_keys=True), extra={"diag_event": event})


class DiagnosticCounter(logging.Handler):
    """Counts diagnostic records by event name."""

    def __init__(self) -> None:
        super().__init__(level=logging.INFO)
        self.counts: Counter[str] = Counter()

    def emit(self, record: logging.LogRecord) -> None:  # pragma: no cover - trivial
        event = getattr(record, "diag_event", None)
        if event is not None:
            self.counts[event] += 1
