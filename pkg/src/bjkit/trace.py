"""Trace event emission: JSON-lines sinks for solver runs.

Events carry a strictly increasing `seq` and a `kind` from:
decide, propagate, conflict, throw, catch, learn, solution, unsat.
Payload fields are kind-specific and JSON-serialisable.
"""

from __future__ import annotations

import json
from typing import IO, Optional


class TraceSink:
    """Collects events in memory and optionally streams them as JSONL.

    File output is flushed per event so a crashed run still leaves a
    usable prefix.
    """

    def __init__(self, stream: Optional[IO[str]] = None, keep: bool = True):
        self.stream = stream
        self.keep = keep
        self.events: list[dict] = []
        self._seq = 0

    def emit(self, kind: str, **payload) -> None:
        self._seq += 1
        event = {"seq": self._seq, "kind": kind}
        event.update(payload)
        if self.keep:
            self.events.append(event)
        if self.stream is not None:
            self.stream.write(json.dumps(event) + "\n")
            self.stream.flush()

    def of_kind(self, *kinds: str) -> list[dict]:
        return [e for e in self.events if e["kind"] in kinds]
