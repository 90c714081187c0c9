"""Renderers for run events and final documents.

The engine and the CLI report through one :class:`Emitter`; the subclass
decides what reaches the terminal. Event payloads come straight from numpy
code, so they are coerced to plain JSON values (numpy scalars unwrapped,
NaN and infinities as null) before an :class:`Event` is built.
"""

from __future__ import annotations

import json
import math
import sys
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from datetime import datetime, timezone
from typing import Any, TextIO
from uuid import UUID, uuid4

import numpy as np

from contract import Document, Event, EventLevel, EventType, Warning


# progress fields shown by the human renderer, in display order
PROGRESS_FIELDS = ("energy", "mu1", "mu2", "area_in", "flips", "dt")


def jsonable(value: Any) -> Any:
    """Plain-Python copy of ``value`` that ``json.dumps`` accepts strictly."""
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, Mapping):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, Sequence) and not isinstance(value, (str, bytes)):
        return [jsonable(item) for item in value]
    return value


def dumps(payload: Any, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(
            payload, ensure_ascii=False, allow_nan=False, indent=2, sort_keys=True
        )
    return json.dumps(
        payload, ensure_ascii=False, allow_nan=False, separators=(",", ":")
    )


def document_payload(document: Document) -> dict[str, Any]:
    """Serialize a document the same way for stdout and for files."""
    return jsonable(document.model_dump(mode="json", by_alias=True))


class Emitter(ABC):
    """Event source shared by every output mode.

    Sequence numbers count rendered and suppressed events alike, so two
    modes fed the same run agree on numbering.
    """

    def __init__(
        self,
        request_id: UUID | None = None,
        stdout: TextIO | None = None,
        stderr: TextIO | None = None,
        quiet: bool = False,
    ) -> None:
        self.request_id = request_id or uuid4()
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.quiet = quiet
        self.sequence = 0
        self.warnings: list[Warning] = []
        self.progress_emitted = 0
        self.ended = False

    def log(self, message: str) -> None:
        if not self.quiet:
            self._render_log(message)

    def start(self, data: dict[str, Any]) -> None:
        self._emit(EventType.START, "info", data)

    def progress(self, data: dict[str, Any]) -> None:
        self.progress_emitted += 1
        self._emit(EventType.PROGRESS, "info", data)

    def warning(self, code: str, detail: str, iteration: int | None = None) -> None:
        warning = Warning(code=code, detail=detail, iteration=iteration)
        self.warnings.append(warning)
        self._emit(
            EventType.WARNING,
            "warning",
            warning.model_dump(exclude_none=True, exclude={"level"}),
        )

    def error(self, data: dict[str, Any]) -> None:
        self._emit(EventType.ERROR, "error", data)

    def end(self, data: dict[str, Any]) -> None:
        """Commit the stream. A second call is ignored."""
        if self.ended:
            return
        self._emit(EventType.END, "info", data)
        self.ended = True

    def finalize(self, document: Document) -> None:
        self._render_document(document)

    def _emit(self, event_type: EventType, level: EventLevel, data: dict) -> None:
        if self.ended:
            raise RuntimeError("Events after end are forbidden")
        event = Event(
            request_id=self.request_id,
            event_id=uuid4(),
            sequence=self.sequence,
            time=datetime.now(timezone.utc),
            level=level,
            type=event_type,
            data=jsonable(data),
        )
        self.sequence += 1
        self._render_event(event)

    @abstractmethod
    def _render_event(self, event: Event) -> None: ...

    @abstractmethod
    def _render_document(self, document: Document) -> None: ...

    def _render_log(self, message: str) -> None:
        pass


def format_progress(data: Mapping[str, Any]) -> str:
    """``iter 50: energy=-0.25 mu1=0.9 ...`` for the fields present."""
    parts = [f"iter {data['iteration']}:"]
    for name in PROGRESS_FIELDS:
        if name not in data:
            continue
        value = data[name]
        shown = f"{value:.6g}" if isinstance(value, float) else str(value)
        parts.append(f"{name}={shown}")
    return " ".join(parts)


class HumanEmitter(Emitter):
    """Terminal renderer: progress and summary on stdout, problems on stderr.

    ``quiet`` drops progress, warnings and the success summary; errors are
    always shown.
    """

    def _render_event(self, event: Event) -> None:
        if event.type == EventType.ERROR:
            self.stderr.write(f"Error: {event.data['message']}\n")
        elif self.quiet:
            return
        elif event.type == EventType.PROGRESS:
            self.stdout.write(format_progress(event.data) + "\n")
        elif event.type == EventType.WARNING:
            self.stderr.write(f"Warning: {event.data['detail']}\n")

    def _render_document(self, document: Document) -> None:
        if self.quiet and document.error is None:
            return
        for line in document.summary_lines():
            self.stdout.write(line + "\n")

    def _render_log(self, message: str) -> None:
        self.stdout.write(message + "\n")


class PlainEmitter(HumanEmitter):
    """Human renderer for pipes and logs; same lines, no progress chatter."""

    def _render_event(self, event: Event) -> None:
        if event.type != EventType.PROGRESS:
            super()._render_event(event)


class JSONEmitter(Emitter):
    """One compact document on stdout once the command finishes."""

    def _render_event(self, event: Event) -> None:
        return

    def _render_document(self, document: Document) -> None:
        self.stdout.write(dumps(document_payload(document)) + "\n")


class NDJSONEmitter(Emitter):
    """Streaming renderer that writes one JSON event per line."""

    def _render_event(self, event: Event) -> None:
        payload = event.model_dump(mode="json", by_alias=True, exclude_none=True)
        self.stdout.write(dumps(payload) + "\n")
        self.stdout.flush()

    def _render_document(self, document: Document) -> None:
        return
