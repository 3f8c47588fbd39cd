"""Integrity listener for registered stub artifacts.

Watches metadata-change events against an injected process registry: a
change while the artifact's stub process is active is authorized, a change
while it is inactive raises an unauthorized-change alert for relay to the
coordinator.  The event source is abstract (simulated ticks), so the
judging logic stays portable and testable; hooking a real filesystem
watcher underneath is possible but out of scope here.

Fingerprints (SHA-1 of content) are computed once at registration and at
most once per content-change event; metadata-change events cost no hashing
at all, keeping the monitor's overhead marginal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .sha1 import sha1

METADATA_CHANGE = "metadata_change"
CONTENT_CHANGE = "content_change"
_KINDS = (METADATA_CHANGE, CONTENT_CHANGE)

AUTHORIZED = "authorized"
UNAUTHORIZED = "unauthorized"


class DuplicateArtifactError(ValueError):
    """Artifact id already registered."""


class TraceParseError(ValueError):
    """Trace line did not parse; carries the line number."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


@dataclass
class WatchedArtifact:
    artifact_id: str
    fingerprint: bytes
    last_change_tick: int = -1


@dataclass(frozen=True)
class ProcessRegistry:
    """Point-in-time snapshot of active processes: pid -> artifact id."""

    processes: tuple[tuple[int, str], ...] = ()

    def stub_active(self, artifact_id: str) -> bool:
        return any(aid == artifact_id for _, aid in self.processes)


@dataclass(frozen=True)
class ChangeEvent:
    tick: int
    kind: str
    artifact_id: str
    content: bytes | None = None


@dataclass(frozen=True)
class IntegrityEvent:
    tick: int
    artifact_id: str
    kind: str
    judged: str


@dataclass(frozen=True)
class Alert:
    tick: int
    artifact_id: str
    kind: str


@dataclass
class Sentinel:
    watched: dict[str, WatchedArtifact] = field(default_factory=dict)
    alerts: list[Alert] = field(default_factory=list)
    ignored_events: int = 0
    fingerprint_computations: int = 0

    def register(self, artifact_id: str, content: bytes) -> WatchedArtifact:
        if artifact_id in self.watched:
            raise DuplicateArtifactError(f"artifact {artifact_id!r} already watched")
        artifact = WatchedArtifact(artifact_id=artifact_id, fingerprint=sha1(content))
        self.watched[artifact_id] = artifact
        return artifact

    def on_event(self, event: ChangeEvent, registry: ProcessRegistry) -> IntegrityEvent | None:
        """Judge one change event against the registry state at its tick."""
        if event.kind not in _KINDS:
            raise ValueError(f"unknown event kind {event.kind!r}")
        artifact = self.watched.get(event.artifact_id)
        if artifact is None:
            self.ignored_events += 1
            return None
        artifact.last_change_tick = event.tick
        if event.kind == CONTENT_CHANGE and event.content is not None:
            artifact.fingerprint = sha1(event.content)
            self.fingerprint_computations += 1
        judged = AUTHORIZED if registry.stub_active(event.artifact_id) else UNAUTHORIZED
        if judged == UNAUTHORIZED:
            self.alerts.append(Alert(tick=event.tick, artifact_id=event.artifact_id, kind=event.kind))
        return IntegrityEvent(
            tick=event.tick, artifact_id=event.artifact_id, kind=event.kind, judged=judged
        )


def parse_trace(lines: list[str] | str) -> list[tuple[ChangeEvent, ProcessRegistry]]:
    """Parse a trace: one event per line, ``tick kind artifact_id [pid:artifact ...]``.

    The trailing tokens list the processes active at that tick.  Blank lines
    and ``#`` comments are skipped.
    """
    if isinstance(lines, str):
        lines = lines.splitlines()
    events = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) < 3:
            raise TraceParseError(lineno, f"expected 'tick kind artifact_id ...', got {line!r}")
        try:
            tick = int(tokens[0])
        except ValueError:
            raise TraceParseError(lineno, f"tick {tokens[0]!r} is not an integer") from None
        kind = tokens[1]
        if kind not in _KINDS:
            raise TraceParseError(lineno, f"unknown event kind {kind!r}")
        procs = []
        for tok in tokens[3:]:
            pid_str, sep, aid = tok.partition(":")
            if not sep or not aid:
                raise TraceParseError(lineno, f"process entry {tok!r} is not pid:artifact_id")
            try:
                procs.append((int(pid_str), aid))
            except ValueError:
                raise TraceParseError(lineno, f"pid {pid_str!r} is not an integer") from None
        events.append(
            (
                ChangeEvent(tick=tick, kind=kind, artifact_id=tokens[2]),
                ProcessRegistry(processes=tuple(procs)),
            )
        )
    return events


def replay_trace(trace: str | Path | list[str]) -> list[Alert]:
    """Replay a trace file (or its lines) and return the alerts it produces.

    Every artifact named in the trace is watched from its first appearance;
    alerts are a pure function of the trace text.
    """
    if isinstance(trace, Path):
        lines = trace.read_text().splitlines()
    elif isinstance(trace, str) and trace and "\n" not in trace and Path(trace).is_file():
        lines = Path(trace).read_text().splitlines()
    else:
        lines = trace if isinstance(trace, list) else trace.splitlines()
    sentinel = Sentinel()
    for event, registry in parse_trace(lines):
        if event.artifact_id not in sentinel.watched:
            sentinel.register(event.artifact_id, b"")
        sentinel.on_event(event, registry)
    return list(sentinel.alerts)
