"""Append-only session logs and deterministic replay.

A session log is newline-delimited JSON.  The first record carries the full
config; afterwards every client event and every clock tick is appended in
arrival order, along with the derived transitions the engine emitted.  No
record is ever mutated.

Replay rebuilds a fresh engine from the logged config and re-drives it with
the logged client events and ticks.  Because the engine is deterministic,
the regenerated log must match the original record for record; the first
divergence raises ReplayError.  The replayed engine's trial records and
strategy trace are the authoritative analysis inputs for live sessions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import ReplayError
from ..harness import TraceRow, TrialRecord, config_from_dict
from .session import Session

#: log entry kinds that drive the engine (everything else is derived)
_DRIVE_KINDS = ("begin", "input", "survey")


def encode_log_entry(entry: dict) -> str:
    return json.dumps(entry, sort_keys=True, separators=(",", ":"))


def write_log(entries: Iterable[dict], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="\n") as fh:
        for entry in entries:
            fh.write(encode_log_entry(entry) + "\n")
    return path


def read_log(path: str | Path) -> list[dict]:
    entries = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ReplayError(f"corrupt log at line {lineno}: {exc}") from exc
    return entries


@dataclass(frozen=True)
class ReplayResult:
    records: tuple[TrialRecord, ...]
    trace: tuple[TraceRow, ...]
    complete: bool
    error: str | None


def replay_log(entries: Sequence[dict]) -> ReplayResult:
    """Re-drive a fresh engine from a log; verify it regenerates the log.

    Raises ReplayError at the first divergent or malformed record.  Returns
    the regenerated trial records and strategy trace; `complete` is False
    for truncated logs (sessions that never reached their end record).
    """
    if not entries or entries[0].get("e") != "create":
        raise ReplayError("log does not start with a create record")
    try:
        cfg = config_from_dict(entries[0]["cfg"])
    except Exception as exc:
        raise ReplayError(f"bad config in create record: {exc}") from exc
    session = Session(entries[0].get("id", "replay"), cfg)
    if session.log[0] != entries[0]:
        raise ReplayError("config in create record does not round-trip")

    for position, entry in enumerate(entries[1:], 2):
        kind = entry.get("e")
        if kind == "begin":
            session.handle({"type": "begin"})
        elif kind == "input":
            session.handle({"type": "input", "x": entry["x"], "t": entry.get("t")})
        elif kind == "survey":
            session.handle({"type": "survey", "scores": entry["scores"],
                            "feedback": entry.get("feedback", "")})
        elif kind == "tick":
            session.tick()
        elif kind in ("trialStart", "trialEnd", "update", "restStart",
                      "surveyPrompt", "retry", "abort", "end"):
            pass  # derived; checked below
        else:
            raise ReplayError(f"unknown log record kind {kind!r} at line {position}")

        regenerated = session.log[position - 1] if len(session.log) >= position else None
        if regenerated != entry:
            raise ReplayError(
                f"replay diverged at line {position}: logged {entry!r}, "
                f"regenerated {regenerated!r}")

    if len(session.log) != len(entries):
        raise ReplayError("replay produced extra records beyond the log")
    complete = any(e.get("e") == "end" for e in entries)
    return ReplayResult(tuple(session.records), tuple(session.trace),
                        complete, session.ended_with_error)
