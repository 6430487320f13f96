"""Wire protocol: JSON messages with a `type` tag.

Client to server
----------------
    {"type": "hello", "session": "<id>"}            attach to a session
    {"type": "begin"}                               leave the intro screen
    {"type": "input", "x": 0.37, "t": 1712.5}       normalized cursor sample;
                                                    x is clamped to [-1, 1],
                                                    t is the client clock
                                                    (logged, never trusted)
    {"type": "survey", "scores": [s1..s6], "feedback": "..."}
                                                    six integers in [-10, 10]

Server to client
----------------
    {"type": "welcome", "experiment": 1, "trials": 14, "status": "intro"}
    {"type": "trialStart", "index": 0, "target": 0.23}
    {"type": "frame", "display": 0.31, "i": 17}     display = sqrt-cost
    {"type": "trialEnd", "index": 0}
    {"type": "restStart", "seconds": 30}
    {"type": "surveyPrompt"}
    {"type": "experimentEnd"}
    {"type": "notice", "message": "..."}
    {"type": "error", "code": "...", "message": "..."}

The machine's action never appears in any server message.
"""

from __future__ import annotations

import json
from typing import Any

from ..errors import SessionStateError

CLIENT_TYPES = ("hello", "begin", "input", "survey")


def decode_client_event(raw: str | bytes) -> dict[str, Any]:
    try:
        event = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SessionStateError(f"malformed client message: {exc}") from exc
    if not isinstance(event, dict) or event.get("type") not in CLIENT_TYPES:
        raise SessionStateError(f"unknown client message type: {event!r}")
    if event["type"] == "input":
        if not isinstance(event.get("x"), (int, float)):
            raise SessionStateError("input event needs a numeric x")
    if event["type"] == "survey":
        scores = event.get("scores")
        if (not isinstance(scores, list) or len(scores) != 6
                or not all(isinstance(s, int) and -10 <= s <= 10 for s in scores)):
            raise SessionStateError("survey needs six integers in [-10, 10]")
        if not isinstance(event.get("feedback", ""), str):
            raise SessionStateError("survey feedback must be a string")
    return event


def encode(event: dict[str, Any]) -> str:
    return json.dumps(event, sort_keys=True, separators=(",", ":"))


def clamp_input(x: float) -> float:
    return min(1.0, max(-1.0, float(x)))


def welcome(experiment: int, trials: int, status: str) -> dict:
    return {"type": "welcome", "experiment": experiment, "trials": trials,
            "status": status}


def trial_start(index: int, target: float) -> dict:
    return {"type": "trialStart", "index": index, "target": target}


def frame(display: float, i: int) -> dict:
    return {"type": "frame", "display": display, "i": i}


def trial_end(index: int) -> dict:
    return {"type": "trialEnd", "index": index}


def rest_start(seconds: float) -> dict:
    return {"type": "restStart", "seconds": seconds}


def survey_prompt() -> dict:
    return {"type": "surveyPrompt"}


def experiment_end() -> dict:
    return {"type": "experimentEnd"}


def notice(message: str) -> dict:
    return {"type": "notice", "message": message}


def error(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}
