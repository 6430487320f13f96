"""Real-time session service: wire protocol, session engine, persistence."""

from .session import Session, SessionStatus
from .replay import replay_log

__all__ = ["Session", "SessionStatus", "replay_log"]
