"""Semantic exception hierarchy for the co-adaptation engine.

Public functions raise these instead of bare ValueError so callers can
distinguish contract violations (bad inputs) from mathematical infeasibility
(a game without the requested equilibrium).
"""


class CoadaptError(Exception):
    """Base error for this package."""


class DomainError(CoadaptError, ValueError):
    """Cost evaluated outside its domain (Cobb-Douglas positivity region)."""


class InfeasiblePolicyError(CoadaptError):
    """A policy violates the responder's second-order condition."""


class DegenerateGameError(CoadaptError):
    """A solve ran into a singular linear system or indefinite Hessian."""


class SingularIterationError(CoadaptError):
    """A slope-map denominator vanished mid-iteration."""


class SteeringInfeasibleError(CoadaptError):
    """No anchored linear policy steers the follower to the requested target."""


class DesignInfeasibleError(CoadaptError):
    """Inverse game design cannot place the requested equilibria.

    The message names the violated condition.
    """


class ConjectureUndefinedError(CoadaptError):
    """Conjecture estimation hit a near-zero action difference."""


class PairingError(CoadaptError):
    """A trial pair is missing a phase or has duplicates."""


class ReplayError(CoadaptError):
    """A session log is corrupt or diverges from the engine during replay."""


class SessionStateError(CoadaptError):
    """An event arrived in a session state that cannot accept it."""


class ConfigError(CoadaptError, ValueError):
    """An experiment or game configuration failed validation."""
