"""Co-adaptation game engine.

Solves general-sum two-player scalar games (optima, Nash, Stackelberg,
consistent conjectural variations, reverse Stackelberg), designs games from
target equilibria, runs the three machine adaptation algorithms against
simulated or live humans, and hosts real-time experiment sessions.
"""

from .games import (
    AffinePolicy,
    CANONICAL_GAME,
    COBB_GAME,
    CobbDouglasGame,
    HybridGame,
    JointAction,
    Player,
    ScalarQuadraticGame,
    display_value,
    eval_cost,
    grad,
    grad_with_conjecture,
    human_best_response_to_action,
    human_best_response_to_policy,
)
from .equilibria import EquilibriumReport, Stability, solve_report

__all__ = [
    "AffinePolicy",
    "CANONICAL_GAME",
    "COBB_GAME",
    "CobbDouglasGame",
    "EquilibriumReport",
    "HybridGame",
    "JointAction",
    "Player",
    "ScalarQuadraticGame",
    "Stability",
    "display_value",
    "eval_cost",
    "grad",
    "grad_with_conjecture",
    "human_best_response_to_action",
    "human_best_response_to_policy",
    "solve_report",
]

__version__ = "0.1.0"
