"""Simulated human opponents.

Three models, mirroring the simulations that accompany the experiments:

* ``FDGradientHuman`` -- estimates its own cost gradient by perturbing its
  action, holding each probe for K machine steps, and descending the
  resulting finite difference.  One human step per K machine steps.
* ``ConjAwareHuman`` -- descends the exact gradient of its cost along its
  own action under a conjecture of the machine's policy slope.
* ``BestResponder`` -- the noise-free oracle: jumps straight to the exact
  best response (to a policy, or myopically to the current machine action).

All models are deterministic given (seed, config); optional observation
noise is zero-mean uniform and off by default.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .games import (
    AffinePolicy,
    CobbDouglasGame,
    Game,
    HybridGame,
    JointAction,
    Player,
    grad_with_conjecture,
    human_best_response,
    human_best_response_to_action,
)

DEFAULT_FD_BETA = 0.003
DEFAULT_FD_PROBE = 1e-5
DEFAULT_CONJ_BETA = 3e-3


def _human_bounds(game: Game) -> Optional[tuple[float, float]]:
    if isinstance(game, CobbDouglasGame):
        return game.human_bounds
    if isinstance(game, HybridGame):
        return game.human_side.human_bounds
    return None


def _clip(x: float, bounds: Optional[tuple[float, float]]) -> float:
    if bounds is None:
        return x
    return min(bounds[1], max(bounds[0], x))


@dataclass
class FDGradientHuman:
    """Finite-difference gradient-descent human.

    The harness runs the two probe passes (perturbed action held for K
    machine steps, then nominal) and feeds the observed costs to `step`.
    """

    game: Game
    h: float = 0.0
    beta: float = DEFAULT_FD_BETA
    probe: float = DEFAULT_FD_PROBE
    K: int = 1
    noise: float = 0.0
    rng: random.Random = field(default_factory=lambda: random.Random(0))

    def observe(self, cost: float) -> float:
        if self.noise:
            return cost + self.rng.uniform(-self.noise, self.noise)
        return cost

    def step(self, cost_perturbed: float, cost_nominal: float) -> float:
        """One human step from the two observed probe costs."""
        gradient = (self.observe(cost_perturbed) - self.observe(cost_nominal)) / 2.0 / self.probe
        self.h = _clip(self.h - self.K * self.beta * gradient, _human_bounds(self.game))
        return self.h


@dataclass
class ConjAwareHuman:
    """Gradient human with an explicit conjecture of the machine slope."""

    game: Game
    h: float = 0.0
    beta: float = DEFAULT_CONJ_BETA
    noise: float = 0.0
    rng: random.Random = field(default_factory=lambda: random.Random(0))

    def step(self, machine_slope: float, a: JointAction) -> float:
        gradient = grad_with_conjecture(self.game, Player.HUMAN, a, machine_slope)
        if self.noise:
            gradient += self.rng.uniform(-self.noise, self.noise)
        self.h = _clip(self.h - self.beta * gradient, _human_bounds(self.game))
        return self.h


@dataclass
class BestResponder:
    """Exact best-response oracle; stands in for a converged trial."""

    game: Game

    def respond_to_policy(self, policy: AffinePolicy) -> float:
        return best_response_oracle(self.game, policy)

    def respond_to_action(self, m: float) -> float:
        return human_best_response_to_action(self.game, m)


def best_response_oracle(game: Game, machine_policy: AffinePolicy) -> float:
    """Exact constrained minimizer of c_H along the machine's policy line."""
    return human_best_response(game, machine_policy)
