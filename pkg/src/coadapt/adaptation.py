"""The three machine adaptation strategies as explicit state machines.

* ``GradientPlay`` -- within-trial gradient descent on the machine's own
  action (rate alpha); alpha = 0 degenerates to the constant Nash action.
* ``ConjVar`` -- between-trial conjectural-variation policy iteration: play
  an affine policy, replay it with a perturbed intercept, estimate the
  human's response slope from the pair of median action vectors, and best
  respond to the conjectured line.
* ``PolicyGrad`` -- between-trial policy gradient: perturb the slope of an
  anchored policy, forward-difference the pair of median costs, and step the
  slope against the estimate.

Each instance is single-writer mutable state; distinct instances may run
concurrently but one instance must never be written from two places at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .equilibria import (
    cobb_cv_policy,
    machine_conjecture_intercept,
    machine_conjecture_slope,
    stackelberg_follower_slope,
)
from .errors import ConjectureUndefinedError
from .games import (
    AffinePolicy,
    CobbDouglasGame,
    Game,
    HybridGame,
    JointAction,
    Player,
    ScalarQuadraticGame,
)

#: Minimum |m' - m| accepted by the conjecture estimator.
CONJECTURE_EPS = 1e-6

NOMINAL = "nominal"
PERTURBED = "perturbed"


@dataclass
class GradientPlay:
    """m+ = m - alpha * d/dm c_M(h, m); alpha = 0 pins m to the Nash action.

    Cobb-Douglas machines clamp their action to the game's bounds.
    """

    game: Game
    alpha: float
    m: float
    nash_m: float

    @property
    def rate_flagged(self) -> bool:
        """Rates above 1 are permitted but outside the tested range."""
        return self.alpha > 1.0

    def step(self, h: float) -> float:
        if self.alpha == 0.0:
            self.m = self.nash_m
        else:
            _, gm = self.game.grad(Player.MACHINE, h, self.m)
            self.m = self.m - self.alpha * gm
            if isinstance(self.game, CobbDouglasGame):
                lo, hi = self.game.machine_bounds
                self.m = min(hi, max(lo, self.m))
        return self.m


def best_response_policy(game: Game, conjecture: float) -> AffinePolicy:
    """Machine's optimal affine policy against a conjectured human line."""
    if isinstance(game, HybridGame):
        game = game.machine_side
    if isinstance(game, ScalarQuadraticGame):
        return AffinePolicy(machine_conjecture_slope(game, conjecture),
                            machine_conjecture_intercept(game, conjecture))
    return cobb_cv_policy(game, conjecture)


def conjvar_update_cobbdouglas(game: CobbDouglasGame, conjecture: float) -> AffinePolicy:
    """Cobb-Douglas conjectural-variation policy update (closed form)."""
    return cobb_cv_policy(game, conjecture)


@dataclass
class ConjVar:
    """Conjectural-variation policy iteration state.

    The initial conjecture is 0, which yields the machine's plain
    best-response policy (slope -B_M/A_M for quadratics).
    """

    game: Game
    delta: float = 0.1
    conjecture: float = 0.0
    k: int = 0
    phase: str = NOMINAL
    policy: AffinePolicy = field(init=False)

    def __post_init__(self) -> None:
        self.policy = best_response_policy(self.game, self.conjecture)

    def nominal_policy(self) -> AffinePolicy:
        return self.policy

    def perturbed_policy(self) -> AffinePolicy:
        return self.policy.perturbed_intercept(self.delta)

    def estimate(self, nominal_medians: JointAction,
                 perturbed_medians: JointAction) -> float:
        """Ratio-of-differences conjecture from a trial pair's medians."""
        dm = perturbed_medians.m - nominal_medians.m
        if abs(dm) < CONJECTURE_EPS:
            raise ConjectureUndefinedError(
                f"median machine actions differ by {dm!r}; conjecture undefined")
        return (perturbed_medians.h - nominal_medians.h) / dm

    def update(self, conjecture: float) -> AffinePolicy:
        """Adopt the conjecture and best respond to it."""
        self.conjecture = conjecture
        self.policy = best_response_policy(self.game, conjecture)
        self.k += 1
        return self.policy

    def advance(self, nominal_medians: JointAction,
                perturbed_medians: JointAction) -> AffinePolicy:
        return self.update(self.estimate(nominal_medians, perturbed_medians))


@dataclass
class PolicyGrad:
    """Policy-gradient state: anchored slope stepped against an FD estimate."""

    game: Game
    anchor: JointAction
    slope: float
    Delta: float = 0.1
    gamma: float = 2.0
    k: int = 0
    phase: str = NOMINAL

    def nominal_policy(self) -> AffinePolicy:
        return AffinePolicy.anchored(self.slope, self.anchor.h, self.anchor.m)

    def perturbed_policy(self) -> AffinePolicy:
        return AffinePolicy.anchored(self.slope + self.Delta, self.anchor.h, self.anchor.m)

    def estimate(self, nominal_cost_median: float, perturbed_cost_median: float) -> float:
        """Forward-difference estimate of the steered-cost slope derivative."""
        return (perturbed_cost_median - nominal_cost_median) / self.Delta

    def update(self, gradient: float) -> float:
        self.slope = self.slope - self.gamma * gradient
        self.k += 1
        return self.slope

    def advance(self, nominal_cost_median: float, perturbed_cost_median: float) -> float:
        return self.update(self.estimate(nominal_cost_median, perturbed_cost_median))


MachineStrategy = Union[GradientPlay, ConjVar, PolicyGrad]


def initial_conjvar(game: Game, delta: float = 0.1) -> ConjVar:
    return ConjVar(game=game, delta=delta)


def initial_policygrad(game: Game, anchor: Optional[JointAction] = None,
                       slope: Optional[float] = None, Delta: float = 0.1,
                       gamma: float = 2.0) -> PolicyGrad:
    """Policy-gradient state anchored at the machine optimum by default, with
    the Stackelberg follower slope as the default initial slope."""
    machine = game.machine_side if isinstance(game, HybridGame) else game
    if anchor is None:
        if not isinstance(machine, ScalarQuadraticGame):
            raise ValueError("an explicit anchor is required for Cobb-Douglas games")
        anchor = machine.machine_optimum()
    if slope is None:
        if isinstance(machine, ScalarQuadraticGame):
            slope = stackelberg_follower_slope(machine)
        else:
            slope = 1.0
    return PolicyGrad(game=game, anchor=anchor, slope=slope, Delta=Delta, gamma=gamma)
