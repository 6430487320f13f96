"""Cost functions, gradients, and closed-form best responses.

Two families of two-player scalar games are supported:

* ``ScalarQuadraticGame`` -- general quadratic costs

      c_H(h, m) = 1/2 A_H h^2 + B_H h m + 1/2 D_H m^2 + b_H h + d_H m + a_H
      c_M(h, m) = 1/2 A_M m^2 + B_M h m + 1/2 D_M h^2 + b_M m + d_M h + a_M

  with closed-form responses throughout.

* ``CobbDouglasGame`` -- costs of the form 1 - 2(1-own)^a (own + d*other)^b,
  defined only where both base terms are positive.  Best responses are
  computed by bracketed golden-section minimization over the action bounds.

``HybridGame`` pairs a Cobb-Douglas human with a quadratic machine, which is
how the non-quadratic policy-gradient experiment is set up.

All types are immutable and all functions are pure; everything here is safe
for unrestricted concurrent use.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

from .errors import ConfigError, DomainError, InfeasiblePolicyError


class Player(enum.Enum):
    HUMAN = "human"
    MACHINE = "machine"


class JointAction(NamedTuple):
    """A joint action (h, m): human action first, machine action second."""

    h: float
    m: float


@dataclass(frozen=True)
class AffinePolicy:
    """An affine policy ``own = slope * other + intercept``.

    The anchored form ``own = slope * (other - anchor_other) + anchor_own``
    converts exactly via ``intercept = anchor_own - slope * anchor_other``.
    """

    slope: float
    intercept: float = 0.0

    @classmethod
    def anchored(cls, slope: float, anchor_other: float, anchor_own: float) -> "AffinePolicy":
        return cls(slope, anchor_own - slope * anchor_other)

    def __call__(self, other: float) -> float:
        return self.slope * other + self.intercept

    def perturbed_intercept(self, delta: float) -> "AffinePolicy":
        return AffinePolicy(self.slope, self.intercept + delta)

    def perturbed_slope(self, delta: float) -> "AffinePolicy":
        return AffinePolicy(self.slope + delta, self.intercept)


@dataclass(frozen=True)
class ScalarQuadraticGame:
    """The twelve coefficients of a general-sum scalar quadratic game."""

    A_H: float
    B_H: float
    D_H: float
    b_H: float
    d_H: float
    a_H: float
    A_M: float
    B_M: float
    D_M: float
    b_M: float
    d_M: float
    a_M: float

    def __post_init__(self) -> None:
        if not (self.A_H > 0 and self.A_M > 0):
            raise ConfigError("second-order conditions require A_H > 0 and A_M > 0")

    def cost(self, who: Player, h: float, m: float) -> float:
        if who is Player.HUMAN:
            return (0.5 * self.A_H * h * h + self.B_H * h * m + 0.5 * self.D_H * m * m
                    + self.b_H * h + self.d_H * m + self.a_H)
        return (0.5 * self.A_M * m * m + self.B_M * h * m + 0.5 * self.D_M * h * h
                + self.b_M * m + self.d_M * h + self.a_M)

    def grad(self, who: Player, h: float, m: float) -> tuple[float, float]:
        """Exact partial derivatives (d/dh, d/dm) of the named player's cost."""
        if who is Player.HUMAN:
            return (self.A_H * h + self.B_H * m + self.b_H,
                    self.B_H * h + self.D_H * m + self.d_H)
        return (self.B_M * m + self.D_M * h + self.d_M,
                self.A_M * m + self.B_M * h + self.b_M)

    def human_optimum(self) -> JointAction:
        """Unconstrained minimizer of the human's full cost (2x2 solve)."""
        return _solve2(self.A_H, self.B_H, self.B_H, self.D_H, -self.b_H, -self.d_H)

    def machine_optimum(self) -> JointAction:
        return _solve2(self.D_M, self.B_M, self.B_M, self.A_M, -self.d_M, -self.b_M)


@dataclass(frozen=True)
class CobbDouglasGame:
    """Cobb-Douglas pair: cost = 1 - 2(1-own)^a (own + d*other)^b per player."""

    a_H: float = 0.175
    b_H: float = 0.5
    d_H: float = 1.1
    a_M: float = 0.2
    b_M: float = 0.5
    d_M: float = 1.1
    human_bounds: tuple[float, float] = (0.2, 0.8)
    machine_bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        for name in ("a_H", "b_H", "a_M", "b_M"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"Cobb-Douglas exponent {name} must be positive")
        if self.d_H < 1 or self.d_M < 1:
            raise ConfigError("Cobb-Douglas coupling terms must satisfy d >= 1")

    def _bases(self, who: Player, h: float, m: float) -> tuple[float, float]:
        if who is Player.HUMAN:
            return 1.0 - h, h + self.d_H * m
        return 1.0 - m, m + self.d_M * h

    def _check_domain(self, who: Player, h: float, m: float,
                      interior: bool = False) -> tuple[float, float]:
        # cost evaluates on the closed domain (zero bases by continuity);
        # gradients need the interior, where the power terms are finite
        own, mixed = self._bases(who, h, m)
        bad = (lambda v: v <= 0) if interior else (lambda v: v < 0)
        if bad(own):
            raise DomainError(f"{who.value} cost undefined: base term (1 - own) = {own}")
        if bad(mixed):
            raise DomainError(f"{who.value} cost undefined: base term (own + d*other) = {mixed}")
        return own, mixed

    def cost(self, who: Player, h: float, m: float) -> float:
        own, mixed = self._check_domain(who, h, m)
        a, b = (self.a_H, self.b_H) if who is Player.HUMAN else (self.a_M, self.b_M)
        return 1.0 - 2.0 * own**a * mixed**b

    def grad(self, who: Player, h: float, m: float) -> tuple[float, float]:
        own, mixed = self._check_domain(who, h, m, interior=True)
        if who is Player.HUMAN:
            a, b, d = self.a_H, self.b_H, self.d_H
            d_own = -2.0 * (-a * own ** (a - 1) * mixed**b + own**a * b * mixed ** (b - 1))
            d_other = -2.0 * own**a * b * d * mixed ** (b - 1)
            return d_own, d_other
        a, b, d = self.a_M, self.b_M, self.d_M
        d_own = -2.0 * (-a * own ** (a - 1) * mixed**b + own**a * b * mixed ** (b - 1))
        d_other = -2.0 * own**a * b * d * mixed ** (b - 1)
        return d_other, d_own  # (d/dh, d/dm)


@dataclass(frozen=True)
class HybridGame:
    """Cobb-Douglas human paired with a quadratic machine cost."""

    human_side: CobbDouglasGame
    machine_side: ScalarQuadraticGame

    def cost(self, who: Player, h: float, m: float) -> float:
        side = self.human_side if who is Player.HUMAN else self.machine_side
        return side.cost(who, h, m)

    def grad(self, who: Player, h: float, m: float) -> tuple[float, float]:
        side = self.human_side if who is Player.HUMAN else self.machine_side
        return side.grad(who, h, m)


Game = Union[ScalarQuadraticGame, CobbDouglasGame, HybridGame]

#: Table-1 game: the quadratic pair used in the three main experiments.
CANONICAL_GAME = ScalarQuadraticGame(
    A_H=1.0, B_H=-1.0 / 3.0, D_H=7.0 / 15.0, b_H=2.0 / 15.0, d_H=-22.0 / 75.0, a_H=12.0 / 125.0,
    A_M=1.0, B_M=-1.0, D_M=2.0, b_M=0.0, d_M=0.0, a_M=0.0,
)

#: Cobb-Douglas pair used in the non-quadratic replicates.
COBB_GAME = CobbDouglasGame()


def quadratic_machine_cost(h_star: float, m_star: float) -> ScalarQuadraticGame:
    """Machine cost (m - m*)^2 + (h - h*)^2 paired with the canonical human cost.

    Used by the policy-gradient experiment variants that move the machine's
    optimum; the human coefficients stay canonical (only the machine side of
    the returned game is meaningful for hybrid pairings).
    """
    return ScalarQuadraticGame(
        A_H=CANONICAL_GAME.A_H, B_H=CANONICAL_GAME.B_H, D_H=CANONICAL_GAME.D_H,
        b_H=CANONICAL_GAME.b_H, d_H=CANONICAL_GAME.d_H, a_H=CANONICAL_GAME.a_H,
        A_M=2.0, B_M=0.0, D_M=2.0,
        b_M=-2.0 * m_star, d_M=-2.0 * h_star,
        a_M=m_star * m_star + h_star * h_star,
    )


def shifted_canonical_machine(h_star: float, m_star: float) -> ScalarQuadraticGame:
    """Canonical game with the machine's cost translated to peak at (h*, m*).

    Keeps A_M, B_M, D_M and re-derives the linear terms so the machine's
    optimum lands exactly on the target grid point.
    """
    g = CANONICAL_GAME
    return ScalarQuadraticGame(
        A_H=g.A_H, B_H=g.B_H, D_H=g.D_H, b_H=g.b_H, d_H=g.d_H, a_H=g.a_H,
        A_M=g.A_M, B_M=g.B_M, D_M=g.D_M,
        b_M=-g.A_M * m_star - g.B_M * h_star,
        d_M=-g.B_M * m_star - g.D_M * h_star,
        a_M=0.5 * g.A_M * m_star**2 + g.B_M * h_star * m_star + 0.5 * g.D_M * h_star**2,
    )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def eval_cost(game: Game, who: Player, a: JointAction) -> float:
    """Exact cost of `who` at joint action `a`."""
    return game.cost(who, a.h, a.m)


def grad(game: Game, who: Player, a: JointAction) -> tuple[float, float]:
    """Exact partials (d/dh, d/dm) of `who`'s cost at `a`."""
    return game.grad(who, a.h, a.m)


def grad_with_conjecture(game: Game, who: Player, a: JointAction,
                         opponent_slope: float) -> float:
    """Total derivative of own cost along own action under a conjectured
    opponent slope.

    For the human this is d/dh c_H + L_M * d/dm c_H; for the machine,
    d/dm c_M + L_H * d/dh c_M.  With a zero slope it reduces to the plain
    partial derivative.
    """
    gh, gm = game.grad(who, a.h, a.m)
    if who is Player.HUMAN:
        return gh + opponent_slope * gm
    return gm + opponent_slope * gh


def human_best_response_to_action(game: Game, m: float) -> float:
    """Unique minimizer of c_H(., m)."""
    if isinstance(game, ScalarQuadraticGame):
        return -(game.B_H * m + game.b_H) / game.A_H
    human = game.human_side if isinstance(game, HybridGame) else game
    lo, hi = human.human_bounds
    return golden_section(lambda h: human.cost(Player.HUMAN, h, m), lo, hi)


def machine_best_response_to_action(game: Game, h: float) -> float:
    """Unique minimizer of c_M(h, .)."""
    if isinstance(game, ScalarQuadraticGame):
        return -(game.B_M * h + game.b_M) / game.A_M
    if isinstance(game, HybridGame):
        return -(game.machine_side.B_M * h + game.machine_side.b_M) / game.machine_side.A_M
    lo, hi = game.machine_bounds
    return golden_section(lambda m: game.cost(Player.MACHINE, h, m), lo, hi)


def human_best_response_to_policy(game: Game, slope: float, delta: float = 0.0) -> float:
    """Minimizer of c_H(h, slope*h + delta) over h.

    Raises InfeasiblePolicyError when the policy violates the human's
    second-order condition A_H + 2 B_H L + D_H L^2 > 0.
    """
    if isinstance(game, ScalarQuadraticGame):
        den = game.A_H + 2.0 * game.B_H * slope + game.D_H * slope * slope
        if den <= 0:
            raise InfeasiblePolicyError(
                f"policy slope {slope} violates the human second-order condition")
        return -(game.b_H + slope * game.d_H + (game.B_H + slope * game.D_H) * delta) / den
    human = game.human_side if isinstance(game, HybridGame) else game
    lo, hi = human.human_bounds
    return golden_section(lambda h: human.cost(Player.HUMAN, h, slope * h + delta), lo, hi)


def human_best_response(game: Game, policy: AffinePolicy) -> float:
    return human_best_response_to_policy(game, policy.slope, policy.intercept)


def display_value(c: float) -> float:
    """Square-root display transform; floating-noise negatives clamp to 0."""
    return math.sqrt(c) if c > 0.0 else 0.0


def golden_section(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Golden-section minimizer of a unimodal f on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _solve2(a11: float, a12: float, a21: float, a22: float,
            r1: float, r2: float) -> JointAction:
    """Solve the 2x2 system [[a11,a12],[a21,a22]] x = (r1, r2)."""
    det = a11 * a22 - a12 * a21
    if abs(det) < 1e-14:
        from .errors import DegenerateGameError

        raise DegenerateGameError("singular 2x2 system")
    return JointAction((r1 * a22 - r2 * a12) / det, (a11 * r2 - a21 * r1) / det)


# ---------------------------------------------------------------------------
# Plain-text serialization (one coefficient per line, `key = value`)
# ---------------------------------------------------------------------------

_QUAD_FIELDS = ("A_H", "B_H", "D_H", "b_H", "d_H", "a_H",
                "A_M", "B_M", "D_M", "b_M", "d_M", "a_M")
_COBB_FIELDS = ("a_H", "b_H", "d_H", "a_M", "b_M", "d_M")


def game_to_text(game: Game) -> str:
    lines = []
    if isinstance(game, ScalarQuadraticGame):
        lines.append("type = scalar_quadratic")
        for name in _QUAD_FIELDS:
            lines.append(f"{name} = {getattr(game, name)!r}")
    elif isinstance(game, CobbDouglasGame):
        lines.append("type = cobb_douglas")
        for name in _COBB_FIELDS:
            lines.append(f"{name} = {getattr(game, name)!r}")
        lines.append(f"h_min = {game.human_bounds[0]!r}")
        lines.append(f"h_max = {game.human_bounds[1]!r}")
        lines.append(f"m_min = {game.machine_bounds[0]!r}")
        lines.append(f"m_max = {game.machine_bounds[1]!r}")
    else:
        raise ConfigError("hybrid games serialize via their two sides")
    return "\n".join(lines) + "\n"


def game_to_payload(game: Game) -> dict:
    """JSON-friendly encoding (used by experiment manifests and session logs)."""
    if isinstance(game, HybridGame):
        return {"kind": "hybrid",
                "human": game_to_text(game.human_side),
                "machine": game_to_text(game.machine_side)}
    return {"kind": "single", "text": game_to_text(game)}


def game_from_payload(payload: dict) -> Game:
    if payload.get("kind") == "hybrid":
        human = game_from_text(payload["human"])
        machine = game_from_text(payload["machine"])
        if not isinstance(human, CobbDouglasGame) or not isinstance(machine, ScalarQuadraticGame):
            raise ConfigError("hybrid payload must pair a Cobb-Douglas human "
                              "with a quadratic machine")
        return HybridGame(human, machine)
    return game_from_text(payload["text"])


def game_from_text(text: str) -> Game:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    kind = values.pop("type", None)
    if kind == "scalar_quadratic":
        missing = [f for f in _QUAD_FIELDS if f not in values]
        if missing:
            raise ConfigError(f"missing coefficients: {', '.join(missing)}")
        return ScalarQuadraticGame(**{f: float(values[f]) for f in _QUAD_FIELDS})
    if kind == "cobb_douglas":
        kwargs = {f: float(values[f]) for f in _COBB_FIELDS if f in values}
        if "h_min" in values:
            kwargs["human_bounds"] = (float(values["h_min"]), float(values["h_max"]))
        if "m_min" in values:
            kwargs["machine_bounds"] = (float(values["m_min"]), float(values["m_max"]))
        return CobbDouglasGame(**kwargs)
    raise ConfigError(f"unknown or missing game type: {kind!r}")
