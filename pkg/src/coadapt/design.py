"""Inverse game design: place the equilibrium constellation at chosen points.

Given both players' optima, a Nash target, and a Stackelberg target, the
twelve quadratic coefficients are recovered in closed form:

* A_H = A_M = 1 fixes each cost's scale,
* B_H and B_M come from the optima/Nash geometry,
* D_H comes from the leader's first-order condition at the Stackelberg
  target (with the follower slope L_M0 = -B_M / A_M),
* the linear and constant terms center each cost on its optimum with
  minimum value zero,
* D_M stays free (default 2) subject to the CCVE feasibility inequalities.

The Stackelberg target is not free in its machine coordinate: it must sit on
the follower's best-response line implied by the other targets, and
`design_game` rejects specs that violate this.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import DesignInfeasibleError
from .games import JointAction, ScalarQuadraticGame
from . import equilibria

_TOL = 1e-9


@dataclass(frozen=True)
class DesignSpec:
    human_optimum: JointAction
    machine_optimum: JointAction
    nash: JointAction
    stackelberg: JointAction
    D_M: float = 2.0


@dataclass(frozen=True)
class DesignResult:
    game: ScalarQuadraticGame
    degenerate: bool = False
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class DesignReport:
    """Per-target reproduction error from re-solving the designed game."""

    errors: dict[str, float] = field(default_factory=dict)
    tolerance: float = _TOL

    @property
    def passed(self) -> bool:
        return all(e < self.tolerance for e in self.errors.values())

    @property
    def worst(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0


def _coincident(spec: DesignSpec) -> bool:
    pts = (spec.human_optimum, spec.machine_optimum, spec.nash, spec.stackelberg)
    return all(p.h == pts[0].h and p.m == pts[0].m for p in pts)


def design_game(spec: DesignSpec) -> DesignResult:
    """Closed-form coefficients whose solved equilibria hit the spec targets."""
    if _coincident(spec):
        # Fully aligned game: decoupled quadratics centered on the common point.
        p = spec.human_optimum
        game = ScalarQuadraticGame(
            A_H=1.0, B_H=0.0, D_H=1.0, b_H=-p.h, d_H=-p.m,
            a_H=0.5 * (p.h * p.h + p.m * p.m),
            A_M=1.0, B_M=0.0, D_M=spec.D_M, b_M=-p.m, d_M=-spec.D_M * p.h,
            a_M=0.5 * (p.m * p.m + spec.D_M * p.h * p.h),
        )
        return DesignResult(game, degenerate=True,
                            notes=("all targets coincide; couplings set to zero",))

    hH, mH = spec.human_optimum
    hM, mM = spec.machine_optimum
    hN, mN = spec.nash
    hS, mS = spec.stackelberg

    if abs(mH - mN) < _TOL:
        raise DesignInfeasibleError("m_H* must differ from the Nash machine action")
    if abs(hM - hN) < _TOL:
        raise DesignInfeasibleError("h_M* must differ from the Nash human action")
    if abs(mH - mS) < _TOL or abs(mM - mS) < _TOL:
        raise DesignInfeasibleError(
            "(m_H* - m^SE)(m_M* - m^SE) must be nonzero")

    B_H = -(hH - hN) / (mH - mN)
    B_M = -(mM - mN) / (hM - hN)
    L0 = -B_M  # follower slope with A_M = 1

    follower_m = L0 * (hS - hM) + mM
    if abs(mS - follower_m) > _TOL:
        raise DesignInfeasibleError(
            f"Stackelberg target is off the follower best-response line "
            f"(expected m^SE = {follower_m!r})")
    if abs(L0) < _TOL:
        raise DesignInfeasibleError("follower slope vanishes (m_M* equals m^NE)")

    # Leader first-order condition at the SE target fixes D_H:
    #   (h-hH) + B_H (m-mH) + L0 (B_H (h-hH) + D_H (m-mH)) = 0  at (hS, mS).
    u = hS - hH
    v = mS - mH
    D_H = -(u + B_H * v + L0 * B_H * u) / (L0 * v)

    game = ScalarQuadraticGame(
        A_H=1.0, B_H=B_H, D_H=D_H,
        b_H=-hH - B_H * mH, d_H=-B_H * hH - D_H * mH,
        a_H=0.5 * hH * hH + B_H * hH * mH + 0.5 * D_H * mH * mH,
        A_M=1.0, B_M=B_M, D_M=spec.D_M,
        b_M=-mM - B_M * hM, d_M=-B_M * mM - spec.D_M * hM,
        a_M=0.5 * mM * mM + B_M * hM * mM + 0.5 * spec.D_M * hM * hM,
    )

    if D_H - B_H * B_H <= 0:
        raise DesignInfeasibleError("human joint Hessian not positive definite (D_H <= B_H^2)")
    if spec.D_M - B_M * B_M <= 0:
        raise DesignInfeasibleError("machine joint Hessian not positive definite (D_M <= B_M^2)")
    if 1.0 - B_H * B_M <= 0:
        raise DesignInfeasibleError("Stackelberg second-order condition fails (A_H <= B_H B_M)")
    p = B_H - B_M * D_H
    q = B_H * spec.D_M - B_M
    if (1.0 - D_H * spec.D_M) ** 2 + 4.0 * p * q < 0:
        raise DesignInfeasibleError("D_M condition fails: CCVE slope discriminant is negative")
    if abs(p * q) < _TOL:
        raise DesignInfeasibleError(
            "D_M condition fails: (A_M B_H - B_M D_H)(A_H B_M - B_H D_M) = 0")

    return DesignResult(game)


def verify_design(game: ScalarQuadraticGame, spec: DesignSpec,
                  tolerance: float = _TOL) -> DesignReport:
    """Re-solve every equilibrium and report per-target reproduction error."""

    def gap(a: JointAction, b: JointAction) -> float:
        return max(abs(a.h - b.h), abs(a.m - b.m))

    errors: dict[str, float] = {}
    human_opt, machine_opt = equilibria.solve_optima(game)
    errors["human_optimum"] = gap(human_opt, spec.human_optimum)
    errors["machine_optimum"] = gap(machine_opt, spec.machine_optimum)
    nash, _ = equilibria.solve_nash(game)
    errors["nash"] = gap(nash, spec.nash)
    se, _, _ = equilibria.solve_stackelberg(game)
    errors["stackelberg"] = gap(se, spec.stackelberg)
    _, _, rse_actions = equilibria.solve_rse(game)
    errors["rse_at_machine_optimum"] = gap(rse_actions, spec.machine_optimum)
    return DesignReport(errors=errors, tolerance=tolerance)


def random_feasible_spec(rng: random.Random, D_M: float = 2.0,
                         max_attempts: int = 10_000) -> DesignSpec:
    """Rejection-sample a feasible spec with targets in [-0.8, 0.8].

    Optima and the Nash target are drawn freely; the Stackelberg target's
    human coordinate is drawn and its machine coordinate comes from the
    follower line, keeping the spec self-consistent.
    """
    for _ in range(max_attempts):
        draw = lambda: rng.uniform(-0.8, 0.8)
        hH, mH, hM, mM = draw(), draw(), draw(), draw()
        hN, mN = draw(), draw()
        hS = draw()
        if abs(mH - mN) < 1e-2 or abs(hM - hN) < 1e-2:
            continue
        B_M = -(mM - mN) / (hM - hN)
        mS = -B_M * (hS - hM) + mM
        if abs(mS) > 0.8 or abs(mH - mS) < 1e-2 or abs(mM - mS) < 1e-2:
            continue
        spec = DesignSpec(JointAction(hH, mH), JointAction(hM, mM),
                          JointAction(hN, mN), JointAction(hS, mS), D_M)
        try:
            result = design_game(spec)
            equilibria.solve_ccve(result.game)
            equilibria.solve_rse(result.game)
        except Exception:
            continue
        return spec
    raise DesignInfeasibleError("could not sample a feasible design spec")


# -- spec file format (same key-value style as games) -----------------------

_SPEC_KEYS = ("h_H", "m_H", "h_M", "m_M", "h_NE", "m_NE", "h_SE", "m_SE")


def spec_to_text(spec: DesignSpec) -> str:
    vals = (*spec.human_optimum, *spec.machine_optimum, *spec.nash, *spec.stackelberg)
    lines = [f"{k} = {v!r}" for k, v in zip(_SPEC_KEYS, vals)]
    lines.append(f"D_M = {spec.D_M!r}")
    return "\n".join(lines) + "\n"


def spec_from_text(text: str) -> DesignSpec:
    values: dict[str, float] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition("=")
        values[key.strip()] = float(val.strip())
    missing = [k for k in _SPEC_KEYS if k not in values]
    if missing:
        raise DesignInfeasibleError(f"design spec missing keys: {', '.join(missing)}")
    return DesignSpec(
        JointAction(values["h_H"], values["m_H"]),
        JointAction(values["h_M"], values["m_M"]),
        JointAction(values["h_NE"], values["m_NE"]),
        JointAction(values["h_SE"], values["m_SE"]),
        values.get("D_M", 2.0),
    )
