"""Closed-form and iterative equilibrium solvers with stability classification.

For scalar quadratic games every concept has a closed form:

* global optima and Nash from 2x2 linear systems,
* the human-led Stackelberg point from the follower map L_M0 = -B_M/A_M,
* consistent conjectural variations (CCVE) from a quadratic in the machine
  slope, with stability read off the best-response map's derivative,
* the reverse Stackelberg (RSE) slope pair that steers the human's best
  response onto the machine's preferred point,
* the policy-gradient derivative of the machine's steered cost, exact via
  the rational form of the human response.

Cobb-Douglas games have no closed forms; their Nash/Stackelberg/CCVE solvers
iterate on bracketed best responses and numerically estimated response
slopes.

Everything is pure and side-effect free.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DegenerateGameError, SingularIterationError, SteeringInfeasibleError
from .games import (
    AffinePolicy,
    CobbDouglasGame,
    JointAction,
    Player,
    ScalarQuadraticGame,
    golden_section,
    human_best_response_to_policy,
    machine_best_response_to_action,
)

_DEAD_BAND = 1e-9  # stability comparisons this close to marginal are "undetermined"
_SINGULAR = 1e-12


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    UNDETERMINED = "undetermined"


def _classify(margin: float) -> Stability:
    """margin > 0 means stable; within the dead band means undetermined."""
    if margin > _DEAD_BAND:
        return Stability.STABLE
    if margin < -_DEAD_BAND:
        return Stability.UNSTABLE
    return Stability.UNDETERMINED


@dataclass(frozen=True)
class Diagnosed:
    """A stability flag together with the scalar that determined it."""

    stability: Stability
    diagnostic: float


@dataclass(frozen=True)
class CcveRoot:
    machine_slope: float
    human_slope: float
    map_derivative: float
    stability: Stability
    actions: Optional[JointAction]


@dataclass(frozen=True)
class CvStep:
    k: int
    human_slope: float
    machine_slope: float
    actions: Optional[JointAction]


@dataclass(frozen=True)
class CvIterationTrace:
    steps: tuple[CvStep, ...]
    error: Optional[str] = None


@dataclass(frozen=True)
class EquilibriumReport:
    human_optimum: JointAction
    machine_optimum: JointAction
    nash: JointAction
    nash_stability: Diagnosed
    stackelberg: JointAction
    stackelberg_slopes: tuple[float, float]  # (L_H^SE, L_M^SE)
    ccve: JointAction
    ccve_slopes: tuple[float, float]  # (L_H, L_M) at the stable root
    ccve_roots: tuple[CcveRoot, ...]  # stable root first when determined
    ccve_stability: Diagnosed
    rse: JointAction
    rse_slopes: tuple[float, float]  # (L_H^RSE, L_M^RSE)
    rse_stability: Diagnosed

    def rows(self) -> list[dict]:
        """One row per equilibrium: name, h, m, L_H, L_M, stability, diagnostic."""

        def row(name, a, lh=None, lm=None, st=None, diag=None):
            return {"name": name, "h": a.h, "m": a.m, "L_H": lh, "L_M": lm,
                    "stability": st.value if st else None, "diagnostic": diag}

        out = [
            row("human_optimum", self.human_optimum),
            row("machine_optimum", self.machine_optimum),
            row("nash", self.nash, st=self.nash_stability.stability,
                diag=self.nash_stability.diagnostic),
            row("stackelberg", self.stackelberg, self.stackelberg_slopes[0],
                self.stackelberg_slopes[1]),
            row("ccve", self.ccve, self.ccve_slopes[0], self.ccve_slopes[1],
                self.ccve_stability.stability, self.ccve_stability.diagnostic),
            row("rse", self.rse, self.rse_slopes[0], self.rse_slopes[1],
                self.rse_stability.stability, self.rse_stability.diagnostic),
        ]
        return out


# ---------------------------------------------------------------------------
# Scalar quadratic solvers
# ---------------------------------------------------------------------------

def _solve2(a11, a12, a21, a22, r1, r2) -> JointAction:
    det = a11 * a22 - a12 * a21
    if abs(det) < _SINGULAR:
        raise DegenerateGameError("singular 2x2 linear system")
    return JointAction((r1 * a22 - r2 * a12) / det, (a11 * r2 - a21 * r1) / det)


def solve_optima(game: ScalarQuadraticGame) -> tuple[JointAction, JointAction]:
    """Each player's unconstrained joint minimizer, with second-order checks."""
    if game.A_H <= 0 or game.A_H * game.D_H - game.B_H**2 <= 0:
        raise DegenerateGameError("human joint Hessian is not positive definite")
    if game.A_M <= 0 or game.A_M * game.D_M - game.B_M**2 <= 0:
        raise DegenerateGameError("machine joint Hessian is not positive definite")
    human = _solve2(game.A_H, game.B_H, game.B_H, game.D_H, -game.b_H, -game.d_H)
    machine = _solve2(game.D_M, game.B_M, game.B_M, game.A_M, -game.d_M, -game.b_M)
    return human, machine


def solve_nash(game: ScalarQuadraticGame) -> tuple[JointAction, Diagnosed]:
    """Simultaneous-play equilibrium and its gradient-play stability.

    Stability comes from the eigenvalues of [[A_H, B_H], [B_M, A_M]]: both
    real parts positive means gradient play contracts.
    """
    action = _solve2(game.A_H, game.B_H, game.B_M, game.A_M, -game.b_H, -game.b_M)
    tr = game.A_H + game.A_M
    det = game.A_H * game.A_M - game.B_H * game.B_M
    disc = (tr / 2.0) ** 2 - det
    if disc >= 0:
        min_real = tr / 2.0 - math.sqrt(disc)
    else:
        min_real = tr / 2.0
    return action, Diagnosed(_classify(min_real), min_real)


def nash_jacobian_eigenvalues(game: ScalarQuadraticGame) -> tuple[complex, complex]:
    tr = game.A_H + game.A_M
    det = game.A_H * game.A_M - game.B_H * game.B_M
    disc = complex((tr / 2.0) ** 2 - det)
    root = disc ** 0.5
    return tr / 2.0 - root, tr / 2.0 + root


def stackelberg_follower_slope(game: ScalarQuadraticGame) -> float:
    return -game.B_M / game.A_M


def solve_stackelberg(game: ScalarQuadraticGame) -> tuple[JointAction, float, float]:
    """Human-led Stackelberg point plus (leader slope L_H, follower slope L_M).

    The leader slope reported is the human's conjecture-consistent response
    slope evaluated at the follower map.
    """
    if game.A_M <= 0 or game.A_H - game.B_H * game.B_M / game.A_M <= 0:
        raise DegenerateGameError("Stackelberg second-order condition fails")
    lm0 = stackelberg_follower_slope(game)
    action = _solve2(
        game.A_H + lm0 * game.B_H, game.B_H + lm0 * game.D_H,
        game.B_M, game.A_M,
        -(game.b_H + lm0 * game.d_H), -game.b_M,
    )
    return action, human_conjecture_slope(game, lm0), lm0


# -- slope maps -------------------------------------------------------------

def human_conjecture_slope(game: ScalarQuadraticGame, machine_slope: float) -> float:
    """L_H = -(B_H + L_M D_H) / (A_H + L_M B_H): the human's consistent
    response slope when it conjectures the machine plays slope L_M."""
    den = game.A_H + machine_slope * game.B_H
    if abs(den) < _SINGULAR:
        raise SingularIterationError("human slope map denominator vanished")
    return -(game.B_H + machine_slope * game.D_H) / den


def machine_conjecture_slope(game: ScalarQuadraticGame, human_slope: float) -> float:
    """L_M = -(B_M + L_H D_M) / (A_M + L_H B_M): machine's best-response slope."""
    den = game.A_M + human_slope * game.B_M
    if abs(den) < _SINGULAR:
        raise SingularIterationError("machine slope map denominator vanished")
    return -(game.B_M + human_slope * game.D_M) / den


def machine_conjecture_intercept(game: ScalarQuadraticGame, human_slope: float) -> float:
    den = game.A_M + human_slope * game.B_M
    if abs(den) < _SINGULAR:
        raise SingularIterationError("machine slope map denominator vanished")
    return -(game.b_M + human_slope * game.d_M) / den


def cv_best_response_map(game: ScalarQuadraticGame, machine_slope: float) -> float:
    """One application of the composed slope map F: next machine slope."""
    return machine_conjecture_slope(game, human_conjecture_slope(game, machine_slope))


def cv_map_derivative(game: ScalarQuadraticGame, machine_slope: float) -> float:
    """dF/dL by the chain rule on the two Moebius maps."""
    lh = human_conjecture_slope(game, machine_slope)
    d_human = (game.B_H**2 - game.A_H * game.D_H) / (game.A_H + game.B_H * machine_slope) ** 2
    d_machine = (game.B_M**2 - game.A_M * game.D_M) / (game.A_M + game.B_M * lh) ** 2
    return d_machine * d_human


def _policy_fixed_point(game: ScalarQuadraticGame, human_slope: float,
                        machine_slope: float) -> JointAction:
    """Actions where both conjectured policies are simultaneously optimal."""
    return _solve2(
        game.A_H + machine_slope * game.B_H, game.B_H + machine_slope * game.D_H,
        game.B_M + human_slope * game.D_M, game.A_M + human_slope * game.B_M,
        -(game.b_H + machine_slope * game.d_H), -(game.b_M + human_slope * game.d_M),
    )


def solve_ccve(game: ScalarQuadraticGame) -> tuple[CcveRoot, ...]:
    """Both CCVE slope roots, stable root first when stability is determined.

    The machine-slope roots solve the quadratic with discriminant
    (A_H A_M - D_H D_M)^2 + 4 (A_M B_H - B_M D_H)(B_H D_M - A_H B_M);
    each root's |dF| decides stability, and the root's actions come from the
    coupled linear system of the two first-order conditions.
    """
    p = game.A_M * game.B_H - game.B_M * game.D_H
    q = game.B_H * game.D_M - game.A_H * game.B_M
    disc = (game.A_H * game.A_M - game.D_H * game.D_M) ** 2 + 4.0 * p * q
    if disc < 0:
        raise DegenerateGameError("no real CCVE: slope discriminant is negative")
    if abs(p) < _SINGULAR:
        raise DegenerateGameError("CCVE slope quadratic is degenerate (A_M B_H = B_M D_H)")
    base = game.D_H * game.D_M - game.A_H * game.A_M
    roots = []
    for sign in (+1.0, -1.0):
        lm = (base + sign * math.sqrt(disc)) / (2.0 * p)
        lh = human_conjecture_slope(game, lm)
        dF = cv_map_derivative(game, lm)
        stability = _classify(1.0 - abs(dF))
        try:
            actions = _policy_fixed_point(game, lh, lm)
        except DegenerateGameError:
            actions = None
        roots.append(CcveRoot(lm, lh, dF, stability, actions))
    roots.sort(key=lambda r: abs(r.map_derivative))
    return tuple(roots)


def solve_rse(game: ScalarQuadraticGame,
              machine_target: Optional[JointAction] = None) -> tuple[float, float, JointAction]:
    """Reverse-Stackelberg slopes (L_H, L_M) steering the human to the target.

    The default target is the machine's global optimum, for which the RSE
    actions coincide with that optimum.
    """
    human_opt = game.human_optimum()
    if machine_target is None:
        machine_target = game.machine_optimum()
    dv = human_opt.m - machine_target.m
    if abs(dv) < _SINGULAR:
        raise SteeringInfeasibleError(
            "target machine action equals the human optimum's machine action")
    lh = (human_opt.h - machine_target.h) / dv
    den = game.B_H * lh + game.D_H
    if abs(den) < _SINGULAR:
        raise SteeringInfeasibleError("RSE machine-slope denominator vanished")
    lm = -(game.A_H * lh + game.B_H) / den
    if game.A_H + game.B_H * lm <= 0:
        raise SteeringInfeasibleError("RSE second-order condition A_H + B_H L_M > 0 fails")
    return lh, lm, machine_target


def rse_policy(game: ScalarQuadraticGame,
               machine_target: Optional[JointAction] = None) -> AffinePolicy:
    _, lm, target = solve_rse(game, machine_target)
    return AffinePolicy.anchored(lm, target.h, target.m)


def k_level_iteration(game: ScalarQuadraticGame, L0: Optional[float] = None,
                      K: int = 10) -> CvIterationTrace:
    """K steps of the conjectural-variations slope maps with per-step actions.

    Step k records the machine slope L_{M,k}, the conjecture L_{H,k} it was
    built from (0 at k = 0), and the action pair where the human responds
    optimally, with a consistent conjecture, to the machine's current policy
    anchored at its optimum.  Started inside the stable basin the machine
    slopes converge to the stable CCVE root.
    """
    lm = stackelberg_follower_slope(game) if L0 is None else L0
    lh = 0.0
    anchor = game.machine_optimum()
    steps: list[CvStep] = []
    error = None
    for k in range(K + 1):
        actions: Optional[JointAction]
        try:
            ell = machine_conjecture_intercept(game, lh) if k > 0 else (
                anchor.m - lm * anchor.h)
            h = human_best_response_to_policy(game, lm, ell)
            actions = JointAction(h, lm * h + ell)
        except Exception:
            actions = None
        steps.append(CvStep(k, lh, lm, actions))
        if k == K:
            break
        try:
            lh = human_conjecture_slope(game, lm)
            lm = machine_conjecture_slope(game, lh)
        except SingularIterationError as exc:
            error = str(exc)
            break
    return CvIterationTrace(tuple(steps), error)


# -- policy gradient --------------------------------------------------------

def human_response_rational(game: ScalarQuadraticGame,
                            anchor: JointAction) -> tuple[tuple[float, float, float],
                                                          tuple[float, float, float]]:
    """Numerator/denominator quadratics of r(L), the human's best response to
    the anchored machine policy m = L (h - h*) + m*."""
    n2 = game.D_H * anchor.h
    n1 = game.B_H * anchor.h - game.d_H - game.D_H * anchor.m
    n0 = -game.b_H - game.B_H * anchor.m
    return (n2, n1, n0), (game.D_H, 2.0 * game.B_H, game.A_H)


def steered_machine_cost(game: ScalarQuadraticGame, L: float,
                         anchor: Optional[JointAction] = None) -> float:
    """c_M at the human's best response to the anchored policy with slope L."""
    if anchor is None:
        anchor = game.machine_optimum()
    h = human_best_response_to_policy(game, L, anchor.m - L * anchor.h)
    m = L * (h - anchor.h) + anchor.m
    return game.cost(Player.MACHINE, h, m)


def policy_gradient_closed_form(game: ScalarQuadraticGame, L: float,
                                anchor: Optional[JointAction] = None) -> float:
    """Exact d/dL of the machine's steered cost c_M(r(L), L (r(L)-h*) + m*).

    The human response r(L) is a ratio of quadratics in L, so the chain rule
    gives the derivative exactly; no finite differencing is involved.
    """
    if anchor is None:
        anchor = game.machine_optimum()
    (n2, n1, n0), (d2, d1, d0) = human_response_rational(game, anchor)
    den = d2 * L * L + d1 * L + d0
    if abs(den) < _SINGULAR:
        raise DegenerateGameError("steered response denominator vanished")
    num = n2 * L * L + n1 * L + n0
    r = num / den
    dr = ((2.0 * n2 * L + n1) * den - num * (2.0 * d2 * L + d1)) / (den * den)
    m = L * (r - anchor.h) + anchor.m
    dm = (r - anchor.h) + L * dr
    gh, gm = game.grad(Player.MACHINE, r, m)
    return gh * dr + gm * dm


def policy_gradient_curvature(game: ScalarQuadraticGame, L: float,
                              anchor: Optional[JointAction] = None,
                              step: float = 1e-6) -> float:
    """Second derivative of the steered cost (central difference of the
    exact first derivative)."""
    return (policy_gradient_closed_form(game, L + step, anchor)
            - policy_gradient_closed_form(game, L - step, anchor)) / (2.0 * step)


# -- curves -----------------------------------------------------------------

def pareto_frontier(game: ScalarQuadraticGame,
                    weights: Sequence[float]) -> list[tuple[float, Optional[JointAction]]]:
    """Minimizers of gamma c_H + (1-gamma) c_M per weight; infeasible weights
    (indefinite weighted Hessian) yield None markers."""
    out: list[tuple[float, Optional[JointAction]]] = []
    for g in weights:
        a11 = g * game.A_H + (1 - g) * game.D_M
        a12 = g * game.B_H + (1 - g) * game.B_M
        a22 = g * game.D_H + (1 - g) * game.A_M
        if a11 <= 0 or a11 * a22 - a12 * a12 <= 0:
            out.append((g, None))
            continue
        r1 = -(g * game.b_H + (1 - g) * game.d_M)
        r2 = -(g * game.d_H + (1 - g) * game.b_M)
        out.append((g, _solve2(a11, a12, a12, a22, r1, r2)))
    return out


def consistency_curve(game: ScalarQuadraticGame,
                      slopes: Sequence[float]) -> list[tuple[float, Optional[JointAction]]]:
    """Locus of action fixed points (r(L), policy_L(r(L))) as the machine
    slope sweeps, with the policy anchored at the machine's optimum and the
    human conjecturing it consistently.  Infeasible slopes yield None."""
    anchor = game.machine_optimum()
    out: list[tuple[float, Optional[JointAction]]] = []
    for L in slopes:
        try:
            h = human_best_response_to_policy(game, L, anchor.m - L * anchor.h)
        except Exception:
            out.append((L, None))
            continue
        out.append((L, JointAction(h, L * (h - anchor.h) + anchor.m)))
    return out


def solve_report(game: ScalarQuadraticGame) -> EquilibriumReport:
    """Solve the full constellation for one game."""
    human_opt, machine_opt = solve_optima(game)
    nash, nash_st = solve_nash(game)
    se, lh_se, lm_se = solve_stackelberg(game)
    roots = solve_ccve(game)
    stable = roots[0]
    lh_rse, lm_rse, rse_act = solve_rse(game)
    curvature = policy_gradient_curvature(game, lm_rse)
    return EquilibriumReport(
        human_optimum=human_opt,
        machine_optimum=machine_opt,
        nash=nash,
        nash_stability=nash_st,
        stackelberg=se,
        stackelberg_slopes=(lh_se, lm_se),
        ccve=stable.actions if stable.actions is not None else JointAction(math.nan, math.nan),
        ccve_slopes=(stable.human_slope, stable.machine_slope),
        ccve_roots=roots,
        ccve_stability=Diagnosed(stable.stability, abs(stable.map_derivative)),
        rse=rse_act,
        rse_slopes=(lh_rse, lm_rse),
        rse_stability=Diagnosed(_classify(curvature), curvature),
    )


# ---------------------------------------------------------------------------
# Cobb-Douglas numeric solvers (no closed forms)
# ---------------------------------------------------------------------------

def cobb_nash(game: CobbDouglasGame, tol: float = 1e-9, max_iter: int = 10_000,
              damping: float = 0.5) -> JointAction:
    """Damped simultaneous best-response iteration."""
    h = sum(game.human_bounds) / 2.0
    m = sum(game.machine_bounds) / 2.0
    for _ in range(max_iter):
        bh = _cobb_br_h(game, m)
        bm = machine_best_response_to_action(game, h)
        nh = h + damping * (bh - h)
        nm = m + damping * (bm - m)
        if abs(nh - h) < tol and abs(nm - m) < tol:
            return JointAction(nh, nm)
        h, m = nh, nm
    raise DegenerateGameError("Cobb-Douglas Nash iteration did not converge")


def cobb_stackelberg(game: CobbDouglasGame) -> JointAction:
    """Leader minimizes its cost along the machine's best-response curve."""
    lo, hi = game.human_bounds
    h = golden_section(
        lambda x: game.cost(Player.HUMAN, x, machine_best_response_to_action(game, x)),
        lo, hi)
    return JointAction(h, machine_best_response_to_action(game, h))


def cobb_cv_policy(game: CobbDouglasGame, human_slope: float) -> AffinePolicy:
    """Machine's best-response policy to a conjectured human slope (closed form
    for costs of the form 1 - 2(1-m)^a (m + d h)^b)."""
    den = game.a_M + game.b_M + game.b_M * game.d_M * human_slope
    if abs(den) < _SINGULAR:
        raise SingularIterationError("Cobb-Douglas conjecture denominator vanished")
    return AffinePolicy(-game.a_M * game.d_M / den,
                        (game.b_M + game.b_M * game.d_M * human_slope) / den)


def cobb_ccve(game: CobbDouglasGame, fd_step: float = 1e-5, tol: float = 1e-8,
              max_iter: int = 10_000) -> tuple[JointAction, float, float]:
    """CCVE by fixed-point iteration on numerically estimated response slopes.

    Returns (actions, L_H, L_M).  The human's response slope is estimated by
    central intercept perturbations of size `fd_step`.
    """
    lh = 0.0
    policy = cobb_cv_policy(game, lh)
    for _ in range(max_iter):
        policy = cobb_cv_policy(game, lh)
        h_plus = _cobb_br_policy(game, policy.slope, policy.intercept + fd_step)
        h_minus = _cobb_br_policy(game, policy.slope, policy.intercept - fd_step)
        m_plus = policy.slope * h_plus + policy.intercept + fd_step
        m_minus = policy.slope * h_minus + policy.intercept - fd_step
        new_lh = (h_plus - h_minus) / (m_plus - m_minus)
        if abs(new_lh - lh) < tol:
            lh = new_lh
            break
        lh = new_lh
    else:
        raise DegenerateGameError("Cobb-Douglas CCVE iteration did not converge")
    policy = cobb_cv_policy(game, lh)
    h = _cobb_br_policy(game, policy.slope, policy.intercept)
    return JointAction(h, policy(h)), lh, policy.slope


def _cobb_br_h(game: CobbDouglasGame, m: float) -> float:
    lo, hi = game.human_bounds
    return golden_section(lambda h: game.cost(Player.HUMAN, h, m), lo, hi)


def _cobb_br_policy(game: CobbDouglasGame, slope: float, intercept: float) -> float:
    """Best response to the policy line, polished past golden-section noise.

    Golden section localizes a flat minimum only to ~sqrt(eps); the slope
    estimator divides responses by a 1e-5 perturbation, so interior minima
    get a few Newton steps on the first-order condition along the line.
    """
    lo, hi = game.human_bounds
    h = golden_section(lambda x: game.cost(Player.HUMAN, x, slope * x + intercept), lo, hi)
    margin = 1e-6 * (hi - lo)
    if not (lo + margin < h < hi - margin):
        return h  # constrained minimum at a bound: golden's answer stands

    def foc(x: float) -> float:
        gh, gm = game.grad(Player.HUMAN, x, slope * x + intercept)
        return gh + slope * gm

    step = 1e-7
    for _ in range(4):
        f = foc(h)
        df = (foc(h + step) - foc(h - step)) / (2.0 * step)
        if df == 0.0:
            break
        nxt = h - f / df
        if not (lo < nxt < hi):
            break
        h = nxt
    return h
