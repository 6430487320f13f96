"""Faithful re-creations of the three numerical experiment simulations.

These loops mirror the published simulation listings step for step (probe
ordering, update lags, steady-state readout), generalized over the game and
every tunable.  The trial-based 60 Hz harness lives in `harness`; the loops
here are the scientific reference used by the oracle tests:

* Experiment 1: within-trial machine gradient play against a
  finite-difference human that holds each probe for K machine steps and
  restarts the machine from the shared state for both probe passes.
* Experiment 2: between-trial conjectural variation against a
  conjecture-aware gradient human; the human's action persists across
  trials.
* Experiment 3: between-trial policy gradient with forward-difference cost
  estimates of the machine's steered cost, same human model.

`ordering="protocol"` plays the nominal trial first within each pair (the
written protocol); `ordering="sourcecode"` plays the perturbed trial first
(the published simulation listings).  The conjecture and gradient estimates
are order-invariant for converged trials, and both orderings are kept.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Optional

from .adaptation import best_response_policy
from .errors import ConfigError
from .games import (
    AffinePolicy,
    CobbDouglasGame,
    Game,
    HybridGame,
    JointAction,
    Player,
    ScalarQuadraticGame,
    human_best_response_to_action,
)
from .equilibria import stackelberg_follower_slope
from .humans import DEFAULT_CONJ_BETA, DEFAULT_FD_BETA, DEFAULT_FD_PROBE

#: Policy substituted for the "infinite rate" machine in the Cobb-Douglas
#: replicate of Experiment 1, carried verbatim from the study description.
COBB_EXP1_LIMIT_POLICY = AffinePolicy(-77.0 / 270.0, 20.0 / 27.0)


def _machine_side(game: Game) -> Game:
    return game.machine_side if isinstance(game, HybridGame) else game


def _machine_bounds(game: Game) -> Optional[tuple[float, float]]:
    if isinstance(game, CobbDouglasGame):
        return game.machine_bounds
    return None


def _clip(x: float, bounds: Optional[tuple[float, float]]) -> float:
    if bounds is None:
        return x
    return min(bounds[1], max(bounds[0], x))


def _steady(series: list[float], mode: str) -> float:
    if mode == "median":
        return statistics.median(series)
    return series[-1]


# ---------------------------------------------------------------------------
# Experiment 1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Exp1Endpoint:
    alpha: float
    h: float
    m: float


def simulate_exp1_fd(game: Game, alpha: float, T: int = 10_000,
                     beta: float = DEFAULT_FD_BETA, probe: float = DEFAULT_FD_PROBE,
                     h0: float = 0.0, m0: float = 0.0,
                     nash_m: Optional[float] = None,
                     limit_policy: Optional[AffinePolicy] = None) -> Exp1Endpoint:
    """Finite-difference human vs. machine gradient play at rate alpha.

    K = ceil(alpha/beta) machine steps per human step.  Each human step runs
    a perturbed pass then a nominal pass, with the machine restarted from
    the shared state so the two observed costs differ only through the
    probe.  Costs are observed at the machine state after K-1 updates, and
    the machine carries the nominal pass's final state forward.

    alpha = 0 plays the constant Nash-action policy; alpha = inf plays
    `limit_policy` (the follower best-response line by default).
    """
    bounds = _machine_bounds(game)
    if alpha == 0.0:
        if nash_m is None:
            raise ConfigError("alpha = 0 requires the Nash machine action")
        h = h0
        for _ in range(T):
            c_pert = game.cost(Player.HUMAN, h + probe, nash_m)
            c_nom = game.cost(Player.HUMAN, h, nash_m)
            h = h - beta * (c_pert - c_nom) / 2.0 / probe
        return Exp1Endpoint(alpha, h, nash_m)

    if math.isinf(alpha):
        policy = limit_policy
        if policy is None:
            machine = _machine_side(game)
            if not isinstance(machine, ScalarQuadraticGame):
                raise ConfigError("infinite rate needs an explicit limit policy")
            policy = best_response_policy(machine, 0.0)
        h = h0
        for _ in range(T):
            m = _clip(policy(h), bounds)
            c_pert = game.cost(Player.HUMAN, h + probe, _clip(policy(h + probe), bounds))
            c_nom = game.cost(Player.HUMAN, h, m)
            h = h - beta * (c_pert - c_nom) / 2.0 / probe
        return Exp1Endpoint(alpha, h, _clip(policy(h), bounds))

    K = math.ceil(alpha / beta)
    h, m = h0, m0
    t = 0
    while t < T:
        costs = []
        m_nominal_end = m
        for d in (probe, 0.0):
            hk = h + d
            mk = m
            for k in range(K):
                m_next = _clip(mk - alpha * game.grad(Player.MACHINE, hk, mk)[1], bounds)
                if k < K - 1:
                    mk = m_next
            costs.append(game.cost(Player.HUMAN, hk, mk))
            m_nominal_end = m_next
        gradient = (costs[0] - costs[1]) / 2.0 / probe
        h = h - K * beta * gradient
        m = m_nominal_end
        t += K
    return Exp1Endpoint(alpha, h, m)


def simulate_exp1_oracle(game: Game, alpha: float, T: int = 10_000,
                         h0: float = 0.0, m0: float = 0.0,
                         nash_m: Optional[float] = None,
                         limit_policy: Optional[AffinePolicy] = None) -> Exp1Endpoint:
    """Best-responder human vs. machine gradient play.

    At alpha = 0 the human best responds to the constant Nash policy; at
    alpha >= 1 (or inf) the machine's update is a pure policy and the human
    best responds to that line.  In between, the oracle responds myopically
    to the current machine action each sample, so the converged pair sits at
    the intersection of the two action best-response curves.
    """
    from .games import human_best_response

    bounds = _machine_bounds(game)
    if alpha == 0.0:
        if nash_m is None:
            raise ConfigError("alpha = 0 requires the Nash machine action")
        return Exp1Endpoint(alpha, human_best_response_to_action(game, nash_m), nash_m)

    if alpha >= 1.0 or math.isinf(alpha):
        policy = limit_policy
        if policy is None:
            machine = _machine_side(game)
            if not isinstance(machine, ScalarQuadraticGame):
                raise ConfigError("infinite rate needs an explicit limit policy")
            policy = best_response_policy(machine, 0.0)
        h = human_best_response(game, policy)
        return Exp1Endpoint(alpha, h, _clip(policy(h), bounds))

    h, m = h0, m0
    for _ in range(T):
        h = human_best_response_to_action(game, m)
        m = _clip(m - alpha * game.grad(Player.MACHINE, h, m)[1], bounds)
    return Exp1Endpoint(alpha, h, m)


# ---------------------------------------------------------------------------
# Experiments 2 and 3
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Exp2Result:
    machine_slopes: tuple[float, ...]       # L_M,0 .. L_M,K
    conjectures: tuple[float, ...]          # estimated L_H per iteration
    steady_pairs: tuple[tuple[JointAction, JointAction], ...]  # (nominal, perturbed)
    final_actions: JointAction


@dataclass(frozen=True)
class Exp3Result:
    slopes: tuple[float, ...]               # L_M,0 .. L_M,K
    gradient_estimates: tuple[float, ...]   # FD estimate per iteration
    nominal_costs: tuple[float, ...]        # steady machine cost per iteration
    final_actions: JointAction


def _phases(ordering: str) -> tuple[str, str]:
    if ordering == "sourcecode":
        return ("perturbed", "nominal")
    if ordering == "protocol":
        return ("nominal", "perturbed")
    raise ConfigError(f"unknown ordering {ordering!r} (protocol|sourcecode)")


def simulate_exp2(game: Game, L0: Optional[float] = None, delta: float = 0.1,
                  K: int = 10, T: int = 10_000, beta: float = DEFAULT_CONJ_BETA,
                  h0: float = 0.0, ordering: str = "protocol",
                  steady: str = "last") -> Exp2Result:
    """Conjectural-variation iteration against the conjecture-aware human.

    Each iteration plays the nominal policy and the intercept-perturbed
    policy for T samples apiece (the human's action persisting throughout),
    estimates the human's slope from the steady pairs, and best responds.
    With `steady="last"` the steady state is the final iterate, as in the
    reference simulations; "median" uses the within-trial medians.
    """
    from .humans import ConjAwareHuman

    machine = _machine_side(game)
    if L0 is None:
        policy = best_response_policy(machine, 0.0)
    elif isinstance(machine, ScalarQuadraticGame):
        opt = machine.machine_optimum()
        policy = AffinePolicy.anchored(L0, opt.h, opt.m)
    else:
        policy = AffinePolicy(L0, best_response_policy(machine, 0.0).intercept)
    human = ConjAwareHuman(game, h=h0, beta=beta)
    slopes = [policy.slope]
    conjectures: list[float] = []
    pairs: list[tuple[JointAction, JointAction]] = []
    for _ in range(K):
        steadies: dict[str, JointAction] = {}
        bounds = _machine_bounds(game)
        for phase in _phases(ordering):
            trial_policy = policy if phase == "nominal" else policy.perturbed_intercept(delta)
            m = _clip(trial_policy(human.h), bounds)
            hs: list[float] = []
            ms: list[float] = []
            for _ in range(T):
                h_prev = human.h
                human.step(trial_policy.slope, JointAction(h_prev, m))
                m = _clip(trial_policy(h_prev), bounds)
                hs.append(human.h)
                ms.append(m)
            steadies[phase] = JointAction(_steady(hs, steady), _steady(ms, steady))
        nominal, perturbed = steadies["nominal"], steadies["perturbed"]
        conjecture = (perturbed.h - nominal.h) / (perturbed.m - nominal.m)
        conjectures.append(conjecture)
        policy = best_response_policy(machine, conjecture)
        slopes.append(policy.slope)
        pairs.append((nominal, perturbed))
    return Exp2Result(tuple(slopes), tuple(conjectures), tuple(pairs),
                      pairs[-1][0])


def simulate_exp3(game: Game, L0: Optional[float] = None, Delta: float = 0.1,
                  gamma: float = 2.0, K: int = 10, T: int = 10_000,
                  beta: float = DEFAULT_CONJ_BETA, h0: float = 0.0,
                  anchor: Optional[JointAction] = None,
                  ordering: str = "protocol", steady: str = "last") -> Exp3Result:
    """Policy-gradient iteration against the conjecture-aware human.

    The machine plays the anchored policies with slopes L and L + Delta,
    reads off the steady machine cost of each trial, and steps the slope
    against the forward-difference estimate (perturbed minus nominal, over
    Delta) scaled by gamma.
    """
    from .humans import ConjAwareHuman

    machine = _machine_side(game)
    if anchor is None:
        if not isinstance(machine, ScalarQuadraticGame):
            raise ConfigError("Cobb-Douglas policy gradient needs an explicit anchor")
        anchor = machine.machine_optimum()
    if L0 is None:
        L0 = (stackelberg_follower_slope(machine)
              if isinstance(machine, ScalarQuadraticGame) else 1.0)
    human = ConjAwareHuman(game, h=h0, beta=beta)
    L = L0
    slopes = [L]
    estimates: list[float] = []
    nominal_costs: list[float] = []
    final = JointAction(h0, anchor.m)
    for _ in range(K):
        costs: dict[str, float] = {}
        for phase in _phases(ordering):
            slope = L if phase == "nominal" else L + Delta
            trial_policy = AffinePolicy.anchored(slope, anchor.h, anchor.m)
            m = trial_policy(human.h)
            series: list[float] = []
            for _ in range(T):
                h_prev = human.h
                human.step(slope, JointAction(h_prev, m))
                m = trial_policy(h_prev)
                series.append(game.cost(Player.MACHINE, human.h, m))
            costs[phase] = _steady(series, steady)
            if phase == "nominal":
                final = JointAction(human.h, m)
        estimate = (costs["perturbed"] - costs["nominal"]) / Delta
        estimates.append(estimate)
        nominal_costs.append(costs["nominal"])
        L = L - gamma * estimate
        slopes.append(L)
    return Exp3Result(tuple(slopes), tuple(estimates), tuple(nominal_costs), final)
