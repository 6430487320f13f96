"""Experiment runner: trial sequencing, randomization, pairing, medians,
statistics, and record export.

Two protocol modes share one trial engine:

* ``trial`` -- the live-session emulation: every trial re-initializes from
  the configured square, runs duration x rate samples at the 60 Hz cadence,
  and strategy updates consume within-trial medians.
* ``replication`` -- the reference-simulation semantics: the human's action
  persists across trials, the sample count is taken from ``samples``, and
  strategy updates consume the trial-end steady state.

Runs are deterministic given (config, seed): a single seeded generator draws
the condition schedule, mirror signs, and initial actions in a fixed order,
and exports are byte-stable.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .adaptation import ConjVar, GradientPlay, initial_policygrad
from .equilibria import EquilibriumReport, solve_nash, stackelberg_follower_slope
from .errors import (
    ConfigError,
    ConjectureUndefinedError,
    PairingError,
    SingularIterationError,
)
from .games import (
    AffinePolicy,
    CANONICAL_GAME,
    COBB_GAME,
    CobbDouglasGame,
    Game,
    HybridGame,
    JointAction,
    Player,
    ScalarQuadraticGame,
    game_from_text,
    quadratic_machine_cost,
    shifted_canonical_machine,
)
from .humans import BestResponder, ConjAwareHuman, FDGradientHuman
from .stats import StatResult, t_test_one_sample

EXP1_ALPHAS = (0.0, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0)
NOMINAL = "nominal"
PERTURBED = "perturbed"


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HumanCfg:
    variant: str = "conj_aware"  # best_responder | fd_gradient | conj_aware
    beta: Optional[float] = None  # default depends on variant
    probe: float = 1e-5
    noise: float = 0.0

    def resolved_beta(self) -> float:
        if self.beta is not None:
            return self.beta
        return 0.003 if self.variant == "fd_gradient" else 3e-3


@dataclass(frozen=True)
class MachineCfg:
    alphas: tuple[float, ...] = EXP1_ALPHAS  # experiment 1
    delta: float = 0.1                        # experiment 2 intercept probe
    Delta: float = 0.1                        # experiment 3 slope probe
    gamma: float = 2.0
    L0: Optional[float] = None
    anchor: Optional[JointAction] = None
    iterations: int = 10


@dataclass(frozen=True)
class ProtocolCfg:
    mode: str = "trial"  # trial | replication
    trial_seconds: Optional[float] = None  # default 40 (exp 1) or 20 (exps 2-3)
    sample_rate_hz: int = 60
    samples: int = 10_000  # replication-mode sample count
    init_low: float = -0.4
    init_high: float = 0.4
    rest_every_n_trials: int = 3
    rest_seconds: float = 30.0
    mirror: Optional[bool] = None  # default: experiment 1 only
    ordering: str = "protocol"  # protocol | sourcecode
    tail_window: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: int
    game: Game = CANONICAL_GAME
    game_name: str = "canonical"
    seed: int = 0
    human: HumanCfg = field(default_factory=HumanCfg)
    machine: MachineCfg = field(default_factory=MachineCfg)
    protocol: ProtocolCfg = field(default_factory=ProtocolCfg)

    def __post_init__(self) -> None:
        if self.experiment not in (1, 2, 3):
            raise ConfigError(f"experiment must be 1, 2, or 3, got {self.experiment}")
        if self.protocol.sample_rate_hz <= 0:
            raise ConfigError("sample rate must be positive")
        if self.trial_seconds <= 0:
            raise ConfigError("trial duration must be positive")

    @property
    def trial_seconds(self) -> float:
        if self.protocol.trial_seconds is not None:
            return self.protocol.trial_seconds
        return 40.0 if self.experiment == 1 else 20.0

    @property
    def mirrored(self) -> bool:
        if self.protocol.mirror is not None:
            return self.protocol.mirror
        return self.experiment == 1

    def samples_per_trial(self) -> int:
        if self.protocol.mode == "replication":
            return self.protocol.samples
        return round(self.trial_seconds * self.protocol.sample_rate_hz)

    def trial_count(self) -> int:
        if self.experiment == 1:
            return 2 * len(self.machine.alphas)
        return 2 * self.machine.iterations

    def describe(self) -> dict:
        """JSON-normalized config (lists, not tuples) that round-trips
        exactly through config_from_dict."""
        from .games import game_to_payload

        d = {
            "experiment": self.experiment,
            "game": {"name": self.game_name, **game_to_payload(self.game)},
            "seed": self.seed,
            "human": asdict(self.human),
            "machine": asdict(self.machine),
            "protocol": asdict(self.protocol),
        }
        d["machine"]["alphas"] = list(self.machine.alphas)
        if self.machine.anchor is not None:
            d["machine"]["anchor"] = list(self.machine.anchor)
        return d


def config_from_dict(payload: dict) -> ExperimentConfig:
    """Inverse of ExperimentConfig.describe(); used by session logs."""
    from .games import game_from_payload

    game_section = dict(payload["game"])
    name = game_section.pop("name", "custom")
    machine_raw = dict(payload.get("machine", {}))
    if machine_raw.get("anchor") is not None:
        machine_raw["anchor"] = JointAction(*machine_raw["anchor"])
    if "alphas" in machine_raw:
        machine_raw["alphas"] = tuple(machine_raw["alphas"])
    return ExperimentConfig(
        experiment=int(payload["experiment"]),
        game=game_from_payload(game_section),
        game_name=name,
        seed=int(payload.get("seed", 0)),
        human=HumanCfg(**payload.get("human", {})),
        machine=MachineCfg(**machine_raw),
        protocol=ProtocolCfg(**payload.get("protocol", {})),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read an experiment config from a TOML file."""
    try:
        import tomllib  # py311+
    except ModuleNotFoundError:
        import tomli as tomllib

    raw = tomllib.loads(Path(path).read_text())
    game, game_name = _resolve_game(raw.get("game", {}))
    machine_raw = dict(raw.get("machine", {}))
    if "alphas" in machine_raw:
        machine_raw["alphas"] = tuple(float(a) for a in machine_raw["alphas"])
    if "anchor" in machine_raw:
        machine_raw["anchor"] = JointAction(*machine_raw["anchor"])
    protocol_raw = dict(raw.get("protocol", {}))
    if "init" in protocol_raw:
        lo, hi = protocol_raw.pop("init")
        protocol_raw["init_low"], protocol_raw["init_high"] = float(lo), float(hi)
    try:
        return ExperimentConfig(
            experiment=int(raw["experiment"]),
            game=game,
            game_name=game_name,
            seed=int(raw.get("seed", 0)),
            human=HumanCfg(**raw.get("human", {})),
            machine=MachineCfg(**machine_raw),
            protocol=ProtocolCfg(**protocol_raw),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad experiment config {path}: {exc}") from exc


def _resolve_game(section: dict) -> tuple[Game, str]:
    kind = section.get("kind", "canonical")
    if kind == "canonical":
        return CANONICAL_GAME, "canonical"
    if kind == "cobb":
        return COBB_GAME, "cobb"
    if kind == "cobb_exp3":
        hs = float(section.get("h_star", 0.5))
        ms = float(section.get("m_star", 0.5))
        return (HybridGame(COBB_GAME, quadratic_machine_cost(hs, ms)),
                f"cobb_exp3({hs},{ms})")
    if kind == "grid":
        hs = float(section.get("h_star", 0.0))
        ms = float(section.get("m_star", 0.0))
        return shifted_canonical_machine(hs, ms), f"grid({hs},{ms})"
    if kind == "file":
        path = Path(section["path"])
        return game_from_text(path.read_text()), str(path)
    raise ConfigError(f"unknown game kind {kind!r}")


# ---------------------------------------------------------------------------
# Trial records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    index: int
    condition: dict
    sign: int
    init: JointAction
    h: tuple[float, ...]
    m: tuple[float, ...]
    c_h: tuple[float, ...]
    c_m: tuple[float, ...]
    tail_window: float = 1.0

    def _tail(self, series: Sequence[float]) -> Sequence[float]:
        n = max(1, math.ceil(self.tail_window * len(series)))
        return series[len(series) - n:]

    @property
    def median_h(self) -> float:
        return statistics.median(self._tail(self.h))

    @property
    def median_m(self) -> float:
        return statistics.median(self._tail(self.m))

    @property
    def median_c_h(self) -> float:
        return statistics.median(self._tail(self.c_h))

    @property
    def median_c_m(self) -> float:
        return statistics.median(self._tail(self.c_m))

    @property
    def medians(self) -> JointAction:
        return JointAction(self.median_h, self.median_m)

    @property
    def last(self) -> JointAction:
        return JointAction(self.h[-1], self.m[-1])


@dataclass(frozen=True)
class TraceRow:
    k: int
    phaseless_estimate: float  # conjecture (exp 2) or gradient estimate (exp 3)
    slope: float
    intercept: float


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    records: tuple[TrialRecord, ...]
    trace: tuple[TraceRow, ...] = ()

    def pairs(self) -> list[tuple[TrialRecord, TrialRecord]]:
        return [pair_for_iteration(self.records, k)
                for k in range(self.config.machine.iterations)]


def pair_for_iteration(records: Sequence[TrialRecord], k: int) -> tuple[TrialRecord, TrialRecord]:
    """The (nominal, perturbed) records of iteration k."""
    nominal = [r for r in records if r.condition.get("k") == k
               and r.condition.get("phase") == NOMINAL]
    perturbed = [r for r in records if r.condition.get("k") == k
                 and r.condition.get("phase") == PERTURBED]
    if len(nominal) != 1 or len(perturbed) != 1:
        raise PairingError(
            f"iteration {k}: expected one nominal and one perturbed trial, "
            f"found {len(nominal)} and {len(perturbed)}")
    return nominal[0], perturbed[0]


def pair_medians(records: Sequence[TrialRecord], k: int,
                 steady: str = "median") -> tuple[JointAction, JointAction, float, float]:
    """(nominal actions, perturbed actions, nominal c_M, perturbed c_M) for
    iteration k.  `steady="last"` reads trial-end values instead of medians."""
    nominal, perturbed = pair_for_iteration(records, k)
    if steady == "last":
        return (nominal.last, perturbed.last, nominal.c_m[-1], perturbed.c_m[-1])
    return (nominal.medians, perturbed.medians, nominal.median_c_m, perturbed.median_c_m)


# ---------------------------------------------------------------------------
# Deterministic trial planning (shared with the live session engine)
# ---------------------------------------------------------------------------

def derive_seed(seed: int, salt: int) -> int:
    """Stable derived stream seed (independent of hash randomization)."""
    return (seed * 2654435761 + salt * 40503) % 2**63


@dataclass(frozen=True)
class TrialSetup:
    condition: dict
    sign: int
    init: JointAction


@dataclass(frozen=True)
class TrialPlan:
    """Everything (config, seed) determines before the first sample: the
    condition schedule, mirror signs, and initial joint actions.  The live
    session's attention target for a trial is its init's human coordinate."""

    initial_h: float
    trials: tuple[TrialSetup, ...]


def plan_trials(cfg: ExperimentConfig) -> TrialPlan:
    rng = random.Random(cfg.seed)
    if cfg.experiment == 1:
        schedule = [(alpha, s) for alpha in cfg.machine.alphas for s in (1, -1)]
        rng.shuffle(schedule)
        trials = tuple(TrialSetup({"alpha": alpha}, s, _draw_init(cfg, rng))
                       for alpha, s in schedule)
        return TrialPlan(trials[0].init.h if trials else 0.0, trials)
    initial = _draw_init(cfg, rng)
    trials = []
    for k in range(cfg.machine.iterations):
        for phase in _phases(cfg.protocol.ordering):
            sign = rng.choice((1, -1)) if cfg.mirrored else 1
            trials.append(TrialSetup({"k": k, "phase": phase}, sign,
                                     _draw_init(cfg, rng)))
    return TrialPlan(initial.h, tuple(trials))


# ---------------------------------------------------------------------------
# The trial engine
# ---------------------------------------------------------------------------

class _HumanDriver:
    """Steps a configured human model inside a policy trial."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.variant = cfg.human.variant
        game = cfg.game
        beta = cfg.human.resolved_beta()
        noise_rng = random.Random(derive_seed(cfg.seed, 1))
        if self.variant == "conj_aware":
            self.model = ConjAwareHuman(game, beta=beta, noise=cfg.human.noise,
                                        rng=noise_rng)
        elif self.variant == "best_responder":
            self.model = BestResponder(game)
        elif self.variant == "fd_gradient":
            self.model = FDGradientHuman(game, beta=beta, probe=cfg.human.probe,
                                         noise=cfg.human.noise, rng=noise_rng)
        else:
            raise ConfigError(f"unknown human variant {self.cfg.human.variant!r}")

    def reset(self, h0: float) -> None:
        if self.variant in ("conj_aware", "fd_gradient"):
            self.model.h = h0

    def policy_trial_step(self, policy: AffinePolicy, h: float, m: float) -> float:
        """Next human action inside a trial against an affine machine policy."""
        if self.variant == "conj_aware":
            return self.model.step(policy.slope, JointAction(h, m))
        if self.variant == "best_responder":
            return self.model.respond_to_policy(policy)
        # fd_gradient: probe the policy line directly
        hp = h + self.model.probe
        c_pert = self.cfg.game.cost(Player.HUMAN, hp, policy(hp))
        c_nom = self.cfg.game.cost(Player.HUMAN, h, policy(h))
        return self.model.step(c_pert, c_nom)


def machine_clip(game: Game, m: float) -> float:
    """Cobb-Douglas machines keep their action inside the game's bounds."""
    if isinstance(game, CobbDouglasGame):
        lo, hi = game.machine_bounds
        return min(hi, max(lo, m))
    return m


def _policy_trial(cfg: ExperimentConfig, driver: _HumanDriver, policy: AffinePolicy,
                  index: int, condition: dict, sign: int, h0: float) -> TrialRecord:
    game = cfg.game
    T = cfg.samples_per_trial()
    h = h0
    m = machine_clip(game, policy(h))
    hs, ms = [h], [m]
    chs = [game.cost(Player.HUMAN, h, m)]
    cms = [game.cost(Player.MACHINE, h, m)]
    for _ in range(T):
        h = driver.policy_trial_step(policy, h, m)
        m = machine_clip(game, policy(h))
        hs.append(h)
        ms.append(m)
        chs.append(game.cost(Player.HUMAN, h, m))
        cms.append(game.cost(Player.MACHINE, h, m))
    return TrialRecord(index, condition, sign, JointAction(h0, ms[0]),
                       tuple(hs), tuple(ms), tuple(chs), tuple(cms),
                       cfg.protocol.tail_window)


def _draw_init(cfg: ExperimentConfig, rng: random.Random) -> JointAction:
    lo, hi = cfg.protocol.init_low, cfg.protocol.init_high
    init = JointAction(rng.uniform(lo, hi), rng.uniform(lo, hi))
    game = cfg.game
    human = game.human_side if isinstance(game, HybridGame) else game
    if isinstance(human, CobbDouglasGame):
        # keep drawn starts inside the cost's domain
        blo, bhi = human.human_bounds
        init = JointAction(min(bhi, max(blo, init.h)), init.m)
        mlo, mhi = (game.machine_bounds if isinstance(game, CobbDouglasGame)
                    else (init.m, init.m))
        init = JointAction(init.h, min(mhi, max(mlo, init.m)))
    return init


def _phases(ordering: str) -> tuple[str, str]:
    if ordering == "sourcecode":
        return (PERTURBED, NOMINAL)
    if ordering == "protocol":
        return (NOMINAL, PERTURBED)
    raise ConfigError(f"unknown ordering {ordering!r}")


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run one subject's full experiment; deterministic given (cfg, seed)."""
    plan = plan_trials(cfg)
    if cfg.experiment == 1:
        return _run_exp1(cfg, plan)
    return _run_policy_experiment(cfg, plan)


def _exp1_nash_action(game: Game) -> Optional[float]:
    if isinstance(game, ScalarQuadraticGame):
        return solve_nash(game)[0].m
    if isinstance(game, CobbDouglasGame):
        from .equilibria import cobb_nash

        return cobb_nash(game).m
    return None


def _run_exp1(cfg: ExperimentConfig, plan: TrialPlan) -> ExperimentResult:
    nash_m = _exp1_nash_action(cfg.game)
    records = []
    driver = _HumanDriver(cfg)
    for index, setup in enumerate(plan.trials):
        records.append(_exp1_trial(cfg, driver, setup.condition["alpha"], nash_m,
                                   index, setup.sign, setup.init))
    return ExperimentResult(cfg, tuple(records))


def _exp1_trial(cfg: ExperimentConfig, driver: _HumanDriver, alpha: float,
                nash_m: Optional[float], index: int, sign: int,
                init: JointAction) -> TrialRecord:
    game = cfg.game
    T = cfg.samples_per_trial()
    condition = {"alpha": alpha}
    if alpha == 0.0:
        if nash_m is None:
            raise ConfigError("experiment 1 with alpha = 0 needs a Nash action")
        machine = GradientPlay(game, 0.0, init.m, nash_m)
    else:
        machine = GradientPlay(game, alpha, init.m, nash_m if nash_m is not None else 0.0)
    h = init.h
    m = init.m
    driver.reset(h)
    hs, ms = [h], [m]
    chs = [game.cost(Player.HUMAN, h, m)]
    cms = [game.cost(Player.MACHINE, h, m)]
    probe_hold = 1
    if driver.variant == "fd_gradient":
        probe_hold = max(1, math.ceil(alpha / driver.model.beta)) if alpha > 0 else 1
        driver.model.K = probe_hold
    t = 0
    follower = AffinePolicy(stackelberg_follower_slope(game), 0.0) \
        if isinstance(game, ScalarQuadraticGame) else None
    while t < T:
        if driver.variant == "best_responder":
            # oracle: policy response at the rate extremes, myopic in between
            if alpha == 0.0:
                h = driver.model.respond_to_policy(AffinePolicy(0.0, nash_m))
            elif alpha >= 1.0 and follower is not None:
                h = driver.model.respond_to_policy(follower)
            else:
                h = driver.model.respond_to_action(m)
            m = machine.step(h)
            hs.append(h)
            ms.append(m)
            chs.append(game.cost(Player.HUMAN, h, m))
            cms.append(game.cost(Player.MACHINE, h, m))
            t += 1
        elif driver.variant == "fd_gradient":
            # two probe passes of K samples each, machine restarted from the
            # shared state between them; the nominal pass is what gets recorded
            K = probe_hold
            costs = []
            m_carry = m
            recorded: list[tuple[float, float]] = []
            for d in (driver.model.probe, 0.0):
                hk = h + d
                mk = m
                m_next = mk
                for k in range(K):
                    if alpha == 0.0:
                        m_next = nash_m if nash_m is not None else mk
                    else:
                        m_next = mk - alpha * game.grad(Player.MACHINE, hk, mk)[1]
                    if d == 0.0:
                        recorded.append((hk, mk))
                    if k < K - 1:
                        mk = m_next
                costs.append(game.cost(Player.HUMAN, hk, mk))
                m_carry = m_next
            h = driver.model.step(costs[0], costs[1])
            m = m_carry
            for hk, mk in recorded[:T - t]:
                hs.append(hk)
                ms.append(mk)
                chs.append(game.cost(Player.HUMAN, hk, mk))
                cms.append(game.cost(Player.MACHINE, hk, mk))
            t += K
        else:  # conj_aware: plain-gradient human (zero conjecture)
            h = driver.model.step(0.0, JointAction(h, m))
            m = machine.step(h)
            hs.append(h)
            ms.append(m)
            chs.append(game.cost(Player.HUMAN, h, m))
            cms.append(game.cost(Player.MACHINE, h, m))
            t += 1
    return TrialRecord(index, condition, sign, init, tuple(hs), tuple(ms),
                       tuple(chs), tuple(cms), cfg.protocol.tail_window)


def build_policy_strategy(cfg: ExperimentConfig):
    """The configured between-trial strategy for experiments 2 and 3."""
    game = cfg.game
    if cfg.experiment == 2:
        strategy = ConjVar(game, delta=cfg.machine.delta)
        if cfg.machine.L0 is not None:
            machine_side = game.machine_side if isinstance(game, HybridGame) else game
            if isinstance(machine_side, ScalarQuadraticGame):
                opt = machine_side.machine_optimum()
                strategy.policy = AffinePolicy.anchored(cfg.machine.L0, opt.h, opt.m)
            else:
                strategy.policy = AffinePolicy(cfg.machine.L0, strategy.policy.intercept)
        return strategy
    return initial_policygrad(game, anchor=cfg.machine.anchor,
                              slope=cfg.machine.L0, Delta=cfg.machine.Delta,
                              gamma=cfg.machine.gamma)


def apply_pair_update(cfg: ExperimentConfig, strategy, records: Sequence[TrialRecord],
                      k: int, steady: str) -> TraceRow:
    """Run the between-trial estimate/update from iteration k's pair."""
    nominal, perturbed, c_nom, c_pert = pair_medians(records, k, steady)
    if cfg.experiment == 2:
        conjecture = strategy.estimate(nominal, perturbed)
        strategy.update(conjecture)
        return TraceRow(k, conjecture, strategy.policy.slope,
                        strategy.policy.intercept)
    estimate = strategy.estimate(c_nom, c_pert)
    strategy.update(estimate)
    return TraceRow(k, estimate, strategy.slope,
                    strategy.nominal_policy().intercept)


def _run_policy_experiment(cfg: ExperimentConfig, plan: TrialPlan) -> ExperimentResult:
    replication = cfg.protocol.mode == "replication"
    steady = "last" if replication else "median"
    strategy = build_policy_strategy(cfg)
    driver = _HumanDriver(cfg)
    h_carry = plan.initial_h
    driver.reset(h_carry)
    records: list[TrialRecord] = []
    trace: list[TraceRow] = []
    queue = list(plan.trials)
    retried: set[int] = set()
    index = 0
    while queue:
        setup = queue.pop(0)
        phase = setup.condition["phase"]
        k = setup.condition["k"]
        policy = (strategy.nominal_policy() if phase == NOMINAL
                  else strategy.perturbed_policy())
        if replication:
            h0 = h_carry
        else:
            h0 = setup.init.h
            driver.reset(h0)
        rec = _policy_trial(cfg, driver, policy, index, setup.condition,
                            setup.sign, h0)
        h_carry = rec.h[-1]
        records.append(rec)
        index += 1
        if phase != _phases(cfg.protocol.ordering)[1]:
            continue
        try:
            trace.append(apply_pair_update(cfg, strategy, records, k, steady))
        except (ConjectureUndefinedError, SingularIterationError) as exc:
            if k in retried:
                raise type(exc)(
                    f"iteration {k} (trials {rec.index - 1}-{rec.index}): {exc}"
                ) from exc
            # rerun the pair once, dropping its failed records
            retried.add(k)
            records = [r for r in records if r.condition.get("k") != k]
            pair = [s for s in plan.trials if s.condition.get("k") == k]
            queue[0:0] = pair
    return ExperimentResult(cfg, tuple(records), tuple(trace))


# ---------------------------------------------------------------------------
# Export / import
# ---------------------------------------------------------------------------

def _record_to_json(rec: TrialRecord) -> dict:
    return {
        "index": rec.index,
        "condition": rec.condition,
        "sign": rec.sign,
        "init": list(rec.init),
        "h": list(rec.h),
        "m": list(rec.m),
        "c_h": list(rec.c_h),
        "c_m": list(rec.c_m),
        "tail_window": rec.tail_window,
    }


def _record_from_json(obj: dict) -> TrialRecord:
    return TrialRecord(
        index=obj["index"],
        condition=obj["condition"],
        sign=obj["sign"],
        init=JointAction(*obj["init"]),
        h=tuple(obj["h"]),
        m=tuple(obj["m"]),
        c_h=tuple(obj["c_h"]),
        c_m=tuple(obj["c_m"]),
        tail_window=obj.get("tail_window", 1.0),
    )


def _condition_label(condition: dict) -> str:
    if "alpha" in condition:
        return f"alpha={condition['alpha']!r}"
    return f"k={condition['k']} {condition['phase']}"


def export_records(result: ExperimentResult, directory: str | Path) -> list[Path]:
    """Write records.ndjson, summary.csv, manifest.json (+ trace.csv).

    Byte-stable across runs with the same (config, seed).
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    ndjson = directory / "records.ndjson"
    with ndjson.open("w", newline="\n") as fh:
        for rec in result.records:
            fh.write(json.dumps(_record_to_json(rec), sort_keys=True,
                                separators=(",", ":")) + "\n")
    written.append(ndjson)

    summary = directory / "summary.csv"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["trial", "condition", "sign", "median_h", "median_m",
                     "median_c_h", "median_c_m"])
    for rec in result.records:
        writer.writerow([rec.index, _condition_label(rec.condition), rec.sign,
                         repr(rec.median_h), repr(rec.median_m),
                         repr(rec.median_c_h), repr(rec.median_c_m)])
    summary.write_text(buf.getvalue())
    written.append(summary)

    if result.trace:
        trace = directory / "trace.csv"
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        estimate_name = "conjecture" if result.config.experiment == 2 else "gradient"
        writer.writerow(["k", estimate_name, "slope", "intercept"])
        for row in result.trace:
            writer.writerow([row.k, repr(row.phaseless_estimate),
                             repr(row.slope), repr(row.intercept)])
        trace.write_text(buf.getvalue())
        written.append(trace)

    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps(result.config.describe(), sort_keys=True,
                                   indent=2) + "\n")
    written.append(manifest)
    return written


def load_records(directory: str | Path) -> list[TrialRecord]:
    path = Path(directory) / "records.ndjson"
    records = []
    for line in path.read_text().splitlines():
        if line.strip():
            records.append(_record_from_json(json.loads(line)))
    return records


# ---------------------------------------------------------------------------
# Analysis (population statistics against equilibrium values)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalysisRow:
    label: str
    hypothesized: float
    result: Optional[StatResult]  # None marks a not-testable cell


def _subject_condition_median(result: ExperimentResult, pick, value) -> float:
    """Median over the picked trials' per-trial summary `value`."""
    vals = [value(r) for r in result.records if pick(r)]
    if not vals:
        raise PairingError("no trials match the analysis condition")
    return statistics.median(vals)


def analyze(results: Sequence[ExperimentResult],
            report: EquilibriumReport) -> list[AnalysisRow]:
    """Population tests against equilibrium values, one row per cell.

    Action and policy tests are two-sided; cost tests are one-sided.  Each
    subject contributes its per-condition median of trial medians.
    """
    if not results:
        return []
    experiment = results[0].config.experiment
    rows: list[AnalysisRow] = []

    def add(label: str, values: list[float], hypothesized: float, sided: str = "two"):
        if len(values) < 2:
            rows.append(AnalysisRow(label, hypothesized, None))
            return
        rows.append(AnalysisRow(label, hypothesized,
                                t_test_one_sample(values, hypothesized, sided)))

    if experiment == 1:
        alphas = results[0].config.machine.alphas
        slow, fast = min(alphas), max(alphas)
        for alpha, name in ((slow, "initial"), (fast, "final")):
            for coord, value in (("h", lambda r: r.median_h), ("m", lambda r: r.median_m)):
                values = [_subject_condition_median(
                    res, lambda r: r.condition.get("alpha") == alpha, value)
                    for res in results]
                add(f"{name} {coord} vs NE", values,
                    report.nash.h if coord == "h" else report.nash.m)
                add(f"{name} {coord} vs SE", values,
                    report.stackelberg.h if coord == "h" else report.stackelberg.m)
        return rows

    last_k = results[0].config.machine.iterations - 1
    eq_pairs = {
        2: (("SE", report.stackelberg, report.stackelberg_slopes),
            ("CCVE", report.ccve, report.ccve_slopes)),
        3: (("SE", report.stackelberg, report.stackelberg_slopes),
            ("RSE", report.rse, report.rse_slopes)),
    }[experiment]

    for k, name in ((0, "initial"), (last_k, "final")):
        for coord, value in (("h", lambda r: r.median_h), ("m", lambda r: r.median_m)):
            values = [_subject_condition_median(
                res, lambda r: r.condition.get("k") == k
                and r.condition.get("phase") == NOMINAL, value)
                for res in results]
            for eq_name, actions, _ in eq_pairs:
                add(f"{name} {coord} vs {eq_name}", values,
                    actions.h if coord == "h" else actions.m)
        slopes = [res.trace[k].slope for res in results]
        for eq_name, _, eq_slopes in eq_pairs:
            add(f"{name} L_M vs {eq_name}", slopes, eq_slopes[1])
        if experiment == 2:
            conjectures = [res.trace[k].phaseless_estimate for res in results]
            for eq_name, _, eq_slopes in eq_pairs:
                add(f"{name} L_H vs {eq_name}", conjectures, eq_slopes[0])
        if experiment == 3:
            costs = [_subject_condition_median(
                res, lambda r: r.condition.get("k") == k
                and r.condition.get("phase") == NOMINAL,
                lambda r: r.median_c_m)
                for res in results]
            for eq_name, actions, _ in eq_pairs:
                cost_at = results[0].config.game.cost(Player.MACHINE, *actions)
                add(f"{name} c_M vs {eq_name}", costs, cost_at, sided="one")
    return rows


def analysis_to_csv(rows: Sequence[AnalysisRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "hypothesized", "t", "df", "p", "sided", "d"])
    for row in rows:
        if row.result is None:
            writer.writerow([row.label, repr(row.hypothesized),
                             "", "", "", "", "not-testable"])
        else:
            r = row.result
            writer.writerow([row.label, repr(row.hypothesized), repr(r.t),
                             r.df, repr(r.p), r.sided, repr(r.d)])
    return buf.getvalue()
