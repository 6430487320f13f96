"""The session engine: a synchronous, tick-driven state machine.

One `Session` hosts one subject's full experiment.  The server clock drives
it at the configured sample rate; each tick consumes the most recent cursor
input (zero-order hold when the client stalls) so trial sample counts are
exact.  All state transitions are functions of (config, seed, input ticks),
which is what makes logged sessions replayable bit for bit.

Flow: intro -> per trial [attention gate -> samples] -> rests between every
three trials -> survey -> done.  Between-trial strategy updates run when the
second trial of a pair ends; a failed conjecture estimate reruns the pair
once and then ends the session gracefully with a diagnostic.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from ..adaptation import GradientPlay
from ..errors import ConjectureUndefinedError, SessionStateError, SingularIterationError
from ..games import AffinePolicy, JointAction, Player, display_value
from ..harness import (
    NOMINAL,
    ExperimentConfig,
    TraceRow,
    TrialRecord,
    TrialSetup,
    _exp1_nash_action,
    _phases,
    apply_pair_update,
    build_policy_strategy,
    plan_trials,
)
from . import wire

ATTENTION_TOLERANCE = 0.05
ATTENTION_DWELL_TICKS = 30  # 0.5 s at 60 Hz


class SessionStatus(enum.Enum):
    INTRO = "intro"
    TRIAL = "trial"
    REST = "rest"
    SURVEY = "survey"
    DONE = "done"


class _TrialPhase(enum.Enum):
    ATTENTION = "attention"
    RUNNING = "running"


@dataclass
class _LiveTrial:
    setup: TrialSetup
    index: int
    phase: _TrialPhase = _TrialPhase.ATTENTION
    dwell: int = 0
    h: list[float] = field(default_factory=list)
    m: list[float] = field(default_factory=list)
    c_h: list[float] = field(default_factory=list)
    c_m: list[float] = field(default_factory=list)
    machine: Optional[GradientPlay] = None
    policy: Optional[AffinePolicy] = None  # experiments 2-3


class Session:
    """Single-writer session state; all events must arrive from one place."""

    def __init__(self, session_id: str, cfg: ExperimentConfig):
        self.id = session_id
        self.cfg = cfg
        self.status = SessionStatus.INTRO
        self.plan = list(plan_trials(cfg).trials)
        self.samples_per_trial = cfg.samples_per_trial()
        self.nash_m = _exp1_nash_action(cfg.game) if cfg.experiment == 1 else None
        self.strategy = build_policy_strategy(cfg) if cfg.experiment != 1 else None
        self.records: list[TrialRecord] = []
        self.trace: list[TraceRow] = []
        self.survey: Optional[dict] = None
        self.log: list[dict] = [{"e": "create", "id": session_id,
                                 "cfg": cfg.describe()}]
        self.tick_index = 0
        self.trial_ptr = 0
        self.current: Optional[_LiveTrial] = None
        self.rest_ticks_left = 0
        self.retried_iterations: set[int] = set()
        self.ended_with_error: Optional[str] = None
        self._latest_x: Optional[float] = None
        self._held_x = 0.0
        self._notified_ignored = False

    # -- client events ------------------------------------------------------

    def handle(self, event: dict) -> list[dict]:
        """Process one decoded client event; returns server events."""
        kind = event["type"]
        if kind == "hello":
            return [wire.welcome(self.cfg.experiment, len(self.plan),
                                 self.status.value)]
        if kind == "begin":
            return self._on_begin()
        if kind == "input":
            return self._on_input(event)
        if kind == "survey":
            return self._on_survey(event)
        raise SessionStateError(f"unroutable event {kind!r}")

    def _on_begin(self) -> list[dict]:
        if self.status is not SessionStatus.INTRO:
            return [wire.notice("experiment already started")]
        self.log.append({"e": "begin"})
        return self._start_next_trial()

    def _on_input(self, event: dict) -> list[dict]:
        if self.status is not SessionStatus.TRIAL:
            if self._notified_ignored:
                return []
            self._notified_ignored = True
            return [wire.notice("input ignored outside a trial")]
        self._notified_ignored = False
        x = wire.clamp_input(event["x"])
        self._latest_x = x
        self.log.append({"e": "input", "i": self.tick_index, "x": x,
                         "t": event.get("t")})
        return []

    def _on_survey(self, event: dict) -> list[dict]:
        if self.status is not SessionStatus.SURVEY:
            return [wire.error("bad-state", "survey not open")]
        self.survey = {"scores": list(event["scores"]),
                       "feedback": event.get("feedback", "")}
        self.log.append({"e": "survey", **self.survey})
        self.status = SessionStatus.DONE
        self.log.append({"e": "end", "error": self.ended_with_error})
        return [wire.experiment_end()]

    # -- the clock ----------------------------------------------------------

    def tick(self) -> list[dict]:
        """One 60 Hz server tick; consumes the held cursor sample."""
        self.tick_index += 1
        if self.status is SessionStatus.REST:
            self.rest_ticks_left -= 1
            self.log.append({"e": "tick", "i": self.tick_index, "x": None})
            if self.rest_ticks_left <= 0:
                return self._start_next_trial()
            return []
        if self.status is not SessionStatus.TRIAL or self.current is None:
            return []
        if self._latest_x is not None:
            self._held_x = self._latest_x
            self._latest_x = None
        x = self._held_x
        self.log.append({"e": "tick", "i": self.tick_index, "x": x})
        trial = self.current
        if trial.phase is _TrialPhase.ATTENTION:
            target = trial.setup.init.h
            if abs(x - target) <= ATTENTION_TOLERANCE:
                trial.dwell += 1
            else:
                trial.dwell = 0
            if trial.dwell >= ATTENTION_DWELL_TICKS:
                return self._gate_passed(trial, x)
            return []
        return self._sample(trial, x)

    # -- internals ----------------------------------------------------------

    def _start_next_trial(self) -> list[dict]:
        if self.trial_ptr >= len(self.plan):
            self.status = SessionStatus.SURVEY
            self.log.append({"e": "surveyPrompt"})
            return [wire.survey_prompt()]
        setup = self.plan[self.trial_ptr]
        self.current = _LiveTrial(setup=setup, index=self.trial_ptr)
        self.status = SessionStatus.TRIAL
        self.log.append({"e": "trialStart", "index": self.trial_ptr,
                         "target": setup.init.h})
        return [wire.trial_start(self.trial_ptr, setup.init.h)]

    def _machine_for(self, trial: _LiveTrial) -> None:
        cfg = self.cfg
        if cfg.experiment == 1:
            alpha = trial.setup.condition["alpha"]
            trial.machine = GradientPlay(cfg.game, alpha, trial.setup.init.m,
                                         self.nash_m if self.nash_m is not None else 0.0)
        else:
            phase = trial.setup.condition["phase"]
            trial.policy = (self.strategy.nominal_policy() if phase == NOMINAL
                            else self.strategy.perturbed_policy())

    def _gate_passed(self, trial: _LiveTrial, x: float) -> list[dict]:
        trial.phase = _TrialPhase.RUNNING
        self._machine_for(trial)
        return self._sample(trial, x)

    def _sample(self, trial: _LiveTrial, x: float) -> list[dict]:
        cfg = self.cfg
        h = trial.setup.sign * x
        if cfg.experiment == 1:
            m = trial.machine.step(h)
        else:
            from ..harness import machine_clip

            m = machine_clip(cfg.game, trial.policy(h))
        c_h = cfg.game.cost(Player.HUMAN, h, m)
        c_m = cfg.game.cost(Player.MACHINE, h, m)
        trial.h.append(h)
        trial.m.append(m)
        trial.c_h.append(c_h)
        trial.c_m.append(c_m)
        i = len(trial.h) - 1
        events = [wire.frame(display_value(c_h), i)]
        if i >= self.samples_per_trial:
            events.extend(self._finish_trial(trial))
        return events

    def _finish_trial(self, trial: _LiveTrial) -> list[dict]:
        cfg = self.cfg
        record = TrialRecord(
            index=trial.index, condition=dict(trial.setup.condition),
            sign=trial.setup.sign,
            init=JointAction(trial.h[0], trial.m[0]),
            h=tuple(trial.h), m=tuple(trial.m),
            c_h=tuple(trial.c_h), c_m=tuple(trial.c_m),
            tail_window=cfg.protocol.tail_window,
        )
        self.records.append(record)
        self.current = None
        self.log.append({"e": "trialEnd", "index": trial.index})
        events = [wire.trial_end(trial.index)]
        self.trial_ptr += 1

        if cfg.experiment != 1 and trial.setup.condition["phase"] == \
                _phases(cfg.protocol.ordering)[1]:
            k = trial.setup.condition["k"]
            try:
                row = apply_pair_update(cfg, self.strategy, self.records, k,
                                        steady="median")
                self.trace.append(row)
                self.log.append({"e": "update", "k": row.k,
                                 "estimate": row.phaseless_estimate,
                                 "slope": row.slope, "intercept": row.intercept})
            except (ConjectureUndefinedError, SingularIterationError) as exc:
                events.extend(self._handle_update_failure(k, str(exc)))
                return events

        done = self.trial_ptr >= len(self.plan)
        rest_due = (cfg.protocol.rest_every_n_trials > 0
                    and self.trial_ptr % cfg.protocol.rest_every_n_trials == 0)
        if done:
            events.extend(self._start_next_trial())  # moves to survey
        elif rest_due:
            self.status = SessionStatus.REST
            self.rest_ticks_left = round(cfg.protocol.rest_seconds
                                         * cfg.protocol.sample_rate_hz)
            self.log.append({"e": "restStart", "seconds": cfg.protocol.rest_seconds})
            events.append(wire.rest_start(cfg.protocol.rest_seconds))
        else:
            events.extend(self._start_next_trial())
        return events

    def _handle_update_failure(self, k: int, message: str) -> list[dict]:
        """Rerun the failed pair once; a second failure ends the session."""
        if k not in self.retried_iterations:
            self.retried_iterations.add(k)
            pair = [s for s in self.plan if s.condition.get("k") == k]
            # drop the failed pair's records and replay the same setups
            self.records = [r for r in self.records if r.condition.get("k") != k]
            self.plan[self.trial_ptr:self.trial_ptr] = pair
            self.log.append({"e": "retry", "k": k})
            events = [wire.notice(f"conjecture undefined at iteration {k}; "
                                  "repeating the trial pair")]
            events.extend(self._start_next_trial())
            return events
        self.ended_with_error = f"iteration {k}: {message}"
        self.log.append({"e": "abort", "k": k, "message": message})
        self.status = SessionStatus.SURVEY
        self.log.append({"e": "surveyPrompt"})
        return [wire.error("strategy-update", self.ended_with_error),
                wire.survey_prompt()]

    # -- status -------------------------------------------------------------

    def describe(self) -> dict:
        return {
            "id": self.id,
            "status": self.status.value,
            "experiment": self.cfg.experiment,
            "trials_total": len(self.plan),
            "trials_done": len(self.records),
            "error": self.ended_with_error,
        }
