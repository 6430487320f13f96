#!/usr/bin/env python3
"""Generate the browser client's loopback test fixture.

Runs a full simulated conjectural-variation experiment and freezes its
cursor trajectories, per-sample display values, and the machine's slope
trace.  The TypeScript loopback server replays the cursor script through
the wire protocol and must reproduce the same trace, which ties the client
test double to this engine bit for bit.
"""

import json
from pathlib import Path

from coadapt.games import display_value
from coadapt.harness import (
    ExperimentConfig,
    HumanCfg,
    MachineCfg,
    ProtocolCfg,
    run_experiment,
)

OUT = Path(__file__).resolve().parents[1] / "frontend" / "test" / "fixtures" / "exp2-session.json"


def main() -> None:
    cfg = ExperimentConfig(
        experiment=2, seed=606,
        human=HumanCfg("best_responder"),
        machine=MachineCfg(iterations=10, delta=0.1),
        protocol=ProtocolCfg(trial_seconds=1.0, rest_seconds=0.5),
    )
    result = run_experiment(cfg)
    trials = []
    for rec in result.records:
        trials.append({
            "condition": rec.condition,
            "sign": rec.sign,
            "target": rec.h[0],
            "inputs": list(rec.h),
            "displays": [display_value(c) for c in rec.c_h],
        })
    fixture = {
        "seed": cfg.seed,
        "iterations": cfg.machine.iterations,
        "samplesPerTrial": cfg.samples_per_trial(),
        "delta": cfg.machine.delta,
        "restEvery": cfg.protocol.rest_every_n_trials,
        "trials": trials,
        "expectedSlopes": [row.slope for row in result.trace],
        "expectedConjectures": [row.phaseless_estimate for row in result.trace],
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixture, separators=(",", ":"), sort_keys=True) + "\n")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
