#!/usr/bin/env python3
"""Survey transcript lengths over a batch of simulated shaping sessions.

Runs N random-behavior sessions against the offline engine, saves each
one as a session document, and prints the length distribution. Useful
for eyeballing how chatty the engine is after a prompt or chip change.

    python scripts/dialogue_length_survey.py --sessions 20 --steps 30 \
        --out /tmp/survey
"""
from __future__ import annotations

import argparse
import pathlib
import random
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from charshape.replay import offline_engine, run_replay, stats_for_dir  # noqa: E402
from charshape.simulate import random_actions  # noqa: E402
from charshape.storage import dump_document  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sessions", type=int, default=20)
    parser.add_argument("--steps", type=int, default=30)
    parser.add_argument("--base-seed", type=int, default=0)
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path("survey_out"))
    args = parser.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    engine = offline_engine()
    for i in range(args.sessions):
        seed = args.base_seed + i
        actions = random_actions(random.Random(seed), args.steps, engine.registry)
        document = run_replay(actions, seed=seed, engine=engine)
        path = args.out / f"survey-{seed:04d}.json"
        path.write_text(dump_document(document["final_session"]), encoding="utf-8")

    stats = stats_for_dir(args.out)
    print(f"sessions: {len(stats.counts)}")
    print(f"mean transcript length: {stats.mean:.2f}")
    print(f"stdev: {stats.stdev:.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
