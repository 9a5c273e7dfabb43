#!/usr/bin/env python3
"""Regenerate the golden replay documents in goldens/.

Run after an intentional behavior change, then review the diff by hand
before committing. Seeds are pinned here and in goldens/README.md.
"""
from __future__ import annotations

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from charshape.replay import dump_document, parse_script, run_replay  # noqa: E402

GOLDENS = {
    "suggestion_accept": 39,
    "candidate_choice": 15,
    "shaping_tour": 2,
}


def main() -> int:
    root = pathlib.Path(__file__).resolve().parents[1] / "goldens"
    for name, seed in GOLDENS.items():
        script = root / f"{name}.script"
        golden = root / f"{name}.golden.json"
        actions = parse_script(script.read_text(encoding="utf-8"))
        document = run_replay(actions, seed=seed)
        golden.write_text(dump_document(document), encoding="utf-8")
        print(f"wrote {golden} (seed {seed})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
