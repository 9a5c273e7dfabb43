"""Command line front door: serve the API, replay scripts, report stats."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .errors import CharshapeError, ExpectationMismatch
from .replay import compare_to_golden, replay_file, stats_for_dir


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        config = load_config(args.config)
        if args.host:
            config.host = args.host
        if args.port:
            config.port = args.port
        if args.static_dir:
            config.static_dir = args.static_dir
        app = create_app(config)
    except (CharshapeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def _cmd_replay(args) -> int:
    try:
        produced = replay_file(args.script, seed=args.seed)
    except CharshapeError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(produced, encoding="utf-8")
    else:
        sys.stdout.write(produced)
    if args.expect:
        try:
            compare_to_golden(produced, args.expect)
        except ExpectationMismatch as exc:
            print(exc.message, file=sys.stderr)
            return 2
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"replay matches {args.expect}", file=sys.stderr)
    return 0


def _cmd_stats(args) -> int:
    try:
        stats = stats_for_dir(args.directory)
    except CharshapeError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 1
    if args.json:
        payload = {
            "sessions": [
                {"session": name, "lines": count} for name, count in stats.counts.items()
            ],
            "mean": stats.mean,
            "stdev": stats.stdev,
        }
        print(json.dumps(payload, indent=2))
    else:
        for name, count in stats.counts.items():
            print(f"{name}: {count} lines")
        print(f"sessions: {len(stats.counts)}")
        print(f"mean lines: {stats.mean:g}")
        print(f"stdev lines: {stats.stdev:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="charshape",
        description="Shape a fictional character by talking to it.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    serve = commands.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--config", help="path to a JSON config file")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--static-dir", help="directory with the built web client")
    serve.set_defaults(run=_cmd_serve)

    replay = commands.add_parser("replay", help="replay a script deterministically")
    replay.add_argument("script", help="script file: U/C/D/P lines")
    replay.add_argument("--seed", type=int, required=True, help="64-bit session seed")
    replay.add_argument("--expect", help="golden transcript to compare against")
    replay.add_argument("--out", help="write the replay document here instead of stdout")
    replay.set_defaults(run=_cmd_replay)

    stats = commands.add_parser("stats", help="dialogue length stats over stored sessions")
    stats.add_argument("directory", help="session store or replay output directory")
    stats.add_argument("--json", action="store_true", help="emit JSON instead of text")
    stats.set_defaults(run=_cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
