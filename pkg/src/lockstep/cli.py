"""Command-line entry points: the relay server and the simulation harness."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Optional

from .errors import InvalidArgumentError, LockstepError
from .events import Message
from .games import RULES_IDS, build_rules
from .harness import (
    check_all_interleavings,
    event_from_plain,
    run_scenario,
    scenario_from_json,
)
from .protocol import MAX_FRAME_BYTES
from .relay import RelayServer


def _parse_listen(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise argparse.ArgumentTypeError(f"expected host:port, got {text!r}")
    try:
        return (host, int(port))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad port in {text!r}")


def relay_main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="relay",
        description="Run the relay server that pairs clients and forwards their frames.",
    )
    parser.add_argument(
        "--listen",
        type=_parse_listen,
        default=("127.0.0.1", 0),
        metavar="HOST:PORT",
        help="address to bind; port 0 picks a free port (default 127.0.0.1:0)",
    )
    parser.add_argument(
        "--max-rooms", type=int, default=1024, help="most rooms open at once"
    )
    parser.add_argument(
        "--frame-cap",
        type=int,
        default=MAX_FRAME_BYTES,
        metavar="BYTES",
        help="largest accepted frame payload",
    )
    parser.add_argument(
        "--log-level",
        default="info",
        choices=["debug", "info", "warning", "error"],
        help="logging verbosity",
    )
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    host, port = args.listen
    try:
        server = RelayServer(
            host=host, port=port, max_rooms=args.max_rooms, frame_cap=args.frame_cap
        )
        server.start()
    except (OSError, InvalidArgumentError) as exc:
        print(f"cannot start relay: {exc}", file=sys.stderr)
        return 1
    bound_host, bound_port = server.address
    # parseable by whatever spawned us, so port 0 is usable in scripts
    print(f"listening on {bound_host}:{bound_port}", flush=True)
    server.serve_forever()
    return 0


def sim_main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lockstep-sim",
        description="Deterministic multi-client simulations without sockets or clocks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file and print its report")
    run.add_argument("scenario", help="path to a scenario JSON file (docs/scenarios.md)")

    inter = sub.add_parser(
        "interleave",
        help="check every arrival order of a case file for end-state agreement",
    )
    inter.add_argument("case", help="path to an interleaving case JSON file")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args.scenario)
        return _cmd_interleave(args.case)
    except LockstepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_run(path: str) -> int:
    with open(path, "r", encoding="utf-8") as f:
        scenario = scenario_from_json(f.read())
    report = run_scenario(scenario)
    sys.stdout.write(report.to_text())
    return 0 if report.converged else 2


def _cmd_interleave(path: str) -> int:
    with open(path, "r", encoding="utf-8") as f:
        try:
            obj = json.load(f)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"case file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "rules" not in obj or "players" not in obj:
        raise InvalidArgumentError("case file needs rules and players")
    if obj["rules"] not in RULES_IDS:
        raise InvalidArgumentError(f"unknown rules {obj['rules']!r}; pick one of {sorted(RULES_IDS)}")
    rules = build_rules(obj["rules"])
    per_player = []
    for p, entries in enumerate(obj["players"]):
        msgs = []
        for entry in entries:
            if not isinstance(entry, dict) or "at" not in entry:
                raise InvalidArgumentError(f"case entry needs an 'at' time: {entry!r}")
            rest = {k: v for k, v in entry.items() if k != "at"}
            msgs.append(Message(float(entry["at"]), p, event_from_plain(rest)))
        per_player.append(msgs)
    result = check_all_interleavings(
        per_player,
        rules,
        seed=obj.get("seed", 0),
        cap=obj.get("cap", 100_000),
    )
    print(f"interleavings: {result.interleavings}")
    if result.ok:
        print("all agree")
        return 0
    print(f"DISAGREE at arrival order {list(result.counterexample)}")
    return 2


def main(argv: Optional[list[str]] = None) -> int:
    """Dispatcher behind python -m lockstep."""
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] == "relay":
        return relay_main(argv[1:])
    if argv and argv[0] == "sim":
        return sim_main(argv[1:])
    print("usage: python -m lockstep {relay|sim} ...", file=sys.stderr)
    return 2
