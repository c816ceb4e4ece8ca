"""Command line entry points: serve, replay, snapshot."""

from __future__ import annotations

import argparse
import sys

import httpx

from crisiswatch.config import ConfigError, ServiceConfig, load_config
from crisiswatch.ingest import ReplayStats, replay, serialize_post
from crisiswatch.snapshot import CorruptSnapshot

BATCH_SIZE = 500


def _cmd_serve(args) -> int:
    import uvicorn

    from crisiswatch.api import create_app
    from crisiswatch.service import MonitorService

    try:
        config = load_config(args.config) if args.config else ServiceConfig()
        service = MonitorService.boot(config)
    except (ConfigError, CorruptSnapshot) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    service.start_snapshot_timer()
    app = create_app(service)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except OSError as exc:
        print(f"error: cannot bind {config.host}:{config.port}: {exc}", file=sys.stderr)
        return 2
    finally:
        service.stop_snapshot_timer()
    return 0


def _post_lines(client: httpx.Client, endpoint: str, lines: list[str], totals: dict) -> None:
    if not lines:
        return
    response = client.post(f"{endpoint}/api/posts", content="\n".join(lines).encode("utf-8"))
    response.raise_for_status()
    for key, value in response.json().items():
        totals[key] = totals.get(key, 0) + value


def _cmd_replay(args) -> int:
    speed: float | str = "max"
    if args.speed != "max":
        try:
            speed = float(args.speed)
        except ValueError:
            print(f"error: --speed must be a number or 'max', got {args.speed!r}", file=sys.stderr)
            return 2
        if speed <= 0:
            print("error: --speed must be positive", file=sys.stderr)
            return 2

    stats = ReplayStats()
    totals: dict = {}
    batch: list[str] = []
    try:
        with httpx.Client(timeout=30.0) as client:
            for post in replay(args.file, speed, stats=stats):
                batch.append(serialize_post(post))
                # At max speed, batch; when pacing, flush per post so gaps hold.
                if speed != "max" or len(batch) >= BATCH_SIZE:
                    _post_lines(client, args.endpoint, batch, totals)
                    batch = []
            _post_lines(client, args.endpoint, batch, totals)
    except FileNotFoundError:
        print(f"error: no such file: {args.file}", file=sys.stderr)
        return 2
    except httpx.HTTPError as exc:
        print(f"error: push failed: {exc}", file=sys.stderr)
        return 1
    print(
        f"replayed {stats.emitted} posts "
        f"(skipped {stats.out_of_order} out-of-order, {stats.malformed} malformed); "
        f"server counted {totals}"
    )
    return 0


def _cmd_snapshot(args) -> int:
    payload = {"dir": args.dir} if args.dir else None
    try:
        response = httpx.post(f"{args.endpoint}/api/snapshot", json=payload, timeout=60.0)
        response.raise_for_status()
    except httpx.HTTPError as exc:
        print(f"error: snapshot request failed: {exc}", file=sys.stderr)
        return 1
    print(response.json()["path"])
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="crisiswatch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the monitoring service")
    serve.add_argument("--config", help="path to a JSON config file")
    serve.set_defaults(func=_cmd_serve)

    rep = sub.add_parser("replay", help="push a wire-format file into a running service")
    rep.add_argument("--file", required=True, help="JSONL corpus sorted by timestamp")
    rep.add_argument("--speed", default="max", help="pace multiplier, or 'max'")
    rep.add_argument("--endpoint", required=True, help="service base URL")
    rep.set_defaults(func=_cmd_replay)

    snap = sub.add_parser("snapshot", help="ask a running service to write a snapshot")
    snap.add_argument("--dir", help="target directory (defaults to the service's own)")
    snap.add_argument("--endpoint", default="http://127.0.0.1:8040", help="service base URL")
    snap.set_defaults(func=_cmd_snapshot)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
