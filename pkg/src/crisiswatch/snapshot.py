"""Snapshot files: atomically written state directories.

A snapshot holds the manifest (profiles, event configs, counters), the
global accepted-post log, and one accepted-post log per event, all in the
ingest wire format. Derived indexes are never serialized; restore rebuilds
them by replaying the logs.
"""

from __future__ import annotations

import json
import os
import re
import shutil
from pathlib import Path

MANIFEST_NAME = "manifest.json"
STREAM_LOG_NAME = "stream.jsonl"
EVENTS_DIR_NAME = "events"

_SNAP_RE = re.compile(r"^snap-(\d{8})$")


class CorruptSnapshot(RuntimeError):
    """Snapshot directory failed validation; carries the offending file."""

    def __init__(self, path: str | Path, reason: str):
        super().__init__(f"corrupt snapshot file {path}: {reason}")
        self.path = str(path)
        self.reason = reason


def next_sequence(directory: str | Path) -> int:
    directory = Path(directory)
    if not directory.is_dir():
        return 1
    highest = 0
    for child in directory.iterdir():
        match = _SNAP_RE.match(child.name)
        if match:
            highest = max(highest, int(match.group(1)))
    return highest + 1


def find_latest(directory: str | Path) -> Path | None:
    directory = Path(directory)
    if not directory.is_dir():
        return None
    candidates = [c for c in directory.iterdir() if _SNAP_RE.match(c.name)]
    return max(candidates, key=lambda c: c.name) if candidates else None


def write_snapshot(
    directory: str | Path,
    manifest: dict,
    stream_lines: list[str],
    event_logs: dict[str, list[str]],
) -> Path:
    """Write one snapshot atomically; returns the final directory path.

    The content of a snapshot is a pure function of service state, so two
    snapshots with no traffic in between are file-for-file identical.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = f"snap-{next_sequence(directory):08d}"
    tmp = directory / f".tmp-{name}"
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir()
    try:
        (tmp / MANIFEST_NAME).write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", "utf-8"
        )
        (tmp / STREAM_LOG_NAME).write_text(
            "".join(line + "\n" for line in stream_lines), "utf-8"
        )
        events_dir = tmp / EVENTS_DIR_NAME
        events_dir.mkdir()
        for event_id, lines in event_logs.items():
            (events_dir / f"{event_id}.jsonl").write_text(
                "".join(line + "\n" for line in lines), "utf-8"
            )
        final = directory / name
        os.replace(tmp, final)
        return final
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def load_snapshot(path: str | Path) -> tuple[dict, list[str], dict[str, list[str]]]:
    """Read and validate a snapshot directory.

    Returns (manifest, stream log lines, per-event log lines). Raises
    CorruptSnapshot naming the first offending file.
    """
    path = Path(path)
    manifest_path = path / MANIFEST_NAME
    if not manifest_path.is_file():
        raise CorruptSnapshot(manifest_path, "missing manifest")
    try:
        manifest = json.loads(manifest_path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptSnapshot(manifest_path, str(exc)) from exc
    if not isinstance(manifest, dict) or manifest.get("version") != 1:
        raise CorruptSnapshot(manifest_path, "unsupported manifest version")

    stream_path = path / STREAM_LOG_NAME
    if not stream_path.is_file():
        raise CorruptSnapshot(stream_path, "missing stream log")
    stream_lines = [line for line in stream_path.read_text("utf-8").splitlines() if line]
    expected = manifest.get("accepted_count")
    if isinstance(expected, int) and expected != len(stream_lines):
        raise CorruptSnapshot(
            stream_path, f"expected {expected} records, found {len(stream_lines)}"
        )

    event_logs: dict[str, list[str]] = {}
    for event in manifest.get("events", []):
        event_id = event.get("event_id")
        log_path = path / EVENTS_DIR_NAME / f"{event_id}.jsonl"
        if not log_path.is_file():
            raise CorruptSnapshot(log_path, "missing event log")
        event_logs[event_id] = [
            line for line in log_path.read_text("utf-8").splitlines() if line
        ]
    return manifest, stream_lines, event_logs
