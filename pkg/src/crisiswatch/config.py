"""Service configuration: defaults, JSON loading, startup validation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Configuration value out of range or resource file missing."""


@dataclass
class FsdParams:
    window: int = 2000
    tables: int = 8
    bits: int = 12
    seed: int = 42
    default_threshold: float = 0.8


@dataclass
class ThreadParams:
    half_life_ms: int = 6 * 3600 * 1000
    backend: str = "compacted"  # or "kcopies"


@dataclass
class SearchParams:
    k1: float = 1.2
    b: float = 0.75
    credibility_weighting: bool = False


@dataclass
class TimelineParams:
    bucket_ms: int = 3_600_000
    min_posts: int = 3
    novelty_gate: float = 0.7


@dataclass
class SentimentParams:
    window: int = 5
    negation_lookback: int = 2


@dataclass
class CredibilityWeights:
    w0: float = 0.0
    url: float = 1.0
    followers: float = 1.5
    reposts: float = 1.0
    length: float = 0.5
    caps: float = -1.0
    exclaim: float = -1.0


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8040
    # Resource files; None falls back to the data files shipped in-package.
    gazetteer_path: str | None = None
    sentiment_lexicon_path: str | None = None
    stopwords_path: str | None = None
    fsd: FsdParams = field(default_factory=FsdParams)
    threads: ThreadParams = field(default_factory=ThreadParams)
    search: SearchParams = field(default_factory=SearchParams)
    timeline: TimelineParams = field(default_factory=TimelineParams)
    sentiment: SentimentParams = field(default_factory=SentimentParams)
    credibility: CredibilityWeights = field(default_factory=CredibilityWeights)
    snapshot_dir: str = "snapshots"
    snapshot_interval_s: int = 0  # 0 disables periodic snapshots
    push_buffer: int = 1000

    def validate(self) -> None:
        checks = [
            (self.port >= 1, "port must be >= 1"),
            (self.fsd.window >= 1, "fsd.window must be >= 1"),
            (self.fsd.tables >= 1, "fsd.tables must be >= 1"),
            (1 <= self.fsd.bits <= 64, "fsd.bits must be in [1, 64]"),
            (0.0 <= self.fsd.default_threshold <= 1.0, "fsd.default_threshold must be in [0, 1]"),
            (self.threads.half_life_ms > 0, "threads.half_life_ms must be > 0"),
            (self.threads.backend in ("compacted", "kcopies"),
             "threads.backend must be 'compacted' or 'kcopies'"),
            (self.search.k1 > 0, "search.k1 must be > 0"),
            (0.0 <= self.search.b <= 1.0, "search.b must be in [0, 1]"),
            (self.timeline.bucket_ms > 0, "timeline.bucket_ms must be > 0"),
            (self.timeline.min_posts >= 1, "timeline.min_posts must be >= 1"),
            (0.0 <= self.timeline.novelty_gate <= 1.0, "timeline.novelty_gate must be in [0, 1]"),
            (self.sentiment.window >= 0, "sentiment.window must be >= 0"),
            (self.sentiment.negation_lookback >= 0, "sentiment.negation_lookback must be >= 0"),
            (self.snapshot_interval_s >= 0, "snapshot_interval_s must be >= 0"),
            (self.push_buffer >= 1, "push_buffer must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        for label, path in (
            ("gazetteer_path", self.gazetteer_path),
            ("sentiment_lexicon_path", self.sentiment_lexicon_path),
            ("stopwords_path", self.stopwords_path),
        ):
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{label}: file not found: {path}")


def _apply(obj, values: dict, prefix: str) -> None:
    fields = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in values.items():
        if key not in fields:
            raise ConfigError(f"unknown config key: {prefix}{key}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current) and not isinstance(current, type):
            if not isinstance(value, dict):
                raise ConfigError(f"{prefix}{key} must be an object")
            _apply(current, value, f"{prefix}{key}.")
        else:
            setattr(obj, key, value)


def load_config(path: str | Path) -> ServiceConfig:
    """Read a JSON config file over the defaults and validate it."""
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    config = ServiceConfig()
    _apply(config, raw, "")
    config.validate()
    return config
