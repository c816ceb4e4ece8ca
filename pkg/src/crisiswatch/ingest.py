"""Platform-independent post ingestion.

Wire format is JSONL: one post per line with fields `id`, `author`, `ts`
(integer milliseconds), `text`, and optional `reply_to`, `repost_of`,
`lat`/`lon`, `followers`, `reposts`, `platform`, `urls`. Linkage fields carry
the reply/repost annotations that the thread index consumes downstream.
"""

from __future__ import annotations

import json
import time
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

from crisiswatch.text import tokenize


class MalformedRecord(ValueError):
    """Record is not a valid wire-format post."""


class MissingField(MalformedRecord):
    """A required field (id, author, ts) is absent or empty."""

    def __init__(self, name: str):
        super().__init__(f"missing required field: {name}")
        self.field = name


class SelfReference(MalformedRecord):
    """reply_to or repost_of points at the post itself."""


@dataclass(frozen=True, slots=True)
class Post:
    """One social post, normalized to the platform-independent schema."""

    post_id: str
    author_id: str
    timestamp: int  # UTC milliseconds since epoch, > 0
    text: str = ""
    reply_to: str | None = None
    repost_of: str | None = None
    geo: tuple[float, float] | None = None  # (lat, lon)
    follower_count: int | None = None
    repost_count: int | None = None
    platform: str = ""
    urls: tuple[str, ...] = ()

    @property
    def link_target(self) -> str | None:
        """Linkage used by thread/graph sensors; replies win over reposts."""
        return self.reply_to if self.reply_to is not None else self.repost_of


@dataclass(frozen=True)
class TrackingProfile:
    """Strategic-layer keyword policy with a novelty threshold."""

    profile_id: str
    name: str = ""
    event_type: str = ""
    keywords: tuple[str, ...] = ()
    novelty_threshold: float = 0.8

    def __post_init__(self):
        if not self.profile_id:
            raise ValueError("profile_id must be nonempty")
        if not 0.0 <= self.novelty_threshold <= 1.0:
            raise ValueError("novelty_threshold must be in [0, 1]")
        object.__setattr__(self, "keywords", tuple(k.lower() for k in self.keywords))


def _require_str(record: dict, key: str) -> str:
    value = record.get(key)
    if value is None or value == "":
        raise MissingField(key)
    if not isinstance(value, str):
        raise MalformedRecord(f"field {key} must be a string")
    return value


def _optional_id(record: dict, key: str) -> str | None:
    value = record.get(key)
    if value is None or value == "":
        return None
    if not isinstance(value, str):
        raise MalformedRecord(f"field {key} must be a string")
    return value


def _optional_count(record: dict, key: str) -> int | None:
    value = record.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise MalformedRecord(f"field {key} must be a non-negative integer")
    return value


def parse_post(raw_record: str) -> Post:
    """Parse one wire-format line into a Post.

    Raises MissingField, SelfReference, or MalformedRecord on bad input.
    """
    try:
        record = json.loads(raw_record)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise MalformedRecord("record must be a JSON object")

    post_id = _require_str(record, "id")
    author = _require_str(record, "author")

    ts = record.get("ts")
    if ts is None:
        raise MissingField("ts")
    if isinstance(ts, bool) or not isinstance(ts, int):
        raise MalformedRecord("field ts must be an integer (milliseconds)")
    if ts <= 0:
        raise MalformedRecord("field ts must be > 0")

    text = record.get("text", "")
    if not isinstance(text, str):
        raise MalformedRecord("field text must be a string")
    text = unicodedata.normalize("NFC", text)

    reply_to = _optional_id(record, "reply_to")
    repost_of = _optional_id(record, "repost_of")
    if reply_to == post_id or repost_of == post_id:
        raise SelfReference(f"post {post_id} links to itself")

    lat, lon = record.get("lat"), record.get("lon")
    geo = None
    if lat is not None or lon is not None:
        if lat is None or lon is None:
            raise MalformedRecord("lat and lon must be given together")
        try:
            lat, lon = float(lat), float(lon)
        except (TypeError, ValueError) as exc:
            raise MalformedRecord("lat/lon must be numbers") from exc
        if not (-90.0 <= lat <= 90.0) or not (-180.0 <= lon <= 180.0):
            raise MalformedRecord("lat/lon out of range")
        geo = (lat, lon)

    platform = record.get("platform", "")
    if not isinstance(platform, str):
        raise MalformedRecord("field platform must be a string")

    urls = record.get("urls", [])
    if not isinstance(urls, list) or not all(isinstance(u, str) for u in urls):
        raise MalformedRecord("field urls must be a list of strings")

    return Post(
        post_id=post_id,
        author_id=author,
        timestamp=ts,
        text=text,
        reply_to=reply_to,
        repost_of=repost_of,
        geo=geo,
        follower_count=_optional_count(record, "followers"),
        repost_count=_optional_count(record, "reposts"),
        platform=platform,
        urls=tuple(urls),
    )


def wire_dict(post: Post) -> dict:
    """Wire-format field mapping for a Post (optional fields omitted)."""
    record: dict = {
        "id": post.post_id,
        "author": post.author_id,
        "ts": post.timestamp,
        "text": post.text,
    }
    if post.reply_to is not None:
        record["reply_to"] = post.reply_to
    if post.repost_of is not None:
        record["repost_of"] = post.repost_of
    if post.geo is not None:
        record["lat"], record["lon"] = post.geo
    if post.follower_count is not None:
        record["followers"] = post.follower_count
    if post.repost_count is not None:
        record["reposts"] = post.repost_count
    record["platform"] = post.platform
    if post.urls:
        record["urls"] = list(post.urls)
    return record


def serialize_post(post: Post) -> str:
    """Wire-format line for a Post; parse_post(serialize_post(p)) == p."""
    return json.dumps(wire_dict(post), ensure_ascii=False)


class PostAcceptor:
    """Arrival-order dedup gate; the sole admission point for the stream."""

    def __init__(self):
        self._seen: set[str] = set()
        self.accepted_count = 0
        self.duplicate_count = 0

    def accept(self, post: Post) -> bool:
        """True on first occurrence of the post id; False marks a duplicate."""
        if post.post_id in self._seen:
            self.duplicate_count += 1
            return False
        self._seen.add(post.post_id)
        self.accepted_count += 1
        return True

    def seen(self, post_id: str) -> bool:
        return post_id in self._seen


def matches_keywords(text: str, keywords: tuple[str, ...] | list[str]) -> bool:
    """True iff any keyword occurs as a whole token of the text.

    Matching is case- and punctuation-insensitive via the shared tokenizer.
    An empty keyword list matches nothing.
    """
    if not keywords:
        return False
    tokens = set(tokenize(text))
    return any(k in tokens for k in keywords)


def matches_profile(post: Post, profile: TrackingProfile) -> bool:
    return matches_keywords(post.text, profile.keywords)


@dataclass
class ReplayStats:
    emitted: int = 0
    out_of_order: int = 0
    malformed: int = 0


def replay(
    path: str | Path,
    speed: float | str = "max",
    stats: ReplayStats | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Iterator[Post]:
    """Stream posts from a wire-format file, pacing by timestamp deltas.

    Gaps between posts are the timestamp deltas divided by `speed`;
    speed "max" emits as fast as possible. Records whose timestamp goes
    backwards are skipped and counted, as are malformed lines.
    """
    if stats is None:
        stats = ReplayStats()
    paced = speed != "max"
    if paced and (not isinstance(speed, (int, float)) or speed <= 0):
        raise ValueError("speed must be a positive number or 'max'")

    last_ts: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                post = parse_post(line)
            except MalformedRecord:
                stats.malformed += 1
                continue
            if last_ts is not None and post.timestamp < last_ts:
                stats.out_of_order += 1
                continue
            if paced and last_ts is not None and post.timestamp > last_ts:
                sleep((post.timestamp - last_ts) / 1000.0 / float(speed))
            last_ts = post.timestamp
            stats.emitted += 1
            yield post
