"""The monitoring service core: ingestion pipeline, profiles, push fan-out.

One logical writer owns all mutable state: every accepted post flows through
detection and event routing under the service lock, in arrival order. Push
subscribers hang off bounded queues so a stalled consumer is disconnected
instead of ever blocking the pipeline.
"""

from __future__ import annotations

import json
import logging
import queue
import threading
import time
from importlib import resources as importlib_resources
from pathlib import Path

from crisiswatch.config import ServiceConfig
from crisiswatch.detection import FirstStoryDetector, PingAlert
from crisiswatch.enrichment import (
    CredibilityModel,
    load_gazetteer,
    load_sentiment_lexicon,
    parse_gazetteer,
    parse_sentiment_lexicon,
)
from crisiswatch.events import EventRegistry, EventState, Resources
from crisiswatch.ingest import (
    MalformedRecord,
    Post,
    PostAcceptor,
    TrackingProfile,
    parse_post,
    serialize_post,
    wire_dict,
)
from crisiswatch.snapshot import CorruptSnapshot, load_snapshot, write_snapshot
from crisiswatch.text import load_stopwords

log = logging.getLogger("crisiswatch")


class UnknownProfile(KeyError):
    pass


class UnknownTopic(KeyError):
    pass


class Subscription:
    """One push consumer: a bounded queue plus a dropped flag."""

    def __init__(self, buffer: int, hub: "PushHub"):
        self.queue: queue.Queue = queue.Queue(maxsize=buffer)
        self.dropped = False
        self.hub = hub

    def close(self) -> None:
        self.hub.unsubscribe(self)


class PushHub:
    """Fan-out for one topic; publishing never blocks on slow consumers."""

    def __init__(self, buffer: int = 1000):
        self.buffer = buffer
        self._lock = threading.Lock()
        self._subscribers: list[Subscription] = []
        self.published = 0

    def subscribe(self) -> Subscription:
        sub = Subscription(self.buffer, self)
        with self._lock:
            self._subscribers.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    def publish(self, message: dict) -> None:
        with self._lock:
            self.published += 1
            stalled = []
            for sub in self._subscribers:
                try:
                    sub.queue.put_nowait(message)
                except queue.Full:
                    sub.dropped = True
                    stalled.append(sub)
            for sub in stalled:
                self._subscribers.remove(sub)


def _load_resources(config: ServiceConfig) -> Resources:
    data = importlib_resources.files("crisiswatch.data")
    if config.gazetteer_path:
        gazetteer = load_gazetteer(config.gazetteer_path)
    else:
        gazetteer = parse_gazetteer(data.joinpath("gazetteer.tsv").read_text("utf-8"))
    if config.sentiment_lexicon_path:
        lexicon = load_sentiment_lexicon(config.sentiment_lexicon_path)
    else:
        lexicon = parse_sentiment_lexicon(data.joinpath("sentiment.tsv").read_text("utf-8"))
    stopwords = load_stopwords(config.stopwords_path)
    weights = config.credibility
    model = CredibilityModel(
        w0=weights.w0,
        w_url=weights.url,
        w_followers=weights.followers,
        w_reposts=weights.reposts,
        w_length=weights.length,
        w_caps=weights.caps,
        w_exclaim=weights.exclaim,
    )
    return Resources(
        stopwords=stopwords,
        gazetteer=gazetteer,
        sentiment_lexicon=lexicon,
        credibility_model=model,
        config=config,
    )


class MonitorService:
    """All service state behind one lock; see module docstring."""

    def __init__(self, config: ServiceConfig | None = None):
        self.config = config or ServiceConfig()
        self.config.validate()
        self.resources = _load_resources(self.config)
        self._lock = threading.RLock()
        self.acceptor = PostAcceptor()
        fsd = self.config.fsd
        self.detector = FirstStoryDetector(
            stopwords=self.resources.stopwords,
            window=fsd.window,
            tables=fsd.tables,
            bits=fsd.bits,
            seed=fsd.seed,
        )
        self.registry = EventRegistry(self.resources)
        self.profiles: dict[str, TrackingProfile] = {}
        self._next_profile = 1
        self.accepted_lines: list[str] = []
        self.error_count = 0
        self.ping_count = 0
        self.stream_clock = 0
        self.ping_hub = PushHub(self.config.push_buffer)
        self.event_hubs: dict[str, PushHub] = {}
        self._snapshot_timer: threading.Timer | None = None

    # -- time ---------------------------------------------------------------

    def now(self) -> int:
        """Stream time: the newest accepted timestamp, wall clock before any."""
        with self._lock:
            return self.stream_clock if self.stream_clock > 0 else int(time.time() * 1000)

    # -- ingestion pipeline ---------------------------------------------------

    def submit_line(self, line: str) -> str:
        """Ingest one wire-format line; returns accepted|duplicate|error."""
        try:
            post = parse_post(line)
        except MalformedRecord:
            with self._lock:
                self.error_count += 1
            return "error"
        return "accepted" if self.submit_post(post) else "duplicate"

    def submit_batch(self, body: str) -> dict[str, int]:
        """Ingest a body of newline-separated records, counting outcomes."""
        counts = {"accepted": 0, "duplicate": 0, "error": 0}
        for line in body.splitlines():
            line = line.strip()
            if line:
                counts[self.submit_line(line)] += 1
        return counts

    def submit_post(self, post: Post) -> bool:
        """Run one post through dedup, detection, and event routing."""
        with self._lock:
            if not self.acceptor.accept(post):
                return False
            self.accepted_lines.append(serialize_post(post))
            if post.timestamp > self.stream_clock:
                self.stream_clock = post.timestamp
            pings = self.detector.detect(post, list(self.profiles.values()))
            for ping in pings:
                self.ping_count += 1
                self.ping_hub.publish(self._ping_message(ping, post))
            delivered = self.registry.route(post)
            for event_id in delivered:
                hub = self.event_hubs.get(event_id)
                if hub is not None:
                    state = self.registry.get(event_id)
                    message = wire_dict(post)
                    message["credibility"] = state.credibility[post.post_id]
                    hub.publish(message)
            return True

    @staticmethod
    def _ping_message(ping: PingAlert, post: Post) -> dict:
        message = wire_dict(post)
        message["novelty"] = ping.novelty
        message["profile_id"] = ping.profile_id
        return message

    # -- tracking profiles ----------------------------------------------------

    def create_profile(
        self,
        keywords: list[str],
        name: str = "",
        event_type: str = "",
        novelty_threshold: float | None = None,
        profile_id: str | None = None,
    ) -> TrackingProfile:
        with self._lock:
            if profile_id is None:
                profile_id = f"prof-{self._next_profile}"
                self._next_profile += 1
            if profile_id in self.profiles:
                raise ValueError(f"profile id already in use: {profile_id}")
            threshold = (
                self.config.fsd.default_threshold
                if novelty_threshold is None
                else novelty_threshold
            )
            profile = TrackingProfile(
                profile_id=profile_id,
                name=name,
                event_type=event_type,
                keywords=tuple(keywords),
                novelty_threshold=threshold,
            )
            self.profiles[profile_id] = profile
            return profile

    def delete_profile(self, profile_id: str) -> None:
        with self._lock:
            if profile_id not in self.profiles:
                raise UnknownProfile(profile_id)
            del self.profiles[profile_id]

    def list_profiles(self) -> list[TrackingProfile]:
        with self._lock:
            return list(self.profiles.values())

    # -- events ---------------------------------------------------------------

    def create_event(self, name: str, tracking_terms: list[str]):
        with self._lock:
            config = self.registry.create_event(name, tracking_terms, created_at=self.now())
            self.event_hubs[config.event_id] = PushHub(self.config.push_buffer)
            return config

    def archive_event(self, event_id: str):
        with self._lock:
            return self.registry.archive_event(event_id)

    def get_event(self, event_id: str) -> EventState:
        with self._lock:
            return self.registry.get(event_id)

    def list_events(self) -> list[EventState]:
        with self._lock:
            return self.registry.list_events()

    def subscribe(self, topic: str) -> Subscription:
        """Subscribe to `pings` or to `events/{id}/posts`."""
        with self._lock:
            if topic == "pings":
                return self.ping_hub.subscribe()
            if topic.startswith("events/") and topic.endswith("/posts"):
                event_id = topic[len("events/") : -len("/posts")]
                hub = self.event_hubs.get(event_id)
                if hub is not None:
                    return hub.subscribe()
            raise UnknownTopic(topic)

    # -- snapshots --------------------------------------------------------------

    def _manifest(self) -> dict:
        return {
            "version": 1,
            "stream_clock": self.stream_clock,
            "accepted_count": len(self.accepted_lines),
            "error_count": self.error_count,
            "ping_count": self.ping_count,
            "next_profile_seq": self._next_profile,
            "next_event_seq": self.registry.next_id,
            "profiles": [
                {
                    "profile_id": p.profile_id,
                    "name": p.name,
                    "event_type": p.event_type,
                    "keywords": list(p.keywords),
                    "novelty_threshold": p.novelty_threshold,
                }
                for p in self.profiles.values()
            ],
            "events": [
                {
                    "event_id": state.config.event_id,
                    "name": state.config.name,
                    "tracking_terms": list(state.config.tracking_terms),
                    "created_at": state.config.created_at,
                    "status": state.config.status,
                }
                for state in self.registry.list_events()
            ],
        }

    def snapshot_to(self, directory: str | Path | None = None) -> Path:
        """Write an atomic snapshot; returns the snapshot directory."""
        with self._lock:
            target = Path(directory) if directory else Path(self.config.snapshot_dir)
            event_logs = {
                state.config.event_id: [serialize_post(state.posts[pid]) for pid in state.order]
                for state in self.registry.list_events()
            }
            return write_snapshot(target, self._manifest(), list(self.accepted_lines), event_logs)

    @classmethod
    def from_snapshot(cls, path: str | Path, config: ServiceConfig | None = None) -> "MonitorService":
        """Rebuild a service from a snapshot directory.

        Derived state (dedup set, novelty window, thread/search indexes,
        graphs) is reconstructed by replaying the logs; no pings are
        re-emitted.
        """
        manifest, stream_lines, event_logs = load_snapshot(path)
        service = cls(config)
        with service._lock:
            for entry in manifest.get("profiles", []):
                profile = TrackingProfile(
                    profile_id=entry["profile_id"],
                    name=entry.get("name", ""),
                    event_type=entry.get("event_type", ""),
                    keywords=tuple(entry.get("keywords", ())),
                    novelty_threshold=entry.get("novelty_threshold", 0.8),
                )
                service.profiles[profile.profile_id] = profile
            service._next_profile = manifest.get("next_profile_seq", len(service.profiles) + 1)

            profiles = list(service.profiles.values())
            for lineno, line in enumerate(stream_lines, 1):
                try:
                    post = parse_post(line)
                except MalformedRecord as exc:
                    raise CorruptSnapshot(Path(path) / "stream.jsonl", f"line {lineno}: {exc}")
                service.acceptor.accept(post)
                service.accepted_lines.append(line)
                if post.timestamp > service.stream_clock:
                    service.stream_clock = post.timestamp
                # Rebuild the novelty window; pings already happened.
                service.detector.detect(post, profiles)

            for entry in manifest.get("events", []):
                event_id = entry["event_id"]
                config_obj = service.registry.create_event(
                    entry["name"],
                    list(entry["tracking_terms"]),
                    created_at=entry["created_at"],
                    event_id=event_id,
                )
                service.event_hubs[event_id] = PushHub(service.config.push_buffer)
                state = service.registry.get(event_id)
                log_path = Path(path) / "events" / f"{event_id}.jsonl"
                for lineno, line in enumerate(event_logs.get(event_id, []), 1):
                    try:
                        state.deliver(parse_post(line))
                    except MalformedRecord as exc:
                        raise CorruptSnapshot(log_path, f"line {lineno}: {exc}")
                if entry.get("status") == "archived":
                    service.registry.archive_event(event_id)

            service.registry._next_id = manifest.get("next_event_seq", len(service.registry) + 1)
            service.stream_clock = max(service.stream_clock, manifest.get("stream_clock", 0))
            service.error_count = manifest.get("error_count", 0)
            service.ping_count = manifest.get("ping_count", 0)
        return service

    @classmethod
    def boot(cls, config: ServiceConfig) -> "MonitorService":
        """Fresh service, or a restore when the snapshot dir has content."""
        from crisiswatch.snapshot import find_latest

        latest = find_latest(config.snapshot_dir)
        if latest is None:
            return cls(config)
        log.info("restoring snapshot %s", latest)
        return cls.from_snapshot(latest, config)

    # -- periodic snapshots -----------------------------------------------------

    def start_snapshot_timer(self) -> None:
        interval = self.config.snapshot_interval_s
        if interval <= 0:
            return

        def tick():
            try:
                self.snapshot_to()
            except OSError as exc:  # keep running; retried at the next tick
                log.warning("snapshot failed, will retry: %s", exc)
            self._snapshot_timer = threading.Timer(interval, tick)
            self._snapshot_timer.daemon = True
            self._snapshot_timer.start()

        self._snapshot_timer = threading.Timer(interval, tick)
        self._snapshot_timer.daemon = True
        self._snapshot_timer.start()

    def stop_snapshot_timer(self) -> None:
        if self._snapshot_timer is not None:
            self._snapshot_timer.cancel()
            self._snapshot_timer = None
