"""Event registry: operator-registered events and their per-event sensors.

Creating an event spins up empty sensor instances (thread index, search
index, interaction graph, enrichment stores). Routing delivers every
accepted post to all matching active events exactly once, in acceptance
order; archived events stop receiving posts but keep answering queries on
their frozen state.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from crisiswatch import analytics
from crisiswatch.analytics import InteractionGraph, SentimentBucket, TimelineEntry
from crisiswatch.config import ServiceConfig
from crisiswatch.enrichment import CredibilityModel, Gazetteer
from crisiswatch.ingest import Post, matches_keywords
from crisiswatch.search import Bm25Index, SearchResult
from crisiswatch.text import TermVector, vectorize
from crisiswatch.threads import Thread, ThreadIndex, ThreadStatsRow, thread_stats


class EmptyTerms(ValueError):
    """Event registration with no usable tracking terms."""


class UnknownEvent(KeyError):
    pass


class AlreadyArchived(ValueError):
    pass


@dataclass(frozen=True)
class EventConfig:
    event_id: str
    name: str
    tracking_terms: tuple[str, ...]
    created_at: int
    status: str = "active"  # active | archived


@dataclass
class Resources:
    """Shared read-only resources handed to every event's sensors."""

    stopwords: frozenset[str]
    gazetteer: Gazetteer
    sentiment_lexicon: dict[str, float]
    credibility_model: CredibilityModel
    config: ServiceConfig


class EventState:
    """One registered event: config plus all of its sensor instances."""

    def __init__(self, config: EventConfig, resources: Resources):
        self.config = config
        self.resources = resources
        settings = resources.config
        self.posts: dict[str, Post] = {}
        self.order: list[str] = []
        self.author_of: dict[str, str] = {}
        self.author_followers: dict[str, int] = {}  # max seen, dashboard column
        self.credibility: dict[str, float] = {}
        self.vectors: dict[str, TermVector] = {}
        self.thread_index = ThreadIndex(
            backend=settings.threads.backend, half_life_ms=settings.threads.half_life_ms
        )
        self.search_index = Bm25Index(k1=settings.search.k1, b=settings.search.b)
        self.graph = InteractionGraph()

    @property
    def event_id(self) -> str:
        return self.config.event_id

    @property
    def post_count(self) -> int:
        return len(self.order)

    def deliver(self, post: Post) -> None:
        """Feed one routed post through every sensor, in delivery order."""
        if post.post_id in self.posts:
            return
        self.posts[post.post_id] = post
        self.order.append(post.post_id)
        self.author_of[post.post_id] = post.author_id
        if post.follower_count is not None:
            current = self.author_followers.get(post.author_id, 0)
            self.author_followers[post.author_id] = max(current, post.follower_count)
        self.credibility[post.post_id] = self.resources.credibility_model.score(post).score
        self.vectors[post.post_id] = vectorize(post.text, self.resources.stopwords)
        self.thread_index.observe(post)
        self.search_index.index_post(post.post_id, post.text, post.timestamp)
        self.graph.observe(post, self.author_of)

    # Read-side sensor queries ------------------------------------------------

    def top_threads(self, k: int, now: int) -> list[Thread]:
        return self.thread_index.top_threads(k, now)

    def thread_stats(self, root_id: str) -> list[ThreadStatsRow]:
        return thread_stats(self.thread_index, root_id, self.posts, self.credibility)

    def search(self, query: str, k: int) -> list[SearchResult]:
        results = self.search_index.search(query, k)
        annotated = [
            SearchResult(
                post_id=r.post_id,
                relevance=r.relevance,
                credibility=self.credibility.get(r.post_id),
            )
            for r in results
        ]
        if self.resources.config.search.credibility_weighting:
            annotated = [
                SearchResult(r.post_id, r.relevance * (r.credibility or 0.0), r.credibility)
                for r in annotated
            ]
            annotated.sort(key=lambda r: (-r.relevance, -self.posts[r.post_id].timestamp, r.post_id))
        return annotated

    def influencers(self, k: int, method: str = "pagerank") -> list[tuple[str, float]]:
        return analytics.influencers(self.graph, k, method=method)

    def sentiment_series(self, entity: str, bucket_width: int) -> list[SentimentBucket]:
        settings = self.resources.config.sentiment
        return analytics.sentiment_series(
            [self.posts[pid] for pid in self.order],
            entity,
            bucket_width,
            self.resources.gazetteer,
            self.resources.sentiment_lexicon,
            window=settings.window,
            negation_lookback=settings.negation_lookback,
        )

    def timeline(self, now: int) -> list[TimelineEntry]:
        settings = self.resources.config.timeline
        return analytics.build_timeline(
            [self.posts[pid] for pid in self.order],
            self.vectors,
            self.credibility,
            created_at=self.config.created_at,
            now=now,
            bucket_width=settings.bucket_ms,
            min_posts=settings.min_posts,
            novelty_gate=settings.novelty_gate,
        )


class EventRegistry:
    """Owns all events and routes accepted posts to the matching ones."""

    def __init__(self, resources: Resources):
        self.resources = resources
        self._events: dict[str, EventState] = {}
        self.next_id = 1

    def create_event(
        self,
        name: str,
        tracking_terms: list[str],
        created_at: int,
        event_id: str | None = None,
    ) -> EventConfig:
        terms: list[str] = []
        for term in tracking_terms:
            term = term.strip().lower()
            if term and term not in terms:
                terms.append(term)
        if not terms:
            raise EmptyTerms("tracking_terms must contain at least one term")
        if event_id is None:
            event_id = f"ev-{self.next_id}"
            self.next_id += 1
        if event_id in self._events:
            raise ValueError(f"event id already in use: {event_id}")
        config = EventConfig(
            event_id=event_id,
            name=name,
            tracking_terms=tuple(terms),
            created_at=created_at,
        )
        self._events[event_id] = EventState(config, self.resources)
        return config

    def route(self, post: Post) -> list[str]:
        """Deliver the post to every matching active event, at most once each."""
        delivered = []
        for event in self._events.values():
            if event.config.status != "active":
                continue
            if matches_keywords(post.text, event.config.tracking_terms):
                event.deliver(post)
                delivered.append(event.event_id)
        return delivered

    def archive_event(self, event_id: str) -> EventConfig:
        event = self.get(event_id)
        if event.config.status == "archived":
            raise AlreadyArchived(event_id)
        event.config = dataclasses.replace(event.config, status="archived")
        return event.config

    def get(self, event_id: str) -> EventState:
        try:
            return self._events[event_id]
        except KeyError:
            raise UnknownEvent(event_id) from None

    def list_events(self) -> list[EventState]:
        return list(self._events.values())

    def __len__(self) -> int:
        return len(self._events)
