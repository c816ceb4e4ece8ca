"""Per-event derived analytics: influencers, sentiment series, timeline."""

from __future__ import annotations

from dataclasses import dataclass, field

from crisiswatch.enrichment import Gazetteer, SentimentStatus, target_sentiment
from crisiswatch.ingest import Post
from crisiswatch.text import TermVector


class InteractionGraph:
    """Directed author graph; edge u->v counts u's replies/reposts of v."""

    def __init__(self):
        self._edges: dict[str, dict[str, int]] = {}
        self._authors: dict[str, None] = {}  # insertion-ordered node set
        # Links whose target post has not arrived yet: target id -> authors.
        self._pending: dict[str, list[str]] = {}

    def observe(self, post: Post, author_of: dict[str, str]) -> None:
        """Fold a delivered post in; `author_of` resolves known post ids."""
        self._authors.setdefault(post.author_id)
        for source_author in self._pending.pop(post.post_id, []):
            self._add_edge(source_author, post.author_id)
        target = post.link_target
        if target is None:
            return
        target_author = author_of.get(target)
        if target_author is None:
            self._pending.setdefault(target, []).append(post.author_id)
        else:
            self._add_edge(post.author_id, target_author)

    def _add_edge(self, source: str, target: str) -> None:
        if source == target:
            return
        self._authors.setdefault(source)
        self._authors.setdefault(target)
        row = self._edges.setdefault(source, {})
        row[target] = row.get(target, 0) + 1

    @property
    def authors(self) -> list[str]:
        return list(self._authors)

    def out_edges(self, author: str) -> dict[str, int]:
        return self._edges.get(author, {})

    def edge_count(self) -> int:
        return sum(len(row) for row in self._edges.values())


def pagerank(
    graph: InteractionGraph,
    damping: float = 0.85,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> dict[str, float]:
    """PageRank with uniform teleport and dangling mass spread uniformly."""
    nodes = graph.authors
    n = len(nodes)
    if n == 0:
        return {}
    rank = {node: 1.0 / n for node in nodes}
    out_weight = {node: sum(graph.out_edges(node).values()) for node in nodes}
    for _ in range(max_iter):
        dangling = sum(rank[node] for node in nodes if out_weight[node] == 0)
        base = (1.0 - damping) / n + damping * dangling / n
        fresh = {node: base for node in nodes}
        for node in nodes:
            total = out_weight[node]
            if total == 0:
                continue
            share = damping * rank[node]
            for target, weight in graph.out_edges(node).items():
                fresh[target] += share * weight / total
        delta = sum(abs(fresh[node] - rank[node]) for node in nodes)
        rank = fresh
        if delta < tol:
            break
    return rank


def degree_centrality(graph: InteractionGraph) -> dict[str, float]:
    """Config alternative to PageRank: normalized weighted in-degree."""
    nodes = graph.authors
    indeg = {node: 0 for node in nodes}
    for node in nodes:
        for target, weight in graph.out_edges(node).items():
            indeg[target] += weight
    total = sum(indeg.values())
    if total == 0:
        n = len(nodes)
        return {node: 1.0 / n for node in nodes} if nodes else {}
    return {node: indeg[node] / total for node in nodes}


def influencers(
    graph: InteractionGraph, k: int, method: str = "pagerank"
) -> list[tuple[str, float]]:
    """Top-k authors by influence score; ties broken by author id."""
    if k <= 0:
        return []
    scores = pagerank(graph) if method == "pagerank" else degree_centrality(graph)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


@dataclass(frozen=True)
class SentimentBucket:
    bucket_start: int
    entity: str
    mean_polarity: float | None  # None when mentions exist but none carry signal
    mention_count: int
    signal_count: int


def sentiment_series(
    posts: list[Post],
    entity: str,
    bucket_width: int,
    gazetteer: Gazetteer,
    lexicon: dict[str, float],
    window: int = 5,
    negation_lookback: int = 2,
) -> list[SentimentBucket]:
    """Entity sentiment grouped into epoch-aligned buckets.

    Buckets without any mention are omitted; the mean covers only posts that
    produced a polarity signal.
    """
    if bucket_width <= 0:
        raise ValueError("bucket_width must be positive")
    mentions: dict[int, int] = {}
    signals: dict[int, list[float]] = {}
    for post in posts:
        outcome = target_sentiment(
            post, entity, gazetteer, lexicon, window=window, negation_lookback=negation_lookback
        )
        if outcome is SentimentStatus.NO_MENTION:
            continue
        start = (post.timestamp // bucket_width) * bucket_width
        mentions[start] = mentions.get(start, 0) + 1
        if not isinstance(outcome, SentimentStatus):
            signals.setdefault(start, []).append(outcome)
    buckets = []
    for start in sorted(mentions):
        polarities = signals.get(start, [])
        mean = sum(polarities) / len(polarities) if polarities else None
        buckets.append(
            SentimentBucket(
                bucket_start=start,
                entity=entity,
                mean_polarity=mean,
                mention_count=mentions[start],
                signal_count=len(polarities),
            )
        )
    return buckets


@dataclass(frozen=True)
class TimelineEntry:
    bucket_start: int
    post_id: str
    headline: str


def build_timeline(
    posts: list[Post],
    vectors: dict[str, TermVector],
    credibility: dict[str, float],
    created_at: int,
    now: int,
    bucket_width: int = 3_600_000,
    min_posts: int = 3,
    novelty_gate: float = 0.7,
) -> list[TimelineEntry]:
    """One representative post per sufficiently busy bucket.

    Buckets are anchored at event creation. The candidate is the bucket's
    centrality argmax (sum of cosines to bucket mates, ties to higher
    credibility then earlier arrival); it is admitted only while its cosine
    to every earlier entry stays under the novelty gate.
    """
    if now < created_at:
        return []
    buckets: dict[int, list[Post]] = {}
    for post in posts:
        if post.timestamp < created_at or post.timestamp > now:
            continue
        index = (post.timestamp - created_at) // bucket_width
        buckets.setdefault(index, []).append(post)

    entries: list[TimelineEntry] = []
    admitted_vectors: list[TermVector] = []
    for index in sorted(buckets):
        group = buckets[index]
        if len(group) < min_posts:
            continue
        best_post = None
        best_key = None
        for post in group:
            vector = vectors[post.post_id]
            centrality = sum(
                vector.cosine(vectors[other.post_id]) for other in group if other is not post
            )
            key = (-centrality, -credibility.get(post.post_id, 0.0), post.timestamp, post.post_id)
            if best_key is None or key < best_key:
                best_post, best_key = post, key
        assert best_post is not None
        candidate_vector = vectors[best_post.post_id]
        if any(candidate_vector.cosine(v) >= novelty_gate for v in admitted_vectors):
            continue
        entries.append(
            TimelineEntry(
                bucket_start=created_at + index * bucket_width,
                post_id=best_post.post_id,
                headline=best_post.text,
            )
        )
        admitted_vectors.append(candidate_vector)
    return entries
