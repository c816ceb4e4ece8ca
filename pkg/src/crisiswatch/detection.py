"""First-story detection over profile-matching posts.

Novelty of a post is one minus its maximum cosine similarity to candidate
posts retrieved by random-hyperplane LSH from a sliding window of the most
recent matching posts. Posts whose novelty clears a profile's threshold
emit pings for the strategic map.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass

import numpy as np

from crisiswatch.ingest import Post, TrackingProfile, matches_profile
from crisiswatch.text import TermVector, vectorize


@dataclass(frozen=True)
class PingAlert:
    """A novel profile-matching post, pushed to the strategic map."""

    post_id: str
    profile_id: str
    novelty: float
    timestamp: int
    geo: tuple[float, float] | None = None


class HyperplaneLsh:
    """Cosine LSH: `tables` signatures of `bits` random hyperplanes each.

    Hyperplane coefficients per vocabulary term are drawn from a generator
    seeded by a keyed hash of the term, so signatures are reproducible for a
    fixed seed and independent of insertion order.
    """

    def __init__(self, tables: int = 8, bits: int = 12, seed: int = 42):
        self.tables = tables
        self.bits = bits
        self.seed = seed
        self._planes: dict[str, np.ndarray] = {}
        self._buckets: list[dict[int, set[str]]] = [{} for _ in range(tables)]

    def _term_planes(self, term: str) -> np.ndarray:
        cached = self._planes.get(term)
        if cached is None:
            digest = hashlib.blake2b(
                term.encode("utf-8"), digest_size=8, key=str(self.seed).encode("ascii")
            ).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "big"))
            cached = rng.standard_normal(self.tables * self.bits)
            self._planes[term] = cached
        return cached

    def signature(self, vector: TermVector) -> tuple[int, ...]:
        """Per-table bucket keys for a vector (zero vector keys all-ones)."""
        proj = np.zeros(self.tables * self.bits)
        for term, weight in vector.weights.items():
            proj += self._term_planes(term) * weight
        side = proj >= 0.0
        keys = []
        for t in range(self.tables):
            key = 0
            for bit in side[t * self.bits : (t + 1) * self.bits]:
                key = (key << 1) | int(bit)
            keys.append(key)
        return tuple(keys)

    def insert(self, item_id: str, keys: tuple[int, ...]) -> None:
        for table, key in zip(self._buckets, keys):
            table.setdefault(key, set()).add(item_id)

    def remove(self, item_id: str, keys: tuple[int, ...]) -> None:
        for table, key in zip(self._buckets, keys):
            bucket = table.get(key)
            if bucket is not None:
                bucket.discard(item_id)
                if not bucket:
                    del table[key]

    def candidates(self, keys: tuple[int, ...]) -> set[str]:
        found: set[str] = set()
        for table, key in zip(self._buckets, keys):
            bucket = table.get(key)
            if bucket:
                found |= bucket
        return found


class FirstStoryDetector:
    """Sliding-window novelty scorer shared across all tracking profiles."""

    def __init__(
        self,
        stopwords: frozenset[str],
        window: int = 2000,
        tables: int = 8,
        bits: int = 12,
        seed: int = 42,
    ):
        self.stopwords = stopwords
        self.window_size = window
        self.lsh = HyperplaneLsh(tables=tables, bits=bits, seed=seed)
        self._order: deque[str] = deque()
        self._vectors: dict[str, TermVector] = {}
        self._keys: dict[str, tuple[int, ...]] = {}

    def __len__(self) -> int:
        return len(self._order)

    def window_vectors(self) -> dict[str, TermVector]:
        """Current window contents (read-only view for tests and tuning)."""
        return dict(self._vectors)

    def vectorize(self, text: str) -> TermVector:
        return vectorize(text, self.stopwords)

    def candidate_ids(self, vector: TermVector) -> set[str]:
        return self.lsh.candidates(self.lsh.signature(vector))

    def novelty(self, vector: TermVector) -> float:
        """1 - max cosine to LSH candidates; empty vectors are never novel."""
        if vector.is_empty:
            return 0.0
        best = 0.0
        candidates = self.candidate_ids(vector)
        if not candidates:
            return 1.0
        for item_id in candidates:
            sim = vector.cosine(self._vectors[item_id])
            if sim > best:
                best = sim
        return min(1.0, max(0.0, 1.0 - best))

    def insert(self, post_id: str, vector: TermVector) -> None:
        if post_id in self._vectors:
            return
        keys = self.lsh.signature(vector)
        self._order.append(post_id)
        self._vectors[post_id] = vector
        self._keys[post_id] = keys
        self.lsh.insert(post_id, keys)
        while len(self._order) > self.window_size:
            evicted = self._order.popleft()
            self.lsh.remove(evicted, self._keys.pop(evicted))
            del self._vectors[evicted]

    def detect(self, post: Post, profiles: list[TrackingProfile]) -> list[PingAlert]:
        """Score the post once against the shared window and emit pings.

        The post joins the window when it matches at least one profile,
        whether or not any ping fires.
        """
        matching = [p for p in profiles if matches_profile(post, p)]
        if not matching:
            return []
        vector = self.vectorize(post.text)
        novelty = self.novelty(vector)
        pings = [
            PingAlert(
                post_id=post.post_id,
                profile_id=profile.profile_id,
                novelty=novelty,
                timestamp=post.timestamp,
                geo=post.geo,
            )
            for profile in matching
            if novelty >= profile.novelty_threshold
        ]
        self.insert(post.post_id, vector)
        return pings
