"""Per-event incremental full-text index with BM25 ranking.

Stopwords are kept so quoted operational terms stay searchable; the ranking
constants are the usual k1/b defaults. Results are annotated with the
enrichment credibility score by the event layer; by default credibility does
not change the ranking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from crisiswatch.text import tokenize


@dataclass(frozen=True)
class SearchResult:
    post_id: str
    relevance: float
    credibility: float | None = None


class Bm25Index:
    """Incremental inverted index; posts are searchable as soon as indexed."""

    def __init__(self, k1: float = 1.2, b: float = 0.75):
        self.k1 = k1
        self.b = b
        self.doc_count = 0
        self.total_length = 0
        self._postings: dict[str, list[tuple[str, int]]] = {}
        self._doc_length: dict[str, int] = {}
        self._doc_ts: dict[str, int] = {}

    def index_post(self, post_id: str, text: str, timestamp: int) -> None:
        tokens = tokenize(text)
        counts: dict[str, int] = {}
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
        self._doc_length[post_id] = len(tokens)
        self._doc_ts[post_id] = timestamp
        self.doc_count += 1
        self.total_length += len(tokens)
        for term, tf in counts.items():
            self._postings.setdefault(term, []).append((post_id, tf))

    def __contains__(self, post_id: str) -> bool:
        return post_id in self._doc_length

    def search(self, query: str, k: int) -> list[SearchResult]:
        """Top-k by BM25, ties broken by newer timestamp then post id."""
        if k <= 0 or self.doc_count == 0:
            return []
        terms = tokenize(query)
        if not terms:
            return []
        avg_len = self.total_length / self.doc_count
        scores: dict[str, float] = {}
        for term in terms:
            postings = self._postings.get(term)
            if not postings:
                continue
            df = len(postings)
            idf = math.log(1.0 + (self.doc_count - df + 0.5) / (df + 0.5))
            for post_id, tf in postings:
                dl = self._doc_length[post_id]
                denom = tf + self.k1 * (1.0 - self.b + self.b * dl / avg_len) if avg_len else tf + self.k1
                scores[post_id] = scores.get(post_id, 0.0) + idf * tf * (self.k1 + 1.0) / denom
        ranked = sorted(
            scores.items(), key=lambda item: (-item[1], -self._doc_ts[item[0]], item[0])
        )
        return [SearchResult(post_id=pid, relevance=score) for pid, score in ranked[:k]]
