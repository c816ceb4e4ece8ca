"""Independent reference implementations used to check the real ones.

Each oracle takes a deliberately different route from the production code:
union-find instead of posting-list updates, dense matrices instead of sparse
dicts, exhaustive scoring instead of incremental indexes.
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np


class UnionFind:
    """Classic disjoint sets with path compression, for thread membership."""

    def __init__(self):
        self.parent: dict[str, str] = {}

    def add(self, x: str) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        self.add(x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def components(self) -> dict[str, frozenset[str]]:
        """Map every id to the frozen member set of its component."""
        groups: dict[str, set[str]] = {}
        for x in self.parent:
            groups.setdefault(self.find(x), set()).add(x)
        frozen = {root: frozenset(members) for root, members in groups.items()}
        return {x: frozen[self.find(x)] for x in self.parent}


def thread_membership(posts: list[tuple[str, str | None]]) -> dict[str, frozenset[str]]:
    """Thread member sets from (post_id, link_target) pairs via union-find."""
    uf = UnionFind()
    for post_id, target in posts:
        uf.add(post_id)
        if target is not None:
            uf.union(post_id, target)
    return uf.components()


def bm25_bruteforce(
    docs: dict[str, list[str]],
    timestamps: dict[str, int],
    query_terms: list[str],
    k: int,
    k1: float = 1.2,
    b: float = 0.75,
) -> list[tuple[str, float]]:
    """Exhaustive BM25 over every document, same constants and tie rule."""
    n = len(docs)
    if n == 0 or not query_terms:
        return []
    lengths = {doc_id: len(tokens) for doc_id, tokens in docs.items()}
    avg_len = sum(lengths.values()) / n
    counts = {doc_id: Counter(tokens) for doc_id, tokens in docs.items()}
    df = {
        term: sum(1 for c in counts.values() if term in c)
        for term in set(query_terms)
    }
    scores: dict[str, float] = {}
    for doc_id in docs:
        score = 0.0
        hit = False
        for term in query_terms:
            tf = counts[doc_id].get(term, 0)
            if tf == 0 or df[term] == 0:
                continue
            hit = True
            idf = math.log(1.0 + (n - df[term] + 0.5) / (df[term] + 0.5))
            dl = lengths[doc_id]
            denom = tf + k1 * (1.0 - b + b * dl / avg_len) if avg_len else tf + k1
            score += idf * tf * (k1 + 1.0) / denom
        if hit:
            scores[doc_id] = score
    ranked = sorted(scores.items(), key=lambda it: (-it[1], -timestamps[it[0]], it[0]))
    return ranked[:k]


def pagerank_power_iteration(
    edges: dict[str, dict[str, int]],
    nodes: list[str],
    damping: float = 0.85,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> dict[str, float]:
    """Dense-matrix power iteration with uniform teleport and dangling spread."""
    n = len(nodes)
    if n == 0:
        return {}
    index = {node: i for i, node in enumerate(nodes)}
    transition = np.zeros((n, n))
    dangling = np.ones(n, dtype=bool)
    for source, row in edges.items():
        total = sum(row.values())
        if total == 0:
            continue
        dangling[index[source]] = False
        for target, weight in row.items():
            transition[index[source], index[target]] = weight / total
    rank = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        dangling_mass = rank[dangling].sum()
        fresh = (1.0 - damping) / n + damping * (rank @ transition + dangling_mass / n)
        if np.abs(fresh - rank).sum() < tol:
            rank = fresh
            break
        rank = fresh
    return {node: float(rank[index[node]]) for node in nodes}


class DenseNeighborOracle:
    """Exact nearest-neighbor search over a sliding window.

    Dense-matrix cosine against every window member, organized as a circular
    buffer so the whole-stream acceptance run stays fast.
    """

    def __init__(self, window: int, capacity: int = 1024):
        self.window = window
        self.capacity = capacity
        self.vocab: dict[str, int] = {}
        self.buffer = np.zeros((window, capacity))
        self.norms = np.zeros(window)
        self.slot_ids: list[str | None] = [None] * window
        self.head = 0
        self.count = 0

    def _index(self, term: str) -> int:
        idx = self.vocab.get(term)
        if idx is None:
            idx = len(self.vocab)
            self.vocab[term] = idx
            if idx >= self.capacity:
                extra = np.zeros((self.window, self.capacity))
                self.buffer = np.hstack([self.buffer, extra])
                self.capacity *= 2
        return idx

    def _densify(self, weights: dict[str, float]) -> np.ndarray:
        for term in weights:
            self._index(term)
        vec = np.zeros(self.capacity)
        for term, weight in weights.items():
            vec[self.vocab[term]] = weight
        return vec

    def nearest(self, weights: dict[str, float]) -> tuple[set[str], float]:
        """All argmax-cosine ids in the window (ties included) and the max."""
        rows = min(self.count, self.window)
        if rows == 0 or not weights:
            return set(), 0.0
        query = self._densify(weights)
        qnorm = np.linalg.norm(query)
        width = len(self.vocab)
        sims = self.buffer[:rows, :width] @ query[:width]
        norms = self.norms[:rows] * qnorm
        with np.errstate(invalid="ignore", divide="ignore"):
            sims = np.where(norms > 0, sims / norms, 0.0)
        best = float(sims.max())
        winners = {self.slot_ids[i] for i in np.flatnonzero(sims >= best - 1e-12)}
        return winners, best

    def insert(self, item_id: str, weights: dict[str, float]) -> None:
        vec = self._densify(weights)
        slot = self.head
        self.buffer[slot, :] = 0.0
        self.buffer[slot, : len(vec)] = vec
        self.norms[slot] = np.linalg.norm(vec)
        self.slot_ids[slot] = item_id
        self.head = (self.head + 1) % self.window
        self.count += 1


def cosine_exact(a: dict[str, float], b: dict[str, float]) -> float:
    dot = sum(w * b.get(t, 0.0) for t, w in a.items())
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)
