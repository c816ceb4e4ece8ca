"""Real-time discussion-thread reconstruction over reply/repost links.

The index is an inverted-index lexicon keyed by post id. Every key resolves
to the posting list of its whole thread, so a thread is retrievable in a
single lookup no matter which member is asked about.

A post without linkage starts a new thread: a lexicon entry whose posting
list holds just the post itself. A reply to `target` runs a three-stage
update: fetch the target's posting list (creating a placeholder entry when
the target has not arrived yet), form the member set from it, then index the
reply so that its own posting list is the member set plus itself and every
existing member's list gains the reply.

Two interchangeable backends implement the posting lists:

* KCopiesBackend keeps an independent list copy per key, the straight
  reading of the update operation (k copies for a thread of length k).
* CompactedBackend maps every member of a thread to one shared list,
  trading the copies for pointer aliasing; observable behavior is identical.

Replies arriving before their target are grafted onto the placeholder; if
the target later arrives carrying its own linkage, the two threads merge and
all affected keys are rewritten.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Protocol

from crisiswatch.ingest import Post


class UnknownPost(KeyError):
    """Post id absent from the thread lexicon."""


@dataclass(frozen=True)
class Thread:
    root_id: str
    member_ids: tuple[str, ...]
    size: int
    last_activity: int
    activity_score: float = 0.0


@dataclass(frozen=True)
class ThreadUpdate:
    """Which thread an observed post landed in, and its new size."""

    root_id: str
    size: int


@dataclass(frozen=True)
class ThreadStatsRow:
    post_id: str
    author_id: str
    timestamp: int
    text: str
    credibility: float | None
    link_to: str | None


class PostingListBackend(Protocol):
    lookup_count: int
    read_count: int

    def observe_root(self, post_id: str) -> None: ...

    def observe_reply(self, post_id: str, target: str) -> None: ...

    def members(self, post_id: str) -> tuple[str, ...] | None: ...

    def __contains__(self, post_id: str) -> bool: ...

    def keys(self) -> Iterable[str]: ...


class KCopiesBackend:
    """Reference backend: every key owns its own copy of the thread list."""

    def __init__(self):
        # Posting lists are insertion-ordered, duplicate-free id sequences;
        # dict keys give both properties for free.
        self._lexicon: dict[str, dict[str, None]] = {}
        self.lookup_count = 0
        self.read_count = 0

    def observe_root(self, post_id: str) -> None:
        if post_id not in self._lexicon:
            self._lexicon[post_id] = {post_id: None}

    def observe_reply(self, post_id: str, target: str) -> None:
        target_list = self._lexicon.get(target)
        if target_list is None:
            # Placeholder for a target we have not seen (yet).
            target_list = {target: None}
            self._lexicon[target] = target_list

        own = self._lexicon.get(post_id)
        if own is None:
            # Three-stage update: the member set is the target's posting
            # list (self-inclusive), the new post keys a copy of it plus
            # itself, and every member's copy gains the new post.
            members = list(target_list)
            fresh = dict.fromkeys(members)
            fresh[post_id] = None
            self._lexicon[post_id] = fresh
            for member in members:
                self._lexicon[member][post_id] = None
        elif post_id not in target_list:
            # The post arrived late with linkage of its own: union the two
            # threads and rewrite every affected key.
            union = list(target_list) + [m for m in own if m not in target_list]
            for member in union:
                self._lexicon[member] = dict.fromkeys(union)
        # else: the link closes a cycle inside one thread; nothing changes.

    def members(self, post_id: str) -> tuple[str, ...] | None:
        self.lookup_count += 1
        posting_list = self._lexicon.get(post_id)
        if posting_list is None:
            return None
        self.read_count += 1
        return tuple(posting_list)

    def __contains__(self, post_id: str) -> bool:
        return post_id in self._lexicon

    def keys(self) -> Iterable[str]:
        return self._lexicon.keys()


class CompactedBackend:
    """Compacted backend: all of a thread's keys share one posting list."""

    def __init__(self):
        self._lexicon: dict[str, dict[str, None]] = {}
        self.lookup_count = 0
        self.read_count = 0

    def observe_root(self, post_id: str) -> None:
        if post_id not in self._lexicon:
            self._lexicon[post_id] = {post_id: None}

    def observe_reply(self, post_id: str, target: str) -> None:
        shared = self._lexicon.get(target)
        if shared is None:
            shared = {target: None}
            self._lexicon[target] = shared

        own = self._lexicon.get(post_id)
        if own is None:
            shared[post_id] = None
            self._lexicon[post_id] = shared
        elif own is not shared:
            # Merge: absorb the late arrival's thread into the target's
            # shared list and repoint the absorbed keys.
            for member in own:
                shared.setdefault(member, None)
                self._lexicon[member] = shared

    def members(self, post_id: str) -> tuple[str, ...] | None:
        self.lookup_count += 1
        posting_list = self._lexicon.get(post_id)
        if posting_list is None:
            return None
        self.read_count += 1
        return tuple(posting_list)

    def __contains__(self, post_id: str) -> bool:
        return post_id in self._lexicon

    def keys(self) -> Iterable[str]:
        return self._lexicon.keys()


BACKENDS = {"kcopies": KCopiesBackend, "compacted": CompactedBackend}


def activity_score(timestamps: Iterable[int], now: int, half_life_ms: float) -> float:
    """Sum of per-post exponential decay terms with the given half-life."""
    return sum(2.0 ** (-(now - ts) / half_life_ms) for ts in timestamps)


class ThreadIndex:
    """Per-event thread sensor: one backend plus arrival bookkeeping."""

    def __init__(self, backend: str = "compacted", half_life_ms: float = 6 * 3600 * 1000):
        try:
            self.backend: PostingListBackend = BACKENDS[backend]()
        except KeyError:
            raise ValueError(f"unknown thread backend: {backend!r}") from None
        self.half_life_ms = float(half_life_ms)
        # Arrival sequence and timestamp per observed post; placeholder
        # members referenced by replies but never delivered stay absent.
        self._arrival: dict[str, tuple[int, int]] = {}
        self._next_seq = 0

    def observe(self, post: Post) -> ThreadUpdate:
        """Fold one delivered post into the index."""
        if post.post_id not in self._arrival:
            self._arrival[post.post_id] = (self._next_seq, post.timestamp)
            self._next_seq += 1
        target = post.link_target
        if target is None:
            self.backend.observe_root(post.post_id)
        else:
            self.backend.observe_reply(post.post_id, target)
        members = self.backend.members(post.post_id)
        assert members is not None
        return ThreadUpdate(root_id=self._root_of(members), size=len(members))

    def _root_of(self, members: tuple[str, ...]) -> str:
        """Earliest-arriving member; placeholders cannot be the root."""
        best = None
        best_seq = None
        for member in members:
            arrival = self._arrival.get(member)
            if arrival is not None and (best_seq is None or arrival[0] < best_seq):
                best, best_seq = member, arrival[0]
        assert best is not None, "thread has no delivered member"
        return best

    def _build(self, members: tuple[str, ...], now: int | None = None) -> Thread:
        timestamps = [self._arrival[m][1] for m in members if m in self._arrival]
        last = max(timestamps) if timestamps else 0
        score = 0.0
        if now is not None:
            score = activity_score(timestamps, now, self.half_life_ms)
        return Thread(
            root_id=self._root_of(members),
            member_ids=members,
            size=len(members),
            last_activity=last,
            activity_score=score,
        )

    def thread_of(self, post_id: str) -> Thread:
        """Single-operation retrieval: one lexicon lookup, one list read."""
        members = self.backend.members(post_id)
        if members is None:
            raise UnknownPost(post_id)
        return self._build(members)

    def __contains__(self, post_id: str) -> bool:
        return post_id in self.backend

    def all_threads(self, now: int) -> list[Thread]:
        visited: set[str] = set()
        threads = []
        for key in self.backend.keys():
            if key in visited:
                continue
            members = self.backend.members(key)
            assert members is not None
            visited.update(members)
            threads.append(self._build(members, now=now))
        return threads

    def top_threads(self, k: int, now: int) -> list[Thread]:
        """Threads ranked by decayed activity; ties fall to size then root id."""
        if k <= 0:
            return []
        threads = self.all_threads(now)
        threads.sort(key=lambda t: (-t.activity_score, -t.size, t.root_id))
        return threads[:k]


def thread_stats(
    index: ThreadIndex,
    root_id: str,
    posts: dict[str, Post],
    credibility: dict[str, float],
) -> list[ThreadStatsRow]:
    """Per-member drill-down rows for a thread, ordered by timestamp.

    Members referenced by links but never delivered have no post record and
    are omitted until they arrive.
    """
    thread = index.thread_of(root_id)
    rows = []
    for member in thread.member_ids:
        post = posts.get(member)
        if post is None:
            continue
        rows.append(
            ThreadStatsRow(
                post_id=post.post_id,
                author_id=post.author_id,
                timestamp=post.timestamp,
                text=post.text,
                credibility=credibility.get(post.post_id),
                link_to=post.link_target,
            )
        )
    rows.sort(key=lambda r: (r.timestamp, r.post_id))
    return rows
