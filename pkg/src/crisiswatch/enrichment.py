"""Deterministic per-post enrichment sensors.

Entity extraction is longest-match gazetteer lookup, targeted sentiment is a
lexicon sum over tokens near a mention with negation flipping, and
credibility is a logistic score over surface features. All three sit behind
plain interfaces so learned models can replace them without touching
callers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

from crisiswatch.ingest import Post
from crisiswatch.text import tokenize

ENTITY_KINDS = ("person", "organization", "place")

NEGATORS = frozenset({"not", "no", "never", "nt"})


class SentimentStatus(enum.Enum):
    """Non-numeric outcomes of targeted sentiment."""

    NO_MENTION = "no_mention"
    NO_SIGNAL = "no_signal"


NO_MENTION = SentimentStatus.NO_MENTION
NO_SIGNAL = SentimentStatus.NO_SIGNAL


@dataclass(frozen=True)
class EntityMention:
    entity: str
    kind: str
    token_span: tuple[int, int]  # [start, end) token indices


class Gazetteer:
    """Surface form (1-3 lowercase tokens) -> (canonical name, kind)."""

    def __init__(self, entries: dict[tuple[str, ...], tuple[str, str]] | None = None):
        self._entries: dict[tuple[str, ...], tuple[str, str]] = {}
        self.max_len = 1
        for surface, value in (entries or {}).items():
            self.add(surface, *value)

    def add(self, surface: tuple[str, ...] | str, canonical: str, kind: str) -> None:
        if isinstance(surface, str):
            surface = tuple(tokenize(surface))
        if not 1 <= len(surface) <= 3:
            raise ValueError("gazetteer surface forms are 1-3 tokens")
        if kind not in ENTITY_KINDS:
            raise ValueError(f"unknown entity kind: {kind!r}")
        self._entries[tuple(t.lower() for t in surface)] = (canonical, kind)
        self.max_len = max(self.max_len, len(surface))

    def get(self, surface: tuple[str, ...]) -> tuple[str, str] | None:
        return self._entries.get(surface)

    def __len__(self) -> int:
        return len(self._entries)


def parse_gazetteer(text: str, origin: str = "<gazetteer>") -> Gazetteer:
    """Parse `surface<TAB>canonical<TAB>kind` lines (UTF-8, # comments)."""
    gazetteer = Gazetteer()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{origin}:{lineno}: expected surface<TAB>canonical<TAB>kind")
        gazetteer.add(parts[0], parts[1], parts[2])
    return gazetteer


def load_gazetteer(path: str | Path) -> Gazetteer:
    return parse_gazetteer(Path(path).read_text("utf-8"), origin=str(path))


def parse_sentiment_lexicon(text: str, origin: str = "<lexicon>") -> dict[str, float]:
    """Parse `term<TAB>polarity` lines with polarity in [-1, 1]."""
    lexicon: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"{origin}:{lineno}: expected term<TAB>polarity")
        polarity = float(parts[1])
        if not -1.0 <= polarity <= 1.0:
            raise ValueError(f"{origin}:{lineno}: polarity out of [-1, 1]")
        lexicon[parts[0].lower()] = polarity
    return lexicon


def load_sentiment_lexicon(path: str | Path) -> dict[str, float]:
    return parse_sentiment_lexicon(Path(path).read_text("utf-8"), origin=str(path))


def extract_entities(text: str, gazetteer: Gazetteer) -> list[EntityMention]:
    """Longest-match, left-to-right, non-overlapping gazetteer mentions."""
    tokens = tokenize(text)
    mentions: list[EntityMention] = []
    i = 0
    n = len(tokens)
    while i < n:
        hit = None
        for width in range(min(gazetteer.max_len, n - i), 0, -1):
            entry = gazetteer.get(tuple(tokens[i : i + width]))
            if entry is not None:
                hit = (width, entry)
                break
        if hit is None:
            i += 1
        else:
            width, (canonical, kind) = hit
            mentions.append(EntityMention(canonical, kind, (i, i + width)))
            i += width
    return mentions


def target_sentiment(
    post: Post,
    entity: str,
    gazetteer: Gazetteer,
    lexicon: dict[str, float],
    window: int = 5,
    negation_lookback: int = 2,
) -> float | SentimentStatus:
    """Polarity of tokens near mentions of `entity`, in [-1, 1].

    Each lexicon term inside a mention window contributes its polarity; the
    sign flips when a negator sits within the lookback immediately before it
    and no other lexicon term intervenes. Contributions from all mention
    windows are pooled into one mean.
    """
    tokens = tokenize(post.text)
    mentions = [m for m in extract_entities(post.text, gazetteer) if m.entity == entity]
    if not mentions:
        return NO_MENTION

    contributions: list[float] = []
    for mention in mentions:
        start, end = mention.token_span
        lo = max(0, start - window)
        hi = min(len(tokens), end + window)
        for i in range(lo, hi):
            polarity = lexicon.get(tokens[i])
            if polarity is None:
                continue
            flip = False
            for j in range(i - 1, max(i - 1 - negation_lookback, -1), -1):
                if tokens[j] in NEGATORS:
                    flip = True
                    break
                if tokens[j] in lexicon:
                    break  # an intervening sentiment term absorbs the negation
            contributions.append(-polarity if flip else polarity)
    if not contributions:
        return NO_SIGNAL
    mean = sum(contributions) / len(contributions)
    return max(-1.0, min(1.0, mean))


@dataclass(frozen=True)
class Credibility:
    score: float
    features: dict[str, float]


@dataclass(frozen=True)
class CredibilityModel:
    """Logistic score over surface features of a post."""

    w0: float = 0.0
    w_url: float = 1.0
    w_followers: float = 1.5
    w_reposts: float = 1.0
    w_length: float = 0.5
    w_caps: float = -1.0
    w_exclaim: float = -1.0

    # Normalization caps; feature values saturate at 1.
    followers_cap: float = 1e7
    reposts_cap: float = 1e5
    length_cap: int = 40
    exclaim_cap: int = 5

    def features(self, post: Post) -> dict[str, float]:
        alpha = [c for c in post.text if c.isalpha()]
        caps = sum(1 for c in alpha if c.isupper()) / len(alpha) if alpha else 0.0
        followers = post.follower_count or 0
        reposts = post.repost_count or 0
        return {
            "url": 1.0 if post.urls else 0.0,
            "followers": min(1.0, math.log1p(followers) / math.log1p(self.followers_cap)),
            "reposts": min(1.0, math.log1p(reposts) / math.log1p(self.reposts_cap)),
            "length": min(1.0, len(tokenize(post.text)) / self.length_cap),
            "caps": caps,
            "exclaim": min(1.0, post.text.count("!") / self.exclaim_cap),
        }

    def score(self, post: Post) -> Credibility:
        f = self.features(post)
        z = (
            self.w0
            + self.w_url * f["url"]
            + self.w_followers * f["followers"]
            + self.w_reposts * f["reposts"]
            + self.w_length * f["length"]
            + self.w_caps * f["caps"]
            + self.w_exclaim * f["exclaim"]
        )
        return Credibility(score=1.0 / (1.0 + math.exp(-z)), features=f)
