"""Tokenization and sparse term vectors shared by ingest, detection, and search."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

# Split on any run of non-alphanumeric characters; underscores separate too.
# Unicode letters and digits survive, so accented terms stay whole tokens.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs. No stemming."""
    return _TOKEN_RE.findall(text.lower())


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Load the stopword list, one term per line; '#' lines are comments.

    Without a path the list shipped with the package is used.
    """
    if path is None:
        data = resources.files("crisiswatch.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        data = Path(path).read_text("utf-8")
    words = set()
    for line in data.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


@dataclass(frozen=True)
class TermVector:
    """Sparse term-frequency vector with its L2 norm cached."""

    weights: dict[str, float]
    norm: float

    @classmethod
    def from_counts(cls, counts: dict[str, int | float]) -> "TermVector":
        weights = {t: float(w) for t, w in counts.items() if w > 0}
        norm = math.sqrt(sum(w * w for w in weights.values()))
        return cls(weights, norm)

    @property
    def is_empty(self) -> bool:
        return not self.weights

    def cosine(self, other: "TermVector") -> float:
        if not self.weights or not other.weights:
            return 0.0
        a, b = self.weights, other.weights
        if len(b) < len(a):
            a, b = b, a
        dot = sum(w * b[t] for t, w in a.items() if t in b)
        if dot == 0.0:
            return 0.0
        return dot / (self.norm * other.norm)


EMPTY_VECTOR = TermVector({}, 0.0)


def vectorize(text: str, stopwords: frozenset[str]) -> TermVector:
    """Term-frequency vector over the tokenized text with stopwords removed."""
    counts = Counter(t for t in tokenize(text) if t not in stopwords)
    if not counts:
        return EMPTY_VECTOR
    return TermVector.from_counts(counts)
