"""Real-time social-media monitoring for emergency response desks.

Two operational layers: a strategic layer that watches the whole accepted
stream for novel posts matching operator-defined tracking profiles, and a
tactical layer of per-event sensors (discussion threads, search, sentiment,
influencers, timeline) fed through an operator-registered event registry.
"""

__version__ = "0.1.0"

from crisiswatch.ingest import Post, TrackingProfile, parse_post, serialize_post

__all__ = ["Post", "TrackingProfile", "parse_post", "serialize_post", "__version__"]
