"""HTTP surface: REST endpoints plus server-push channels (SSE)."""

from __future__ import annotations

import json
import queue
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles

from crisiswatch.events import AlreadyArchived, EmptyTerms, EventState, UnknownEvent
from crisiswatch.ingest import wire_dict
from crisiswatch.service import MonitorService, Subscription, UnknownProfile, UnknownTopic
from crisiswatch.text import tokenize
from crisiswatch.threads import UnknownPost

_POLL_S = 0.5
_KEEPALIVE_POLLS = 30


def _event_payload(state: EventState) -> dict:
    c = state.config
    return {
        "event_id": c.event_id,
        "name": c.name,
        "tracking_terms": list(c.tracking_terms),
        "created_at": c.created_at,
        "status": c.status,
        "posts": state.post_count,
    }


def _sse(sub: Subscription):
    def generate():
        try:
            idle = 0
            while True:
                try:
                    message = sub.queue.get(timeout=_POLL_S)
                except queue.Empty:
                    if sub.dropped:
                        return
                    idle += 1
                    if idle >= _KEEPALIVE_POLLS:
                        idle = 0
                        yield ": keepalive\n\n"
                    continue
                idle = 0
                yield f"data: {json.dumps(message, ensure_ascii=False)}\n\n"
        finally:
            sub.close()

    return StreamingResponse(generate(), media_type="text/event-stream")


def create_app(service: MonitorService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="crisiswatch", version="0.1.0")
    app.state.service = service

    # -- ingestion ----------------------------------------------------------

    @app.post("/api/posts")
    async def ingest_posts(request: Request) -> dict:
        body = (await request.body()).decode("utf-8")
        return service.submit_batch(body)

    # -- strategic layer ------------------------------------------------------

    @app.get("/api/profiles")
    def get_profiles() -> list[dict]:
        return [
            {
                "profile_id": p.profile_id,
                "name": p.name,
                "event_type": p.event_type,
                "keywords": list(p.keywords),
                "novelty_threshold": p.novelty_threshold,
            }
            for p in service.list_profiles()
        ]

    @app.post("/api/profiles")
    def post_profile(payload: dict = Body(...)) -> dict:
        keywords = payload.get("keywords")
        if not isinstance(keywords, list) or not all(isinstance(k, str) for k in keywords):
            raise HTTPException(status_code=400, detail="keywords must be a list of strings")
        try:
            profile = service.create_profile(
                keywords=keywords,
                name=payload.get("name", ""),
                event_type=payload.get("event_type", ""),
                novelty_threshold=payload.get("novelty_threshold"),
                profile_id=payload.get("profile_id"),
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "profile_id": profile.profile_id,
            "name": profile.name,
            "event_type": profile.event_type,
            "keywords": list(profile.keywords),
            "novelty_threshold": profile.novelty_threshold,
        }

    @app.delete("/api/profiles/{profile_id}")
    def delete_profile(profile_id: str) -> dict:
        try:
            service.delete_profile(profile_id)
        except UnknownProfile:
            raise HTTPException(status_code=404, detail=f"unknown profile: {profile_id}")
        return {"deleted": profile_id}

    @app.get("/stream/pings")
    def stream_pings():
        return _sse(service.subscribe("pings"))

    # -- event registry ---------------------------------------------------------

    @app.get("/api/events")
    def get_events() -> list[dict]:
        return [_event_payload(state) for state in service.list_events()]

    @app.post("/api/events")
    def post_event(payload: dict = Body(...)) -> dict:
        terms = payload.get("tracking_terms")
        if not isinstance(terms, list) or not all(isinstance(t, str) for t in terms):
            raise HTTPException(status_code=400, detail="tracking_terms must be a list of strings")
        try:
            config = service.create_event(payload.get("name", ""), terms)
        except EmptyTerms as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _event_payload(service.get_event(config.event_id))

    @app.post("/api/events/{event_id}/archive")
    def archive_event(event_id: str) -> dict:
        try:
            service.archive_event(event_id)
        except UnknownEvent:
            raise HTTPException(status_code=404, detail=f"unknown event: {event_id}")
        except AlreadyArchived:
            raise HTTPException(status_code=409, detail=f"event already archived: {event_id}")
        return _event_payload(service.get_event(event_id))

    @app.get("/stream/events/{event_id}/posts")
    def stream_event_posts(event_id: str):
        try:
            sub = service.subscribe(f"events/{event_id}/posts")
        except UnknownTopic:
            raise HTTPException(status_code=404, detail=f"unknown event: {event_id}")
        return _sse(sub)

    # -- tactical sensors ---------------------------------------------------------

    def _state(event_id: str) -> EventState:
        try:
            return service.get_event(event_id)
        except UnknownEvent:
            raise HTTPException(status_code=404, detail=f"unknown event: {event_id}")

    @app.get("/api/events/{event_id}/threads")
    def get_threads(event_id: str, limit: int = Query(20, ge=1, le=500)) -> list[dict]:
        state = _state(event_id)
        rows = []
        for thread in state.top_threads(limit, service.now()):
            root = state.posts.get(thread.root_id)
            rows.append(
                {
                    "root_id": thread.root_id,
                    "size": thread.size,
                    "last_activity": thread.last_activity,
                    "activity_score": thread.activity_score,
                    "root_author": root.author_id if root else None,
                    "root_text": root.text if root else None,
                }
            )
        return rows

    @app.get("/api/events/{event_id}/threads/{root_id}")
    def get_thread_stats(event_id: str, root_id: str) -> list[dict]:
        state = _state(event_id)
        try:
            rows = state.thread_stats(root_id)
        except UnknownPost:
            raise HTTPException(status_code=404, detail=f"unknown post: {root_id}")
        return [
            {
                "id": r.post_id,
                "author": r.author_id,
                "ts": r.timestamp,
                "text": r.text,
                "credibility": r.credibility,
                "link_to": r.link_to,
            }
            for r in rows
        ]

    @app.get("/api/events/{event_id}/search")
    def get_search(event_id: str, q: str = Query(""), limit: int = Query(10, ge=1, le=200)) -> list[dict]:
        state = _state(event_id)
        results = []
        for result in state.search(q, limit):
            payload = wire_dict(state.posts[result.post_id])
            payload["score"] = result.relevance
            payload["credibility"] = result.credibility
            results.append(payload)
        return results

    @app.get("/api/events/{event_id}/influencers")
    def get_influencers(event_id: str, limit: int = Query(10, ge=1, le=200)) -> list[dict]:
        state = _state(event_id)
        return [
            {
                "author": author,
                "score": score,
                "followers": state.author_followers.get(author, 0),
            }
            for author, score in state.influencers(limit)
        ]

    @app.get("/api/events/{event_id}/sentiment")
    def get_sentiment(
        event_id: str,
        entity: str = Query(...),
        bucket: int = Query(3600, ge=1, description="bucket width in seconds"),
    ) -> list[dict]:
        state = _state(event_id)
        return [
            {
                "bucket_start": b.bucket_start,
                "entity": b.entity,
                "mean_polarity": b.mean_polarity,
                "mention_count": b.mention_count,
                "signal_count": b.signal_count,
            }
            for b in state.sentiment_series(entity, bucket * 1000)
        ]

    @app.get("/api/events/{event_id}/timeline")
    def get_timeline(event_id: str) -> list[dict]:
        state = _state(event_id)
        return [
            {"bucket_start": e.bucket_start, "id": e.post_id, "headline": e.headline}
            for e in state.timeline(service.now())
        ]

    # -- operations ---------------------------------------------------------------

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "healthy",
            "events": len(service.list_events()),
            "accepted": service.acceptor.accepted_count,
            "stream_clock": service.stream_clock,
        }

    @app.get("/api/tokenize")
    def get_tokens(text: str = Query("")) -> dict:
        # The dashboard pre-fills Event Builder terms from here so client and
        # server tokenization can never drift apart.
        return {"tokens": tokenize(text)}

    @app.post("/api/snapshot")
    def post_snapshot(payload: dict | None = Body(None)) -> dict:
        directory = (payload or {}).get("dir")
        try:
            path = service.snapshot_to(directory)
        except OSError as exc:
            raise HTTPException(status_code=500, detail=f"snapshot failed: {exc}")
        return {"path": str(path)}

    if ui_dir is None:
        default_ui = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        ui_dir = default_ui if default_ui.is_dir() else None
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
