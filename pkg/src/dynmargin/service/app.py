"""Read-only HTTP queries over a precomputed margin series.

The service never computes margins. Its whole state is one immutable
:class:`ServiceState`; a reload builds a fresh state and swaps the reference,
so concurrent requests see either the old or the new series, never a mix.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse

from ..core import Direction, format_instant, parse_instant
from ..series import read_series
from .schemas import ErrorBody, Health, MarginRecord


@dataclass(frozen=True)
class ServiceState:
    index: dict = field(default_factory=dict)
    rows: int = 0
    loaded_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    source: str | None = None

    @classmethod
    def from_rows(cls, rows, source=None) -> "ServiceState":
        index = {}
        for r in rows:
            index.setdefault((r.t0, r.delta_T, r.direction), []).append(MarginRecord(**r.record()))
        frozen = {k: tuple(sorted(v, key=lambda rec: rec.T)) for k, v in index.items()}
        return cls(frozen, len(rows), datetime.now(timezone.utc), source)


class SeriesStore:
    """Holds the current state; ``reload`` re-reads the series file."""

    def __init__(self, path=None):
        self.path = Path(path) if path is not None else None
        self._write_lock = threading.Lock()
        self._state = ServiceState()
        if self.path is not None:
            self.reload()

    @property
    def state(self) -> ServiceState:
        return self._state

    def reload(self, path=None) -> ServiceState:
        with self._write_lock:
            if path is not None:
                self.path = Path(path)
            if self.path is None:
                fresh = ServiceState()
            else:
                fresh = ServiceState.from_rows(read_series(self.path), str(self.path))
            self._state = fresh
            return fresh


def _bad_request(param: str, message: str):
    raise HTTPException(status_code=400, detail=f"{param}: {message}")


def create_app(store: SeriesStore | None = None, series_path=None) -> FastAPI:
    store = store if store is not None else SeriesStore(series_path)
    app = FastAPI(title="dynmargin", description="Required balancing margins (read-only)")
    app.state.store = store

    @app.exception_handler(HTTPException)
    async def _http_error(request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    @app.get("/healthz", response_model=Health)
    def healthz():
        state = store.state
        return Health(status="ok", rows=state.rows, loaded_at=state.loaded_at.isoformat(), series=state.source)

    @app.get("/margins", response_model=MarginRecord,
             responses={400: {"model": ErrorBody}, 404: {"model": ErrorBody}})
    def margins(t0: str | None = Query(None, description="instant of computation, ISO-8601"),
                horizon: str | None = Query(None, description="anticipation period in minutes"),
                direction: str | None = Query(None, description="up or down"),
                T: str | None = Query(None, description="study instant, needed when several match")):
        for name, value in (("t0", t0), ("horizon", horizon), ("direction", direction)):
            if value is None or not value.strip():
                _bad_request(name, "missing query parameter")
        try:
            when = parse_instant(t0)
        except ValueError as exc:
            _bad_request("t0", f"malformed instant {t0!r} ({exc})")
        try:
            minutes = int(horizon)
        except ValueError:
            _bad_request("horizon", f"expected whole minutes, got {horizon!r}")
        if minutes < 0:
            _bad_request("horizon", "must be >= 0")
        try:
            side = Direction.parse(direction)
        except ValueError:
            _bad_request("direction", f"expected up or down, got {direction!r}")
        study = None
        if T is not None:
            try:
                study = format_instant(parse_instant(T))
            except ValueError as exc:
                _bad_request("T", f"malformed instant {T!r} ({exc})")

        matches = store.state.index.get((when, minutes, side), ())
        if study is not None:
            matches = tuple(rec for rec in matches if rec.T == study)
        if not matches:
            raise HTTPException(status_code=404, detail=f"no margin for t0={format_instant(when)}, "
                                                        f"horizon={minutes}, direction={side.value}")
        if len(matches) > 1:
            _bad_request("T", f"{len(matches)} study instants match; pass T")
        return matches[0]

    return app
