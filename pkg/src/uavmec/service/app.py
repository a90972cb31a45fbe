"""FastAPI wrapper around the experiment runner.

The service holds finished experiments in memory and serves their artifacts
over GET endpoints; it never writes to disk. Clients that want files (the
bundled CLI does) fetch the artifact bodies and store them locally.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__, selftest
from ..experiment import (
    ExperimentResult,
    metrics_payload,
    run_experiment,
    slots_csv_text,
    summarize_metrics,
)
from ..scenario import ConfigError, config_echo, load_config_text
from .schemas import (
    HealthResponse,
    JobStatus,
    RunRequest,
    SelftestResponse,
    SummarizeRequest,
    SummarizeResponse,
)


@dataclass
class _Job:
    id: str
    state: str = "pending"
    error: Optional[str] = None
    result: Optional[ExperimentResult] = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class _Registry:
    def __init__(self):
        self._jobs: dict[str, _Job] = {}
        self._lock = threading.Lock()

    def create(self) -> _Job:
        job = _Job(id=uuid.uuid4().hex)
        with self._lock:
            self._jobs[job.id] = job
        return job

    def get(self, job_id: str) -> _Job:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown experiment id")
        return job


def _execute(job: _Job, cfg) -> None:
    with job.lock:
        job.state = "running"
    try:
        result = run_experiment(cfg)
        with job.lock:
            job.result = result
            job.state = "done"
    except Exception as exc:
        with job.lock:
            job.error = f"{type(exc).__name__}: {exc}"
            job.state = "error"


def _status(job: _Job) -> JobStatus:
    with job.lock:
        return JobStatus(id=job.id, state=job.state, error=job.error)


def _done_result(job: _Job) -> ExperimentResult:
    with job.lock:
        if job.state == "error":
            raise HTTPException(status_code=409, detail=job.error or "experiment failed")
        if job.state != "done" or job.result is None:
            raise HTTPException(status_code=409, detail="experiment still running")
        return job.result


def create_app() -> FastAPI:
    app = FastAPI(title="uavmec", version=__version__)
    registry = _Registry()

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/experiments", response_model=JobStatus)
    def submit(req: RunRequest, wait: bool = Query(default=True)) -> JobStatus:
        try:
            cfg = load_config_text(req.config_text, req.overrides, origin="request")
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        job = registry.create()
        if wait:
            _execute(job, cfg)
        else:
            threading.Thread(target=_execute, args=(job, cfg), daemon=True).start()
        return _status(job)

    @app.get("/experiments/{job_id}", response_model=JobStatus)
    def status(job_id: str) -> JobStatus:
        return _status(registry.get(job_id))

    @app.get("/experiments/{job_id}/slots.csv", response_class=PlainTextResponse)
    def slots(job_id: str) -> PlainTextResponse:
        result = _done_result(registry.get(job_id))
        return PlainTextResponse(slots_csv_text(result), media_type="text/csv")

    @app.get("/experiments/{job_id}/metrics.json")
    def metrics(job_id: str) -> JSONResponse:
        result = _done_result(registry.get(job_id))
        return JSONResponse(metrics_payload(result))

    @app.get("/experiments/{job_id}/config", response_class=PlainTextResponse)
    def config(job_id: str) -> PlainTextResponse:
        result = _done_result(registry.get(job_id))
        return PlainTextResponse(config_echo(result.cfg))

    @app.post("/summarize", response_model=SummarizeResponse)
    def summarize(req: SummarizeRequest) -> SummarizeResponse:
        report, ok = summarize_metrics(list(req.metrics.values()))
        return SummarizeResponse(report=report, ok=ok)

    @app.post("/selftest", response_model=SelftestResponse)
    def run_selftest() -> SelftestResponse:
        results = selftest.run_checks()
        return SelftestResponse(lines=selftest.format_lines(results),
                                ok=all(ok for _, ok, _ in results))

    return app
