"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class RunRequest(BaseModel):
    """Experiment submission: a config file body plus key=value overrides."""

    config_text: str = ""
    overrides: list[str] = Field(default_factory=list)


class JobStatus(BaseModel):
    id: str
    state: str                      # pending | running | done | error
    error: Optional[str] = None


class SummarizeRequest(BaseModel):
    """Metrics payload in the same shape the runner writes to metrics.json."""

    metrics: dict


class SummarizeResponse(BaseModel):
    report: str
    ok: bool


class SelftestResponse(BaseModel):
    lines: list[str]
    ok: bool


class HealthResponse(BaseModel):
    status: str
    version: str
