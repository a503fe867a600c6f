"""Local HTTP JSON API for the explorer UI.

Jobs run asynchronously on a single shared compute slot; clients poll
status and fetch results when done. Identical submissions (same scenario,
seed, and panel) are served from cache and return the original job id.
Binds localhost by default: this is a researcher's desk tool.
"""

from __future__ import annotations

import hashlib
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import ScenarioRequest
from .errors import CopolicyError, InfeasibleWindow
from .figures import summary_panels
from .metrics import REL_BIAS_BAND_EDGES_PCT, STD_BIAS_BAND_EDGES
from .panel import Panel, SynthConfig, panel_summary, synth_panel
from .policy import enactment_window
from .runner import run_scenario

# Discussion guidance: minimum years between enactment dates for reliable
# estimates, per model class; plus the bias classification band edges.
REFERENCE_THRESHOLDS = {
    "ar_min_gap_years": [3, 4],
    "did_min_gap_years": [6, 7],
    "rel_bias_band_edges_pct": list(REL_BIAS_BAND_EDGES_PCT),
    "std_bias_band_edges": list(STD_BIAS_BAND_EDGES),
}


class JobSubmitted(BaseModel):
    job_id: str


class JobProgress(BaseModel):
    completed: int
    total: int
    fraction: float


class JobStatus(BaseModel):
    job_id: str
    status: str
    progress: JobProgress


@dataclass
class JobRecord:
    job_id: str
    request: ScenarioRequest
    status: str = "queued"   # queued -> running -> done | failed
    total: int = 0
    completed: int = 0
    error: Optional[str] = None
    payload: Optional[dict] = None


@dataclass
class JobStore:
    """Registry of jobs keyed by id plus a content-hash dedupe index."""

    cache_dir: Optional[Path] = None
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _jobs: dict = field(default_factory=dict)
    _by_key: dict = field(default_factory=dict)

    def lookup_key(self, key: str) -> Optional[str]:
        with self._lock:
            return self._by_key.get(key)

    def create(self, key: str, request: ScenarioRequest) -> JobRecord:
        with self._lock:
            job = JobRecord(job_id=uuid.uuid4().hex, request=request, total=request.n_reps)
            self._jobs[job.job_id] = job
            self._by_key[key] = job.job_id
            return job

    def get(self, job_id: str) -> Optional[JobRecord]:
        with self._lock:
            return self._jobs.get(job_id)

    def mark_running(self, job_id: str) -> None:
        with self._lock:
            self._jobs[job_id].status = "running"

    def advance(self, job_id: str, done_reps: int) -> None:
        with self._lock:
            self._jobs[job_id].completed += done_reps

    def finish(self, job_id: str, payload: dict) -> None:
        with self._lock:
            job = self._jobs[job_id]
            job.status = "done"
            job.payload = payload
            job.completed = job.total

    def fail(self, job_id: str, error: str) -> None:
        with self._lock:
            job = self._jobs[job_id]
            job.status = "failed"
            job.error = error

    def cached_payload(self, key: str) -> Optional[dict]:
        if self.cache_dir is None:
            return None
        path = self.cache_dir / f"{key}.json"
        if path.exists():
            return json.loads(path.read_text())
        return None

    def persist_payload(self, key: str, payload: dict) -> None:
        if self.cache_dir is None:
            return
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        (self.cache_dir / f"{key}.json").write_text(json.dumps(payload, sort_keys=True))


def _cache_key(request: ScenarioRequest, panel_digest: str) -> str:
    body = json.dumps(request.cache_key_payload(), sort_keys=True)
    return hashlib.sha256(f"{body}|{panel_digest}".encode("utf-8")).hexdigest()


def _summary_dict(summary) -> dict:
    return {
        "n_reps": summary.n_reps,
        "truth": summary.truth,
        "bias": summary.bias,
        "std_bias": summary.std_bias,
        "rel_bias_pct": summary.rel_bias_pct,
        "var_model": summary.var_model,
        "var_empirical": summary.var_empirical,
        "rmse": summary.rmse,
        "type1": summary.type1_rate,
        "typeS": summary.typeS_rate,
        "coverage": summary.coverage,
    }


def build_result_payload(request: ScenarioRequest, result) -> dict:
    panels = []
    summaries = {}
    for policy in ("primary", "secondary"):
        if policy in result.summaries:
            summaries[policy] = _summary_dict(result.summaries[policy])
            panels.extend(summary_panels(result.summaries[policy], policy))
    return {
        "scenario": request.cache_key_payload(),
        "summaries": summaries,
        "panels": panels,
        "n_reps": result.n_reps,
        "n_failed": result.n_failed,
        "fail_rate": result.fail_rate,
    }


def create_app(
    panel: Optional[Panel] = None,
    *,
    workers: int = 1,
    cache_dir: Optional[str] = None,
    store: Optional[JobStore] = None,
) -> FastAPI:
    """Build the service around one null panel (default: synthetic)."""
    panel = panel or synth_panel(SynthConfig())
    summary = panel_summary(panel)
    panel_digest = panel.digest()
    store = store or JobStore(cache_dir=Path(cache_dir) if cache_dir else None)
    executor = ThreadPoolExecutor(max_workers=1)

    app = FastAPI(title="copolicy scenario service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.panel = panel

    @app.exception_handler(RequestValidationError)
    async def validation_to_400(request: Request, exc: RequestValidationError):
        detail = [{"field": ".".join(str(p) for p in err["loc"] if p != "body"),
                   "message": err["msg"]} for err in exc.errors()]
        return JSONResponse(status_code=400, content={"detail": detail})

    def semantic_check(req: ScenarioRequest) -> None:
        if req.n_treated > panel.n_units:
            raise HTTPException(status_code=400, detail=[{
                "field": "n_treated",
                "message": f"n_treated={req.n_treated} exceeds the panel's {panel.n_units} units",
            }])
        try:
            scenario = req.scenario()
            enactment_window(scenario.gap, *panel.year_range)
        except InfeasibleWindow as exc:
            raise HTTPException(status_code=400, detail=[{"field": "gap", "message": str(exc)}])
        except CopolicyError as exc:
            raise HTTPException(status_code=400, detail=[{"field": "scenario", "message": str(exc)}])

    def execute(job_id: str, req: ScenarioRequest, key: str) -> None:
        store.mark_running(job_id)
        try:
            result = run_scenario(req.scenario(), panel, workers=workers,
                                  progress=lambda k: store.advance(job_id, k),
                                  retain_records=False)
            payload = build_result_payload(req, result)
            store.persist_payload(key, payload)
            store.finish(job_id, payload)
        except Exception as exc:  # failures surface via job status
            store.fail(job_id, f"{type(exc).__name__}: {exc}")

    @app.post("/api/scenarios", status_code=202, response_model=JobSubmitted)
    def submit_scenario(req: ScenarioRequest) -> JobSubmitted:
        semantic_check(req)
        key = _cache_key(req, panel_digest)
        existing = store.lookup_key(key)
        if existing is not None:
            return JobSubmitted(job_id=existing)
        cached = store.cached_payload(key)
        job = store.create(key, req)
        if cached is not None:
            store.finish(job.job_id, cached)
        else:
            executor.submit(execute, job.job_id, req, key)
        return JobSubmitted(job_id=job.job_id)

    def job_status(job: JobRecord) -> JobStatus:
        fraction = job.completed / job.total if job.total else 0.0
        return JobStatus(job_id=job.job_id, status=job.status,
                         progress=JobProgress(completed=job.completed, total=job.total,
                                              fraction=fraction))

    @app.get("/api/scenarios/{job_id}", response_model=JobStatus)
    def get_status(job_id: str) -> JobStatus:
        job = store.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job id")
        return job_status(job)

    @app.get("/api/scenarios/{job_id}/results")
    def get_results(job_id: str):
        job = store.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job id")
        if job.status == "failed":
            raise HTTPException(status_code=409, detail={"status": "failed", "error": job.error})
        if job.status != "done":
            status = job_status(job)
            raise HTTPException(status_code=409, detail={
                "status": job.status, "progress": status.progress.model_dump()})
        return job.payload

    @app.get("/api/reference/thresholds")
    def get_thresholds():
        return REFERENCE_THRESHOLDS

    return app
