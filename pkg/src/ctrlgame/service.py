"""HTTP facade for uploading catalogues, launching solves, polling progress.

Solves run asynchronously on a bounded worker pool because real instances
can take minutes; clients poll the job until it is done and then fetch the
report. Specs and job records live as flat JSON files under the data
directory, so finished results survive a restart byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Any, Callable

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .catalogue import (
    OBJECTIVES,
    ControlCatalogue,
    enumerate_cases,
    parse_catalogue,
    serialize_catalogue,
)
from .errors import CtrlGameError, ParseError
from .report import build_report, report_to_json_obj
from .solver import parse_profile, profile_to_json_obj, solve, validate_profile
from .valuation import Budget

_RECORD_DUMP_ARGS = {"indent": 2, "sort_keys": False}


def _dump(obj: Any) -> str:
    return json.dumps(obj, **_RECORD_DUMP_ARGS)


class JobStore:
    """Flat-file persistence for specs and job records."""

    def __init__(self, root: Path):
        self.root = Path(root)
        (self.root / "specs").mkdir(parents=True, exist_ok=True)
        (self.root / "jobs").mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        # Anything still marked active was interrupted by a restart.
        for path in (self.root / "jobs").glob("*.json"):
            record = json.loads(path.read_text())
            if record.get("state") in ("queued", "running"):
                record["state"] = "failed"
                record["error"] = "interrupted by service restart"
                path.write_text(_dump(record))

    # -- specs --------------------------------------------------------------

    def put_spec(self, cat: ControlCatalogue) -> str:
        spec_id = cat.digest()
        path = self.root / "specs" / f"{spec_id}.json"
        with self._lock:
            if not path.exists():
                path.write_text(serialize_catalogue(cat, "json"))
        return spec_id

    def get_spec(self, spec_id: str) -> ControlCatalogue | None:
        path = self.root / "specs" / f"{spec_id}.json"
        if not path.exists():
            return None
        return parse_catalogue(path.read_text(), "json")

    # -- jobs ---------------------------------------------------------------

    def _job_path(self, job_id: str) -> Path:
        return self.root / "jobs" / f"{job_id}.json"

    def put_job(self, record: dict) -> None:
        path = self._job_path(record["job_id"])
        with self._lock:
            tmp = path.with_suffix(".tmp")
            tmp.write_text(_dump(record))
            tmp.replace(path)

    def get_job(self, job_id: str) -> dict | None:
        path = self._job_path(job_id)
        with self._lock:
            if not path.exists():
                return None
            return json.loads(path.read_text())

    def update_job(self, job_id: str, **fields) -> dict:
        with self._lock:
            path = self._job_path(job_id)
            record = json.loads(path.read_text())
            record.update(fields)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(_dump(record))
            tmp.replace(path)
            return record


def _error(status: int, message: str, **extra) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, **extra})


def create_app(
    data_dir: str | Path,
    *,
    workers: int = 2,
    cors_origins: tuple[str, ...] = ("*",),
    case_hook: Callable[[str, int, int], None] | None = None,
) -> FastAPI:
    """Build the API application.

    ``case_hook`` is called as ``(job_id, done, total)`` after every solved
    case; tests use it to observe or throttle progress.
    """
    store = JobStore(Path(data_dir))
    pool = ThreadPoolExecutor(max_workers=workers)
    app = FastAPI(title="ctrlgame service")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/api/specs", status_code=201)
    async def upload_spec(request: Request) -> Any:
        body = await request.body()
        content_type = request.headers.get("content-type", "").split(";")[0].strip()
        if content_type == "application/json":
            fmt = "json"
        elif content_type in ("text/csv", "application/csv"):
            fmt = "csv"
        else:
            head = body.lstrip()[:1]
            fmt = "json" if head in (b"{", b"[") else "csv"
        try:
            cat = parse_catalogue(body, fmt)
        except CtrlGameError as exc:
            detail = {"error": str(exc)}
            if isinstance(exc, ParseError):
                detail.update({"row": exc.row, "column": exc.column})
            return JSONResponse(status_code=400, content=detail)
        spec_id = store.put_spec(cat)
        cells = cat.uncertain_cells()
        case_count = 1
        for _, _, cell in cells:
            case_count *= len(cell.options)
        return {
            "spec_id": spec_id,
            "digest": spec_id,
            "assets": list(cat.assets),
            "objectives": list(OBJECTIVES),
            "controls": len(cat.controls),
            "mandatory": len(cat.mandatory_ids),
            "uncertain_cells": len(cells),
            "case_count": case_count,
        }

    def _run_job(job_id: str, cat: ControlCatalogue, budget: Budget, profile) -> None:
        try:
            store.update_job(job_id, state="running")

            def on_case(done: int, total: int) -> None:
                store.update_job(job_id, progress={"completed": done, "total": total})
                if case_hook is not None:
                    case_hook(job_id, done, total)

            outcome = solve(cat, budget, profile, on_case_done=on_case)
            doc = build_report(outcome, cat, budget, profile)
            store.update_job(
                job_id, state="done", result=report_to_json_obj(doc)
            )
        except Exception as exc:  # pragma: no cover - defensive
            store.update_job(job_id, state="failed", error=str(exc))

    @app.post("/api/jobs", status_code=202)
    async def create_job(request: Request) -> Any:
        try:
            payload = await request.json()
        except json.JSONDecodeError:
            return _error(422, "body must be JSON")
        if not isinstance(payload, dict):
            return _error(422, "body must be a JSON object")
        spec_id = payload.get("spec_id")
        if not isinstance(spec_id, str):
            return _error(422, "spec_id must be a string")
        cat = store.get_spec(spec_id)
        if cat is None:
            return _error(404, f"unknown spec {spec_id!r}")

        budget_raw = payload.get("budget")
        if isinstance(budget_raw, (int, float)) and not isinstance(budget_raw, bool):
            budget_raw = str(budget_raw)
        if not isinstance(budget_raw, str):
            return _error(422, "budget must be a decimal string or number")
        try:
            limit = Decimal(budget_raw)
        except InvalidOperation:
            return _error(422, f"budget {budget_raw!r} is not a decimal")
        if limit < 0:
            return _error(422, "budget must be non-negative")
        budget = Budget(limit)

        try:
            profile = parse_profile(json.dumps(payload.get("profile")))
            validate_profile(profile, cat)
        except (CtrlGameError, ValueError) as exc:
            return _error(422, f"invalid profile: {exc}")

        total = len(enumerate_cases(cat))
        job_id = uuid.uuid4().hex
        record = {
            "job_id": job_id,
            "spec_id": spec_id,
            "budget": budget_raw,
            "profile": profile_to_json_obj(profile),
            "state": "queued",
            "progress": {"completed": 0, "total": total},
            "error": None,
            "result": None,
        }
        store.put_job(record)
        pool.submit(_run_job, job_id, cat, budget, profile)
        return record

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str) -> Any:
        record = store.get_job(job_id)
        if record is None:
            return _error(404, f"unknown job {job_id!r}")
        return record

    @app.get("/api/jobs/{job_id}/report")
    def get_report(job_id: str) -> Any:
        record = store.get_job(job_id)
        if record is None:
            return _error(404, f"unknown job {job_id!r}")
        if record["state"] != "done":
            return _error(409, f"job is {record['state']}, not done")
        return Response(
            content=_dump(record["result"]) + "\n",
            media_type="application/json",
        )

    return app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="python -m ctrlgame.service", description="Run the HTTP service."
    )
    parser.add_argument("--host", default=os.environ.get("CTRLGAME_HOST", "127.0.0.1"))
    parser.add_argument(
        "--port", type=int, default=int(os.environ.get("CTRLGAME_PORT", "8321"))
    )
    parser.add_argument(
        "--data-dir", default=os.environ.get("CTRLGAME_DATA_DIR", "./ctrlgame-data")
    )
    parser.add_argument("--workers", type=int, default=2)
    args = parser.parse_args(argv)

    import uvicorn

    app = create_app(args.data_dir, workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")


if __name__ == "__main__":
    main()
