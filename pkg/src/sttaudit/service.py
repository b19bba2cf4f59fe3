"""HTTP service exposing candidates, audio, labels, and reports.

The service is the adjudication transport for the review UI: it never
mutates corpus, runs, flagged spans, or VAD artifacts - only label events
are appended. Every error body has the shape {"error": string}.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .alignment import normalize
from .detection import HallucinationCandidate
from .harms import HarmLabel, category_vocabulary, suggest_categories
from .pipeline import (
    PipelineConfig,
    assemble_report,
    candidates_path,
    corpus_path,
    labels_path,
)
from .stores import CandidateStore, LabelLog, RunStore, apply_labels
from .corpus import load_manifest


class LabelBody(BaseModel):
    reviewer_id: str
    confirmed: bool
    categories: list[str] = []
    note: str = ""
    labeled_at: str | None = None


class ServiceState:
    """Artifacts loaded once; label writes serialized through one lock."""

    def __init__(self, output_dir: str | Path, reviewers: set[str]):
        self.output_dir = Path(output_dir)
        self.reviewers = reviewers
        self.corpus = (
            load_manifest(corpus_path(self.output_dir), check_audio=False)
            if corpus_path(self.output_dir).exists()
            else None
        )
        self.candidates: dict[str, HallucinationCandidate] = (
            CandidateStore(candidates_path(self.output_dir)).load()
            if candidates_path(self.output_dir).exists()
            else {}
        )
        self.label_log = LabelLog(labels_path(self.output_dir))
        apply_labels(self.candidates, self.label_log.load())
        self.run_store = RunStore(self.output_dir / "runs")
        self._runs_cache: dict[str, dict[tuple[str, str], dict]] = {}
        self.write_lock = threading.Lock()

    def runs_for(self, backend_id: str) -> dict[tuple[str, str], dict]:
        if backend_id not in self._runs_cache:
            self._runs_cache[backend_id] = {
                (r.segment_id, r.run_tag): r
                for r in self.run_store.load_runs(backend_id)
            }
        return self._runs_cache[backend_id]


def _candidate_summary(candidate: HallucinationCandidate) -> dict:
    return {
        "candidate_id": candidate.candidate_id,
        "segment_id": candidate.segment_id,
        "backend_id": candidate.backend_id,
        "run_pair": list(candidate.run_pair),
        "signals": sorted(candidate.signals),
        "status": candidate.status,
    }


def _tokens_payload(text: str) -> list[dict]:
    return [{"surface": t.surface, "start": t.start, "end": t.end} for t in normalize(text)]


def create_app(
    output_dir: str | Path,
    reviewers: set[str] | None = None,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    state = ServiceState(output_dir, reviewers or {"default"})
    app = FastAPI(title="sttaudit review service")
    # the review UI may be served from another origin (static file host)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(Exception)
    async def error_handler(request: Request, exc: Exception):
        return JSONResponse(status_code=500, content={"error": str(exc)})

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    @app.get("/api/candidates")
    def list_candidates(status: str = "pending"):
        counts = {"pending": 0, "confirmed": 0, "rejected": 0}
        for candidate in state.candidates.values():
            counts[candidate.status] += 1
        # newest first: the store is append-ordered, so reverse it
        selected = [
            _candidate_summary(c)
            for c in reversed(list(state.candidates.values()))
            if status in ("all", c.status)
        ]
        return {"candidates": selected, "counts": counts}

    @app.get("/api/candidates/{candidate_id}")
    def candidate_detail(candidate_id: str):
        candidate = state.candidates.get(candidate_id)
        if candidate is None:
            return error(404, f"unknown candidate '{candidate_id}'")
        detail = _candidate_summary(candidate)
        truth = state.corpus.ground_truths.get(candidate.segment_id) if state.corpus else None
        detail["ground_truth"] = {
            "text": truth.text if truth else "",
            "tokens": _tokens_payload(truth.text) if truth else [],
        }
        runs_payload = []
        runs = state.runs_for(candidate.backend_id)
        flagged_texts = []
        for tag in candidate.run_pair:
            run = runs.get((candidate.segment_id, tag))
            spans = candidate.flagged_spans.get(tag, [])
            flagged_texts.extend(s.text for s in spans)
            runs_payload.append(
                {
                    "run_tag": tag,
                    "text": run.text if run else "",
                    "tokens": _tokens_payload(run.text) if run else [],
                    "flagged_spans": [
                        {"start": s.start, "length": s.length, "text": s.text} for s in spans
                    ],
                }
            )
        detail["runs"] = runs_payload
        detail["suggestions"] = [
            {"category": c, "score": s} for c, s in suggest_categories(" ".join(flagged_texts))
        ]
        detail["audio_url"] = f"/api/audio/{candidate.segment_id}"
        return detail

    @app.get("/api/audio/{segment_id}")
    def audio(segment_id: str):
        if state.corpus is None or segment_id not in state.corpus.segments:
            return error(404, f"unknown segment '{segment_id}'")
        path = Path(state.corpus.segments[segment_id].audio_path)
        if not path.exists():
            return error(404, f"audio file missing for segment '{segment_id}'")
        data = path.read_bytes()
        return Response(content=data, media_type="audio/wav",
                        headers={"Content-Length": str(len(data))})

    @app.post("/api/candidates/{candidate_id}/label")
    def post_label(candidate_id: str, body: LabelBody):
        candidate = state.candidates.get(candidate_id)
        if candidate is None:
            return error(404, f"unknown candidate '{candidate_id}'")
        if body.reviewer_id not in state.reviewers:
            return error(403, f"unknown reviewer '{body.reviewer_id}'")
        try:
            label = HarmLabel(
                candidate_id=candidate_id,
                reviewer_id=body.reviewer_id,
                confirmed=body.confirmed,
                categories=frozenset(body.categories),
                note=body.note,
                labeled_at=body.labeled_at or datetime.now(timezone.utc).isoformat(),
            )
        except ValueError as exc:
            return error(400, str(exc))
        with state.write_lock:
            state.label_log.append(label)
            candidate.status = "confirmed" if label.confirmed else "rejected"
        return {"candidate_id": candidate_id, "status": candidate.status}

    @app.get("/api/categories")
    def categories():
        return {
            "categories": [
                {"category": info.category, "broad_group": info.broad_group}
                for info in category_vocabulary()
            ]
        }

    @app.get("/api/report")
    def report():
        return assemble_report(state.output_dir)

    if ui_dir is not None:
        ui_path = Path(ui_dir)
        index = ui_path / "index.html"
        dist = ui_path / "dist"
        if dist.is_dir():
            app.mount("/dist", StaticFiles(directory=dist), name="ui-dist")
        if index.exists():
            @app.get("/", include_in_schema=False)
            def ui_index():
                return FileResponse(index, media_type="text/html")

    return app


def serve(config: PipelineConfig, ui_dir: str | Path | None = None) -> None:
    """Run the review service until interrupted."""
    import uvicorn

    app = create_app(config.output_dir, set(config.reviewers), ui_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
