"""JSON-lines persistence for runs, candidates, labels, and VAD profiles.

All stores are append-only; candidate status is never persisted directly
but derived by replaying the label event log, so replaying from empty
always reconstructs the exact same statuses.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

from .alignment import TokenSpan
from .backends import InjectionRecord, TranscriptRun
from .detection import HallucinationCandidate
from .harms import HarmLabel, effective_labels
from .vad import VadProfile


class StoreError(Exception):
    pass


def append_jsonl(path: str | Path, record: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise StoreError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
    return records


def write_jsonl(path: str | Path, records: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


# --- transcript runs -------------------------------------------------------

def run_to_dict(run: TranscriptRun) -> dict:
    return {
        "segment_id": run.segment_id,
        "backend_id": run.backend_id,
        "run_tag": run.run_tag,
        "text": run.text,
        "created_at": run.created_at,
    }


def run_from_dict(record: dict) -> TranscriptRun:
    return TranscriptRun(
        record["segment_id"],
        record["backend_id"],
        record["run_tag"],
        record["text"],
        record.get("created_at", ""),
    )


class RunStore:
    """One JSON-lines file per backend under a runs/ directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.Lock()

    def _runs_path(self, backend_id: str) -> Path:
        return self.root / f"{backend_id}.jsonl"

    def _injections_path(self, backend_id: str) -> Path:
        return self.root / f"{backend_id}.injections.jsonl"

    def save_runs(self, backend_id: str, runs: list[TranscriptRun]) -> None:
        ordered = sorted(runs, key=lambda r: (r.segment_id, r.run_tag))
        write_jsonl(self._runs_path(backend_id), [run_to_dict(r) for r in ordered])

    def append_run(self, run: TranscriptRun) -> None:
        with self._lock:
            append_jsonl(self._runs_path(run.backend_id), run_to_dict(run))

    def load_runs(self, backend_id: str) -> list[TranscriptRun]:
        return [run_from_dict(r) for r in read_jsonl(self._runs_path(backend_id))]

    def save_injections(self, backend_id: str, records: list[InjectionRecord]) -> None:
        write_jsonl(
            self._injections_path(backend_id),
            [
                {
                    "segment_id": r.segment_id,
                    "run_tag": r.run_tag,
                    "injected": r.injected,
                    "injected_span": list(r.injected_span) if r.injected_span else None,
                    "category": r.category,
                }
                for r in sorted(records, key=lambda r: (r.segment_id, r.run_tag))
            ],
        )

    def load_injections(self, backend_id: str) -> list[InjectionRecord]:
        return [
            InjectionRecord(
                r["segment_id"],
                r["run_tag"],
                r["injected"],
                tuple(r["injected_span"]) if r.get("injected_span") else None,
                r.get("category"),
            )
            for r in read_jsonl(self._injections_path(backend_id))
        ]


# --- candidates ------------------------------------------------------------

def _span_to_dict(span: TokenSpan) -> dict:
    return {"start": span.start, "length": span.length, "text": span.text}


def candidate_to_dict(candidate: HallucinationCandidate) -> dict:
    return {
        "candidate_id": candidate.candidate_id,
        "segment_id": candidate.segment_id,
        "backend_id": candidate.backend_id,
        "run_pair": list(candidate.run_pair),
        "flagged_spans": {
            tag: [_span_to_dict(s) for s in spans]
            for tag, spans in sorted(candidate.flagged_spans.items())
        },
        "signals": sorted(candidate.signals),
        "created_at": candidate.created_at,
    }


def candidate_from_dict(record: dict) -> HallucinationCandidate:
    return HallucinationCandidate(
        candidate_id=record["candidate_id"],
        segment_id=record["segment_id"],
        backend_id=record["backend_id"],
        run_pair=tuple(record["run_pair"]),
        flagged_spans={
            tag: [TokenSpan(s["start"], s["length"], s["text"]) for s in spans]
            for tag, spans in record["flagged_spans"].items()
        },
        signals=frozenset(record["signals"]),
        created_at=record.get("created_at", ""),
    )


class CandidateStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def save(self, candidates: list[HallucinationCandidate]) -> None:
        ordered = sorted(candidates, key=lambda c: c.candidate_id)
        write_jsonl(self.path, [candidate_to_dict(c) for c in ordered])

    def append(self, candidate: HallucinationCandidate) -> None:
        with self._lock:
            append_jsonl(self.path, candidate_to_dict(candidate))

    def load(self) -> dict[str, HallucinationCandidate]:
        candidates: dict[str, HallucinationCandidate] = {}
        for record in read_jsonl(self.path):
            candidate = candidate_from_dict(record)
            candidates[candidate.candidate_id] = candidate
        return candidates


# --- labels ----------------------------------------------------------------

def label_to_dict(label: HarmLabel) -> dict:
    return {
        "candidate_id": label.candidate_id,
        "reviewer_id": label.reviewer_id,
        "confirmed": label.confirmed,
        "categories": sorted(label.categories),
        "note": label.note,
        "labeled_at": label.labeled_at,
    }


def label_from_dict(record: dict) -> HarmLabel:
    return HarmLabel(
        candidate_id=record["candidate_id"],
        reviewer_id=record["reviewer_id"],
        confirmed=record["confirmed"],
        categories=frozenset(record.get("categories", [])),
        note=record.get("note", ""),
        labeled_at=record.get("labeled_at", ""),
    )


class LabelLog:
    """Append-only adjudication event log; single-writer appends."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def append(self, label: HarmLabel) -> None:
        with self._lock:
            append_jsonl(self.path, label_to_dict(label))

    def load(self) -> list[HarmLabel]:
        return [label_from_dict(r) for r in read_jsonl(self.path)]


def record_label(
    candidates: dict[str, HallucinationCandidate],
    label_log: LabelLog,
    label: HarmLabel,
    registered_reviewers: set[str],
) -> str:
    """Append an adjudication event and update the candidate's status.

    The candidate must exist and the reviewer must be registered via
    configuration. Relabeling is allowed; the event log keeps every event
    and the latest wins on replay.
    """
    if label.candidate_id not in candidates:
        raise KeyError(f"unknown candidate '{label.candidate_id}'")
    if label.reviewer_id not in registered_reviewers:
        raise PermissionError(f"unknown reviewer '{label.reviewer_id}'")
    label_log.append(label)
    status = "confirmed" if label.confirmed else "rejected"
    candidates[label.candidate_id].status = status
    return status


def apply_labels(
    candidates: dict[str, HallucinationCandidate], labels: list[HarmLabel]
) -> dict[str, HallucinationCandidate]:
    """Replay the label log onto candidates, setting effective statuses."""
    for candidate in candidates.values():
        candidate.status = "pending"
    for candidate_id, label in effective_labels(labels).items():
        if candidate_id in candidates:
            candidates[candidate_id].status = "confirmed" if label.confirmed else "rejected"
    return candidates


def confirmed_segment_ids(candidates: dict[str, HallucinationCandidate]) -> set[str]:
    return {c.segment_id for c in candidates.values() if c.status == "confirmed"}


# --- VAD profiles ----------------------------------------------------------

def vad_profile_to_dict(profile: VadProfile) -> dict:
    return {
        "segment_id": profile.segment_id,
        "total_duration": profile.total_duration,
        "nonvocal_duration": profile.nonvocal_duration,
        "nonvocal_share": profile.nonvocal_share,
        "vocal_intervals": [list(iv) for iv in profile.vocal_intervals],
    }


def vad_profile_from_dict(record: dict) -> VadProfile:
    return VadProfile(
        segment_id=record["segment_id"],
        total_duration=record["total_duration"],
        nonvocal_duration=record["nonvocal_duration"],
        nonvocal_share=record["nonvocal_share"],
        vocal_intervals=tuple(tuple(iv) for iv in record["vocal_intervals"]),
    )
