"""Pipeline orchestration: ingest, VAD, transcribe, detect, analyze, report.

Stages are resumable: each records a content hash of its inputs, and a
rerun skips any stage whose inputs are unchanged and whose outputs still
exist. The VAD stage runs before transcription because the mock backend
keys its injection probability on each segment's measured non-vocal share.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import vad as vad_module
from .audio import read_wav
from .backends import (
    BackendDescriptor,
    BatchResult,
    HttpBackend,
    MockBackend,
    MockConfig,
    batch_transcribe,
)
from .corpus import Corpus, compute_features, load_manifest, save_manifest
from .detection import DetectionConfig, detect_candidate, stability_report
from .harms import HarmLabel
from .report import build_report_data, export_report
from .stats import (
    MatchSpec,
    RegressionSpec,
    StatsError,
    design_matrix,
    fit_logistic,
    format_regression_table,
    mahalanobis_match,
)
from .stores import (
    CandidateStore,
    LabelLog,
    RunStore,
    apply_labels,
    read_jsonl,
    vad_profile_from_dict,
    vad_profile_to_dict,
    write_jsonl,
)

log = logging.getLogger(__name__)

STAGES = ("ingest", "vad", "transcribe", "detect", "autolabel", "analyze", "report")

SIMULATOR_REVIEWER = "simulator"

# fixed timestamp for oracle-derived labels so reruns are byte-identical
_EPOCH = "1970-01-01T00:00:00+00:00"


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}': {message}")
        self.stage = stage


@dataclass
class PipelineConfig:
    manifest: str
    output_dir: str
    backends: list[BackendDescriptor]
    run_tags: list[str]
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    vad_profile: str = "strict"
    regressions: list[RegressionSpec] = field(default_factory=list)
    matches: dict[str, MatchSpec] = field(default_factory=dict)
    mock: MockConfig | None = None
    reviewers: list[str] = field(default_factory=lambda: ["default"])
    seed: int = 0
    auto_label: bool = False
    parallelism: int = 4
    host: str = "127.0.0.1"
    port: int = 8765
    # re-check workflows: a run tag may cover only a segment subset, either
    # a seeded random sample (int) or an explicit segment-id list
    tag_subsets: dict[str, int | list[str]] = field(default_factory=dict)
    # narrow which tags the transcribe stage tops up (None = all run_tags)
    transcribe_tags: list[str] | None = None

    def __post_init__(self) -> None:
        if len(self.run_tags) < 2:
            raise ValueError("detection needs paired runs: configure at least 2 run_tags")
        if len(set(self.run_tags)) != len(self.run_tags):
            raise ValueError("run_tags must be unique")
        ids = [b.backend_id for b in self.backends]
        if len(set(ids)) != len(ids):
            raise ValueError("backend_id values must be unique")
        unknown_subset_tags = set(self.tag_subsets) - set(self.run_tags)
        if unknown_subset_tags:
            raise ValueError(f"tag_subsets for unknown run tags: {sorted(unknown_subset_tags)}")
        if self.transcribe_tags is not None:
            unknown = set(self.transcribe_tags) - set(self.run_tags)
            if unknown:
                raise ValueError(f"transcribe_tags not in run_tags: {sorted(unknown)}")
        if any(b.kind == "mock" for b in self.backends) and self.mock is None:
            self.mock = MockConfig(base_seed=self.seed)
        if self.auto_label and SIMULATOR_REVIEWER not in self.reviewers:
            self.reviewers.append(SIMULATOR_REVIEWER)

    def run_pairs(self) -> list[tuple[str, str]]:
        return list(zip(self.run_tags, self.run_tags[1:]))

    def segments_for_tag(self, tag: str, all_segment_ids: list[str]) -> list[str]:
        """Segment ids covered by a run tag (seeded sample for int subsets)."""
        subset = self.tag_subsets.get(tag)
        if subset is None:
            return list(all_segment_ids)
        if isinstance(subset, int):
            import numpy as np

            rng = np.random.default_rng(
                int.from_bytes(
                    hashlib.sha256(f"{self.seed}|subset|{tag}".encode()).digest()[:8], "big"
                )
            )
            size = min(subset, len(all_segment_ids))
            picked = rng.choice(len(all_segment_ids), size=size, replace=False)
            return sorted(all_segment_ids[i] for i in picked)
        return sorted(set(subset) & set(all_segment_ids))


def _resolve(base: Path, value: str) -> str:
    path = Path(value)
    return str(path if path.is_absolute() else base / path)


def load_config(path: str | Path) -> PipelineConfig:
    """Read a pipeline config JSON, resolving paths relative to the file."""
    path = Path(path)
    raw = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent
    backends = [BackendDescriptor(**b) for b in raw.get("backends", [])]
    mock = MockConfig(**raw["mock"]) if raw.get("mock") else None
    detection = DetectionConfig(**raw.get("detection", {}))
    regressions = [
        RegressionSpec(
            covariates=tuple(r["covariates"]),
            tolerance=r.get("tolerance", 1e-8),
            max_iterations=r.get("max_iterations", 50),
            name=r.get("name", f"regression_{i}"),
        )
        for i, r in enumerate(raw.get("regressions", []))
    ]
    matches = {
        m.get("name", f"match_{i}"): MatchSpec(
            covariates=tuple(m["covariates"]), caliper=m.get("caliper", 0.20)
        )
        for i, m in enumerate(raw.get("matches", []))
    }
    return PipelineConfig(
        manifest=_resolve(base, raw["manifest"]),
        output_dir=_resolve(base, raw["output_dir"]),
        backends=backends,
        run_tags=list(raw["run_tags"]),
        detection=detection,
        vad_profile=raw.get("vad_profile", "strict"),
        regressions=regressions,
        matches=matches,
        mock=mock,
        reviewers=list(raw.get("reviewers", ["default"])),
        seed=raw.get("seed", 0),
        auto_label=raw.get("auto_label", False),
        parallelism=raw.get("parallelism", 4),
        host=raw.get("host", "127.0.0.1"),
        port=raw.get("port", 8765),
        tag_subsets=dict(raw.get("tag_subsets", {})),
    )


# --- stage plumbing ---------------------------------------------------------

def _hash_bytes(*chunks: bytes) -> str:
    digest = hashlib.sha256()
    for chunk in chunks:
        digest.update(chunk)
        digest.update(b"\x00")
    return digest.hexdigest()


def _hash_file(path: Path) -> bytes:
    return hashlib.sha256(path.read_bytes()).digest()


def _hash_json(value: object) -> bytes:
    return json.dumps(value, sort_keys=True, default=str).encode("utf-8")


def _stage_state_path(output_dir: Path, stage: str) -> Path:
    return output_dir / ".stages" / f"{stage}.json"


def _stage_fresh(output_dir: Path, stage: str, input_hash: str, outputs: list[Path]) -> bool:
    state_path = _stage_state_path(output_dir, stage)
    if not state_path.exists():
        return False
    try:
        state = json.loads(state_path.read_text())
    except json.JSONDecodeError:
        return False
    return state.get("input_hash") == input_hash and all(p.exists() for p in outputs)


def _mark_stage(output_dir: Path, stage: str, input_hash: str, outputs: list[Path]) -> None:
    state_path = _stage_state_path(output_dir, stage)
    state_path.parent.mkdir(parents=True, exist_ok=True)
    state_path.write_text(
        json.dumps(
            {"input_hash": input_hash, "outputs": [str(p) for p in outputs]},
            indent=2,
            sort_keys=True,
        )
    )


@dataclass
class PipelineResult:
    output_dir: Path
    ran: list[str]
    skipped: list[str]


# --- pipeline paths ---------------------------------------------------------

def corpus_path(output_dir: Path) -> Path:
    return output_dir / "corpus" / "corpus.jsonl"


def vad_path(output_dir: Path) -> Path:
    return output_dir / "vad" / "profiles.jsonl"


def candidates_path(output_dir: Path) -> Path:
    return output_dir / "candidates" / "candidates.jsonl"


def labels_path(output_dir: Path) -> Path:
    return output_dir / "labels" / "labels.jsonl"


def analysis_path(output_dir: Path) -> Path:
    return output_dir / "stats" / "analysis.json"


def report_dir(output_dir: Path) -> Path:
    return output_dir / "report"


def _load_corpus(output_dir: Path) -> Corpus:
    return load_manifest(corpus_path(output_dir), check_audio=False)


def _load_features(output_dir: Path, corpus: Corpus):
    features = compute_features(corpus)
    profiles = [vad_profile_from_dict(r) for r in read_jsonl(vad_path(output_dir))]
    for profile in profiles:
        if profile.segment_id in features:
            features[profile.segment_id] = features[profile.segment_id].with_nonvocal(
                profile.nonvocal_duration
            )
    return features


# --- stages ------------------------------------------------------------------

def _stage_ingest(config: PipelineConfig, output_dir: Path) -> None:
    corpus = load_manifest(config.manifest)
    # canonical copy with audio paths resolved against the source manifest
    base = Path(config.manifest).parent
    resolved = Corpus(speakers=dict(corpus.speakers))
    for segment_id in corpus.segment_ids():
        segment = corpus.segments[segment_id]
        resolved.segments[segment_id] = replace(
            segment, audio_path=_resolve(base, segment.audio_path)
        )
        resolved.ground_truths[segment_id] = corpus.ground_truths[segment_id]
    save_manifest(resolved, corpus_path(output_dir))


def _stage_vad(config: PipelineConfig, output_dir: Path) -> None:
    corpus = _load_corpus(output_dir)
    cfg = vad_module.profile_for_name(config.vad_profile)
    records = []
    for segment_id in corpus.segment_ids():
        segment = corpus.segments[segment_id]
        samples, rate = read_wav(segment.audio_path)
        profile = vad_module.vad_profile(samples, rate, cfg, segment_id)
        records.append(vad_profile_to_dict(profile))
    write_jsonl(vad_path(output_dir), records)


def _stage_transcribe(config: PipelineConfig, output_dir: Path) -> None:
    """Transcribe every configured (segment, run_tag) pair.

    Mock backends regenerate all rows (pure and cheap). HTTP backends top
    up: rows already in the run store are kept, only missing pairs hit the
    backend, so growing run_tags later (the longitudinal re-check) never
    re-pays for existing vendor calls.
    """
    corpus = _load_corpus(output_dir)
    features = _load_features(output_dir, corpus)
    store = RunStore(output_dir / "runs")
    all_ids = corpus.segment_ids()
    tags = config.transcribe_tags or config.run_tags
    for descriptor in config.backends:
        if descriptor.kind == "mock":
            backend = MockBackend(descriptor, config.mock, corpus.ground_truths, features)
            merged = {}
        else:
            backend = HttpBackend(descriptor)
            merged = {
                (r.segment_id, r.run_tag): r for r in store.load_runs(descriptor.backend_id)
            }
        parallelism = min(config.parallelism, descriptor.parallelism_limit)
        failures = []
        aborted = False
        for tag in tags:
            wanted = [
                sid
                for sid in config.segments_for_tag(tag, all_ids)
                if (sid, tag) not in merged
            ]
            if not wanted:
                continue
            segments = [corpus.segments[sid] for sid in wanted]
            result: BatchResult = batch_transcribe(backend, segments, [tag], parallelism)
            for run in result.runs:
                merged[(run.segment_id, run.run_tag)] = run
            failures.extend(result.failures)
            aborted = aborted or result.aborted
        store.save_runs(descriptor.backend_id, list(merged.values()))
        if failures:
            write_jsonl(
                output_dir / "runs" / f"{descriptor.backend_id}.failures.jsonl",
                [
                    {"segment_id": f.segment_id, "run_tag": f.run_tag, "error": f.error}
                    for f in failures
                ],
            )
        if isinstance(backend, MockBackend):
            store.save_injections(descriptor.backend_id, backend.injection_records)
        if aborted:
            raise PipelineError(
                "transcribe",
                f"backend '{descriptor.backend_id}' aborted: {len(failures)} failures",
            )


def _stage_detect(config: PipelineConfig, output_dir: Path) -> None:
    corpus = _load_corpus(output_dir)
    store = RunStore(output_dir / "runs")
    candidates = []
    for descriptor in config.backends:
        runs = {(r.segment_id, r.run_tag): r for r in store.load_runs(descriptor.backend_id)}
        for tag_a, tag_b in config.run_pairs():
            for segment_id in corpus.segment_ids():
                run_a = runs.get((segment_id, tag_a))
                run_b = runs.get((segment_id, tag_b))
                if run_a is None or run_b is None:
                    continue
                candidate = detect_candidate(
                    corpus.ground_truths[segment_id], run_a, run_b, config.detection
                )
                if candidate is not None:
                    candidates.append(candidate)
    CandidateStore(candidates_path(output_dir)).save(candidates)


def _stage_autolabel(config: PipelineConfig, output_dir: Path) -> None:
    """Label every candidate from the injection oracle (simulation only).

    Candidates whose segment really had an injection are confirmed with
    the injected category; detector false positives are rejected. Human
    labels do not belong in this stage; it rewrites the label log.
    """
    store = RunStore(output_dir / "runs")
    candidates = CandidateStore(candidates_path(output_dir)).load()
    injections: dict[tuple[str, str, str], object] = {}
    for descriptor in config.backends:
        if descriptor.kind != "mock":
            continue
        for record in store.load_injections(descriptor.backend_id):
            injections[(descriptor.backend_id, record.segment_id, record.run_tag)] = record

    labels = []
    for candidate_id in sorted(candidates):
        candidate = candidates[candidate_id]
        record = injections.get(
            (candidate.backend_id, candidate.segment_id, candidate.run_pair[0])
        )
        if record is None:
            continue
        confirmed = bool(record.injected)
        categories = sorted({record.category}) if confirmed and record.category else []
        labels.append(
            {
                "candidate_id": candidate_id,
                "reviewer_id": SIMULATOR_REVIEWER,
                "confirmed": confirmed,
                "categories": categories,
                "note": "auto-labeled from injection oracle",
                "labeled_at": _EPOCH,
            }
        )
    write_jsonl(labels_path(output_dir), labels)


def _covariate_rows(corpus: Corpus, features, covariates: tuple[str, ...]):
    """Treated (aphasia) and control covariate matrices for matching."""
    import numpy as np

    from .stats import covariate_value

    treated, control = [], []
    treated_ids, control_ids = [], []
    for segment_id in corpus.segment_ids():
        speaker = corpus.speakers[corpus.segments[segment_id].speaker_id]
        try:
            row = [covariate_value(c, speaker, features[segment_id]) for c in covariates]
        except (StatsError, TypeError):
            continue  # missing demographics
        if None in row:
            continue
        if speaker.group == "aphasia":
            treated.append(row)
            treated_ids.append(segment_id)
        else:
            control.append(row)
            control_ids.append(segment_id)
    return (
        np.asarray(treated, dtype=float),
        np.asarray(control, dtype=float),
        treated_ids,
        control_ids,
    )


def _stage_analyze(config: PipelineConfig, output_dir: Path) -> None:
    from .report import match_section, rates_section, regression_section
    from .stats import group_rate_comparison

    corpus = _load_corpus(output_dir)
    features = _load_features(output_dir, corpus)
    candidates = CandidateStore(candidates_path(output_dir)).load()
    labels = LabelLog(labels_path(output_dir)).load()
    apply_labels(candidates, labels)
    confirmed = {c.segment_id for c in candidates.values() if c.status == "confirmed"}

    analysis: dict = {}
    try:
        analysis["rates"] = rates_section(group_rate_comparison(confirmed, corpus))
    except ValueError as exc:
        analysis["rates"] = {"status": "absent", "reason": str(exc)}

    regressions: dict[str, dict] = {}
    stats_dir = output_dir / "stats"
    stats_dir.mkdir(parents=True, exist_ok=True)
    for spec in config.regressions:
        try:
            dm = design_matrix(corpus, features, confirmed, spec)
            result = fit_logistic(dm.X, dm.y, spec)
            regressions[spec.name] = regression_section(result)
            regressions[spec.name]["dropped_missing_demographics"] = dm.dropped_missing
            (stats_dir / f"regression_{spec.name}.txt").write_text(
                format_regression_table(result) + "\n"
            )
        except StatsError as exc:
            regressions[spec.name] = {"status": "absent", "reason": str(exc)}
    analysis["regressions"] = regressions

    matches: dict[str, dict] = {}
    for name, spec in config.matches.items():
        try:
            treated, control, t_ids, c_ids = _covariate_rows(corpus, features, spec.covariates)
            if len(treated) == 0 or len(control) == 0:
                raise StatsError("one of the arms is empty")
            result = mahalanobis_match(treated, control, spec)
            matches[name] = match_section(result)
            matched_ids = sorted(
                [t_ids[p.treated_index] for p in result.pairs]
                + [c_ids[p.control_index] for p in result.pairs]
            )
            matches[name]["matched_segment_ids"] = matched_ids
            if matched_ids:
                try:
                    matches[name]["rates"] = rates_section(
                        group_rate_comparison(confirmed, corpus, set(matched_ids))
                    )
                except ValueError as exc:
                    matches[name]["rates"] = {"status": "absent", "reason": str(exc)}
        except (StatsError, ValueError) as exc:
            matches[name] = {"status": "absent", "reason": str(exc)}
    analysis["matching"] = matches

    pairs = config.run_pairs()
    if len(pairs) >= 2:
        store = RunStore(output_dir / "runs")
        sections = {}
        for descriptor in config.backends:
            runs = store.load_runs(descriptor.backend_id)
            evaluated: dict[tuple[str, str], set[str]] = {}
            for tag_a, tag_b in pairs:
                have_a = {r.segment_id for r in runs if r.run_tag == tag_a}
                have_b = {r.segment_id for r in runs if r.run_tag == tag_b}
                evaluated[(tag_a, tag_b)] = have_a & have_b
            # subset re-checks leave later pairs with fewer segments;
            # persistence is only meaningful on the common subset
            common = set.intersection(*evaluated.values()) if evaluated else set()
            restricted = any(evaluated[pair] != common for pair in evaluated)
            flagged: dict[tuple[str, str], set[str]] = {pair: set() for pair in pairs}
            for candidate in candidates.values():
                if candidate.backend_id != descriptor.backend_id:
                    continue
                flagged.setdefault(tuple(candidate.run_pair), set()).add(candidate.segment_id)
            if not common:
                sections[descriptor.backend_id] = {
                    "status": "absent", "reason": "no segments evaluated under every pair",
                }
                continue
            rep = stability_report(
                {pair: common for pair in evaluated},
                {pair: hits & common for pair, hits in flagged.items()},
                corpus,
            )
            sections[descriptor.backend_id] = {
                "n_pairs": rep.n_pairs,
                "evaluated": len(rep.per_segment),
                "persistent": len(rep.persistent_ids),
                "summary": rep.summary,
                "restricted_to_common_subset": restricted,
                "by_group": {
                    g: {"evaluated": s.evaluated, "flagged_any": s.flagged_any,
                        "persistent": s.persistent}
                    for g, s in rep.by_group.items()
                },
            }
        analysis["stability"] = sections
    else:
        analysis["stability"] = {"status": "absent", "reason": "fewer than two run pairs"}

    analysis_path(output_dir).write_text(
        json.dumps(analysis, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def assemble_report(output_dir: Path) -> dict:
    """Build the full report dict from on-disk artifacts (also used by the
    HTTP service so served reports match written ones)."""
    corpus = _load_corpus(output_dir) if corpus_path(output_dir).exists() else None
    features = _load_features(output_dir, corpus) if corpus is not None else None
    candidates = (
        CandidateStore(candidates_path(output_dir)).load()
        if candidates_path(output_dir).exists()
        else None
    )
    labels: list[HarmLabel] | None = None
    if labels_path(output_dir).exists():
        labels = LabelLog(labels_path(output_dir)).load()
    if candidates is not None and labels is not None:
        apply_labels(candidates, labels)

    report = build_report_data(corpus, features, candidates, labels)
    if analysis_path(output_dir).exists():
        analysis = json.loads(analysis_path(output_dir).read_text())
        for section in ("rates", "regressions", "matching", "stability"):
            if section in analysis:
                report["sections"][section] = analysis[section]
    return report


def _stage_report(config: PipelineConfig, output_dir: Path) -> None:
    export_report(assemble_report(output_dir), report_dir(output_dir))


# --- driver -------------------------------------------------------------------

def run_pipeline(config: PipelineConfig, stages: tuple[str, ...] | None = None) -> PipelineResult:
    """Run the requested stages (default: all), skipping fresh ones."""
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    wanted = stages or STAGES
    unknown = set(wanted) - set(STAGES)
    if unknown:
        raise ValueError(f"unknown stages: {sorted(unknown)}")

    manifest = Path(config.manifest)
    if not manifest.exists():
        raise PipelineError("ingest", f"manifest not found: {manifest}")

    detection_cfg = _hash_json(vars(config.detection))
    mock_cfg = _hash_json(
        {**{k: v for k, v in vars(config.mock).items() if k != "phrase_pools"},
         "pools": sorted(config.mock.phrase_pools)} if config.mock else None
    )

    def stage_hash(stage: str) -> str:
        if stage == "ingest":
            return _hash_bytes(_hash_file(manifest))
        if stage == "vad":
            return _hash_bytes(_hash_file(corpus_path(output_dir)),
                               _hash_json(config.vad_profile))
        if stage == "transcribe":
            return _hash_bytes(
                _hash_file(corpus_path(output_dir)),
                _hash_file(vad_path(output_dir)),
                _hash_json([vars(b) for b in config.backends]),
                _hash_json(config.run_tags),
                _hash_json(config.tag_subsets),
                _hash_json(config.transcribe_tags),
                mock_cfg,
                _hash_json(config.seed),
            )
        if stage == "detect":
            chunks = [
                _hash_file(output_dir / "runs" / f"{b.backend_id}.jsonl")
                for b in config.backends
                if (output_dir / "runs" / f"{b.backend_id}.jsonl").exists()
            ]
            return _hash_bytes(*chunks, detection_cfg)
        if stage == "autolabel":
            return _hash_bytes(
                _hash_file(candidates_path(output_dir)),
                *[
                    _hash_file(output_dir / "runs" / f"{b.backend_id}.injections.jsonl")
                    for b in config.backends
                    if (output_dir / "runs" / f"{b.backend_id}.injections.jsonl").exists()
                ],
            )
        if stage == "analyze":
            chunks = [_hash_file(candidates_path(output_dir))]
            if labels_path(output_dir).exists():
                chunks.append(_hash_file(labels_path(output_dir)))
            chunks.append(_hash_file(vad_path(output_dir)))
            chunks.append(_hash_json([vars(r) for r in config.regressions]))
            chunks.append(_hash_json({n: vars(m) for n, m in config.matches.items()}))
            return _hash_bytes(*chunks)
        if stage == "report":
            chunks = []
            for path in (corpus_path(output_dir), candidates_path(output_dir),
                         labels_path(output_dir), analysis_path(output_dir)):
                if path.exists():
                    chunks.append(_hash_file(path))
            return _hash_bytes(*chunks)
        raise ValueError(stage)

    outputs = {
        "ingest": [corpus_path(output_dir)],
        "vad": [vad_path(output_dir)],
        "transcribe": [output_dir / "runs" / f"{b.backend_id}.jsonl" for b in config.backends],
        "detect": [candidates_path(output_dir)],
        "autolabel": [labels_path(output_dir)],
        "analyze": [analysis_path(output_dir)],
        "report": [report_dir(output_dir) / "report.json", report_dir(output_dir) / "report.md"],
    }
    functions = {
        "ingest": _stage_ingest,
        "vad": _stage_vad,
        "transcribe": _stage_transcribe,
        "detect": _stage_detect,
        "autolabel": _stage_autolabel,
        "analyze": _stage_analyze,
        "report": _stage_report,
    }

    ran, skipped = [], []
    for stage in STAGES:
        if stage not in wanted:
            continue
        if stage == "autolabel" and not config.auto_label:
            continue
        input_hash = stage_hash(stage)
        if _stage_fresh(output_dir, stage, input_hash, outputs[stage]):
            log.info("stage %s: inputs unchanged, skipping", stage)
            skipped.append(stage)
            continue
        log.info("stage %s: running", stage)
        try:
            functions[stage](config, output_dir)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(stage, str(exc)) from exc
        _mark_stage(output_dir, stage, input_hash, outputs[stage])
        ran.append(stage)
    return PipelineResult(output_dir, ran, skipped)
