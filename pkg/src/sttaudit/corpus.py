"""Audit corpus: speakers, audio segments, ground truths, derived features.

The corpus is loaded from a JSON-lines manifest with two record kinds,
``{"kind": "speaker", ...}`` and ``{"kind": "segment", ...}`` (the segment
record carries the ground-truth transcript text). A corpus is immutable
after load and safe for concurrent readers.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import audio
from .alignment import token_surfaces

log = logging.getLogger(__name__)

GROUPS = ("aphasia", "control")
GENDERS = ("female", "male", "other")
RACES = ("white", "african_american", "other")

# header duration must agree with the manifest within this tolerance
DURATION_TOLERANCE_S = 0.001

MAX_AGE = 130
MAX_YEARS_EDUCATION = 30


class ManifestError(Exception):
    """Manifest cannot be loaded; message lists every offending line."""


@dataclass(frozen=True)
class Speaker:
    """One speaker and the demographic covariates used by the analysis.

    Demographic fields are optional: a None means the covariate is missing
    and the speaker's segments drop out of demographic-conditioned models.
    employment_status is accepted from the manifest but ignored by every
    analysis.
    """

    speaker_id: str
    group: str
    gender: str | None = None
    age: int | None = None
    race: str | None = None
    years_education: int | None = None
    english_first_language: bool | None = None
    vision_normal: bool | None = None
    hearing_normal: bool | None = None
    employment_status: str | None = None

    def __post_init__(self) -> None:
        if self.group not in GROUPS:
            raise ValueError(f"speaker {self.speaker_id}: group must be one of {GROUPS}")
        if self.gender is not None and self.gender not in GENDERS:
            raise ValueError(f"speaker {self.speaker_id}: gender must be one of {GENDERS}")
        if self.race is not None and self.race not in RACES:
            raise ValueError(f"speaker {self.speaker_id}: race must be one of {RACES}")
        if self.age is not None and not 0 <= self.age < MAX_AGE:
            raise ValueError(f"speaker {self.speaker_id}: age {self.age} out of bounds")
        if self.years_education is not None and not 0 <= self.years_education <= MAX_YEARS_EDUCATION:
            raise ValueError(
                f"speaker {self.speaker_id}: years_education {self.years_education} out of bounds"
            )

    def has_demographics(self) -> bool:
        return None not in (
            self.gender,
            self.age,
            self.race,
            self.years_education,
            self.english_first_language,
            self.vision_normal,
            self.hearing_normal,
        )


@dataclass(frozen=True)
class AudioSegment:
    segment_id: str
    speaker_id: str
    audio_path: str
    duration: float
    sample_rate: int

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"segment {self.segment_id}: duration must be > 0")


@dataclass(frozen=True)
class GroundTruth:
    segment_id: str
    text: str
    tokens: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(token_surfaces(self.text)))

    @property
    def word_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class SegmentFeatures:
    """Per-segment attributes feeding regression and matching.

    nonvocal_duration / nonvocal_share stay None until the VAD stage
    fills them.
    """

    segment_id: str
    word_count: int
    duration: float
    average_word_speed: float
    nonvocal_duration: float | None = None
    nonvocal_share: float | None = None

    def with_nonvocal(self, nonvocal_duration: float) -> "SegmentFeatures":
        share = nonvocal_duration / self.duration
        if not 0.0 <= share <= 1.0:
            raise ValueError(
                f"segment {self.segment_id}: nonvocal share {share:.4f} outside [0, 1]"
            )
        return SegmentFeatures(
            self.segment_id,
            self.word_count,
            self.duration,
            self.average_word_speed,
            nonvocal_duration,
            share,
        )


@dataclass
class Corpus:
    """Loaded corpus with all cross-references resolved; treat as immutable."""

    speakers: dict[str, Speaker] = field(default_factory=dict)
    segments: dict[str, AudioSegment] = field(default_factory=dict)
    ground_truths: dict[str, GroundTruth] = field(default_factory=dict)

    def group_of(self, segment_id: str) -> str:
        return self.speakers[self.segments[segment_id].speaker_id].group

    def segment_ids(self) -> list[str]:
        return sorted(self.segments)

    def __len__(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class GroupSummary:
    segment_count: int
    mean_word_count: float | None
    mean_duration: float | None
    mean_word_speed: float | None


_SPEAKER_FIELDS = {
    "speaker_id": str,
    "group": str,
    "gender": str,
    "age": int,
    "race": str,
    "years_education": int,
    "english_first_language": bool,
    "vision_normal": bool,
    "hearing_normal": bool,
    "employment_status": str,
}
_SEGMENT_FIELDS = {
    "segment_id": str,
    "speaker_id": str,
    "audio_path": str,
    "duration": float,
    "sample_rate": int,
    "text": str,
}


def _coerce(record: dict, fields: dict, required: tuple[str, ...], lineno: int) -> dict:
    out = {}
    for name in required:
        if name not in record:
            raise ManifestError(f"line {lineno}: missing required field '{name}'")
    for key, value in record.items():
        if key == "kind":
            continue
        if key not in fields:
            log.warning("manifest line %d: ignoring unknown field %r", lineno, key)
            continue
        typ = fields[key]
        if value is None:
            out[key] = None
        elif typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            out[key] = float(value)
        elif typ is int and isinstance(value, int) and not isinstance(value, bool):
            out[key] = value
        elif isinstance(value, typ) and not (typ is not bool and isinstance(value, bool)):
            out[key] = value
        else:
            raise ManifestError(f"line {lineno}: field '{key}' has wrong type")
    return out


def load_manifest(path: str | Path, check_audio: bool = True) -> Corpus:
    """Load and validate a JSON-lines manifest into a Corpus.

    Rejects the whole load on any malformed record, duplicate id, dangling
    speaker reference, or (when check_audio) WAV header disagreeing with
    the declared duration/sample rate. check_audio=False skips opening the
    audio files and is meant for synthetic in-memory corpora in tests.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")

    corpus = Corpus()
    errors: list[str] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(f"line {lineno}: invalid JSON ({exc.msg})")
                continue
            if not isinstance(record, dict):
                errors.append(f"line {lineno}: record must be a JSON object")
                continue
            kind = record.get("kind")
            try:
                if kind == "speaker":
                    data = _coerce(record, _SPEAKER_FIELDS, ("speaker_id", "group"), lineno)
                    speaker = Speaker(**data)
                    if speaker.speaker_id in corpus.speakers:
                        raise ManifestError(
                            f"line {lineno}: duplicate speaker_id '{speaker.speaker_id}'"
                        )
                    corpus.speakers[speaker.speaker_id] = speaker
                elif kind == "segment":
                    data = _coerce(
                        record,
                        _SEGMENT_FIELDS,
                        ("segment_id", "speaker_id", "audio_path", "duration", "sample_rate"),
                        lineno,
                    )
                    text = data.pop("text", "") or ""
                    segment = AudioSegment(**data)
                    if segment.segment_id in corpus.segments:
                        raise ManifestError(
                            f"line {lineno}: duplicate segment_id '{segment.segment_id}'"
                        )
                    corpus.segments[segment.segment_id] = segment
                    corpus.ground_truths[segment.segment_id] = GroundTruth(
                        segment.segment_id, text
                    )
                else:
                    raise ManifestError(f"line {lineno}: unknown record kind {kind!r}")
            except ManifestError as exc:
                errors.append(str(exc))
            except (TypeError, ValueError) as exc:
                errors.append(f"line {lineno}: {exc}")

    for segment in corpus.segments.values():
        if segment.speaker_id not in corpus.speakers:
            errors.append(
                f"segment '{segment.segment_id}': dangling speaker_id '{segment.speaker_id}'"
            )

    if check_audio and not errors:
        base = path.parent
        for segment in corpus.segments.values():
            wav_path = Path(segment.audio_path)
            if not wav_path.is_absolute():
                wav_path = base / wav_path
            try:
                info = audio.read_wav_info(wav_path)
            except audio.AudioError as exc:
                errors.append(f"segment '{segment.segment_id}': {exc}")
                continue
            if info.sample_rate != segment.sample_rate:
                errors.append(
                    f"segment '{segment.segment_id}': manifest sample_rate "
                    f"{segment.sample_rate} != WAV header {info.sample_rate}"
                )
            if abs(info.duration - segment.duration) > DURATION_TOLERANCE_S:
                errors.append(
                    f"segment '{segment.segment_id}': manifest duration {segment.duration}"
                    f" differs from WAV header {info.duration:.6f} by more than "
                    f"{DURATION_TOLERANCE_S}s"
                )

    if errors:
        raise ManifestError("manifest rejected:\n  " + "\n  ".join(errors))
    return corpus


def save_manifest(corpus: Corpus, path: str | Path) -> None:
    """Serialize a corpus back to the JSON-lines manifest format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for speaker_id in sorted(corpus.speakers):
            s = corpus.speakers[speaker_id]
            record = {
                "kind": "speaker",
                "speaker_id": s.speaker_id,
                "group": s.group,
                "gender": s.gender,
                "age": s.age,
                "race": s.race,
                "years_education": s.years_education,
                "english_first_language": s.english_first_language,
                "vision_normal": s.vision_normal,
                "hearing_normal": s.hearing_normal,
                "employment_status": s.employment_status,
            }
            fh.write(json.dumps({k: v for k, v in record.items() if v is not None}) + "\n")
        for segment_id in sorted(corpus.segments):
            seg = corpus.segments[segment_id]
            truth = corpus.ground_truths[segment_id]
            fh.write(
                json.dumps(
                    {
                        "kind": "segment",
                        "segment_id": seg.segment_id,
                        "speaker_id": seg.speaker_id,
                        "audio_path": seg.audio_path,
                        "duration": seg.duration,
                        "sample_rate": seg.sample_rate,
                        "text": truth.text,
                    }
                )
                + "\n"
            )


def corpus_summary(corpus: Corpus) -> dict[str, GroupSummary]:
    """Per-group segment counts and mean word/duration/speed statistics.

    Empty groups report zero counts and None means. Requires ground truth
    for word counts (missing ground truth counts as zero words).
    """
    by_group: dict[str, list[str]] = {g: [] for g in GROUPS}
    for segment_id in corpus.segment_ids():
        by_group[corpus.group_of(segment_id)].append(segment_id)

    summary: dict[str, GroupSummary] = {}
    for group, ids in by_group.items():
        if not ids:
            summary[group] = GroupSummary(0, None, None, None)
            continue
        words = []
        durations = []
        speeds = []
        for segment_id in ids:
            seg = corpus.segments[segment_id]
            truth = corpus.ground_truths.get(segment_id)
            wc = truth.word_count if truth else 0
            words.append(wc)
            durations.append(seg.duration)
            speeds.append(wc / seg.duration)
        n = len(ids)
        summary[group] = GroupSummary(
            n, sum(words) / n, sum(durations) / n, sum(speeds) / n
        )
    return summary


def compute_features(corpus: Corpus) -> dict[str, SegmentFeatures]:
    """Deterministic per-segment features (VAD fields left unset)."""
    features: dict[str, SegmentFeatures] = {}
    for segment_id in corpus.segment_ids():
        seg = corpus.segments[segment_id]
        truth = corpus.ground_truths.get(segment_id)
        if truth is None:
            raise ValueError(f"segment '{segment_id}' has no ground truth")
        speed = truth.word_count / seg.duration
        if not math.isfinite(speed):
            raise ValueError(f"segment '{segment_id}': non-finite word speed")
        features[segment_id] = SegmentFeatures(
            segment_id, truth.word_count, seg.duration, speed
        )
    return features
