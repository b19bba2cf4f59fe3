"""Synthetic corpus generation for testing and simulation.

Builds corpora with controllable group sizes, word counts, durations, and
non-vocal shares (defaults track the calibration targets: aphasia speakers
average about 12 words over 15.5 s with ~41% non-vocal time, controls
about 16 words over 7.8 s with ~15%). Everything is seeded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import audio
from .corpus import AudioSegment, Corpus, GroundTruth, SegmentFeatures, Speaker
from .vad import SynthPart, synth_fixture

_VOCABULARY = (
    "the and then she he they we you i it was had has said went came saw "
    "looked little big old new house tree ball window dog cat bird girl boy "
    "man woman mother father story book picture water fire street school "
    "morning evening day night hand head foot door table chair garden park "
    "car truck river hill town friend family dinner coffee letter phone "
    "walked talked played opened closed found lost started finished wanted "
    "liked turned asked answered remembered forgot happy sad slow quick"
).split()


@dataclass(frozen=True)
class GroupProfile:
    n_segments: int
    mean_words: float = 14.0
    sd_words: float = 4.0
    mean_duration: float = 10.0
    sd_duration: float = 2.5
    mean_nonvocal_share: float = 0.25
    sd_nonvocal_share: float = 0.06


@dataclass(frozen=True)
class SynthCorpusSpec:
    aphasia: GroupProfile = field(
        default_factory=lambda: GroupProfile(
            n_segments=100, mean_words=12, mean_duration=15.5, mean_nonvocal_share=0.41
        )
    )
    control: GroupProfile = field(
        default_factory=lambda: GroupProfile(
            n_segments=100, mean_words=16, mean_duration=7.8, mean_nonvocal_share=0.15
        )
    )
    segments_per_speaker: int = 30
    missing_demographics_rate: float = 0.0
    seed: int = 0


def _speaker(rng: np.random.Generator, speaker_id: str, group: str, missing: bool) -> Speaker:
    if missing:
        return Speaker(speaker_id=speaker_id, group=group)
    return Speaker(
        speaker_id=speaker_id,
        group=group,
        gender="female" if rng.random() < 0.5 else "male",
        age=int(np.clip(rng.normal(60, 12), 20, 95)),
        race=["white", "african_american", "other"][
            int(rng.choice(3, p=[0.89, 0.06, 0.05]))
        ],
        years_education=int(np.clip(rng.normal(14, 3), 6, 30)),
        english_first_language=bool(rng.random() < 0.95),
        vision_normal=bool(rng.random() < 0.9),
        hearing_normal=bool(rng.random() < 0.92),
    )


def synth_corpus(spec: SynthCorpusSpec) -> tuple[Corpus, dict[str, SegmentFeatures]]:
    """In-memory corpus plus features with non-vocal fields already filled.

    Audio paths point at files that do not exist; use write_synth_corpus
    when real WAVs are needed.
    """
    rng = np.random.default_rng(spec.seed)
    corpus = Corpus()
    features: dict[str, SegmentFeatures] = {}

    for group, profile in (("aphasia", spec.aphasia), ("control", spec.control)):
        prefix = group[0]
        n_speakers = max(1, profile.n_segments // spec.segments_per_speaker)
        speakers = []
        for s in range(n_speakers):
            speaker_id = f"{prefix}-spk{s:04d}"
            missing = rng.random() < spec.missing_demographics_rate
            speaker = _speaker(rng, speaker_id, group, missing)
            corpus.speakers[speaker_id] = speaker
            speakers.append(speaker_id)

        for i in range(profile.n_segments):
            segment_id = f"{prefix}-seg{i:05d}"
            speaker_id = speakers[i % n_speakers]
            words = max(1, int(round(rng.normal(profile.mean_words, profile.sd_words))))
            text = " ".join(
                _VOCABULARY[int(rng.integers(len(_VOCABULARY)))] for _ in range(words)
            )
            duration = float(np.clip(rng.normal(profile.mean_duration, profile.sd_duration),
                                     1.0, 60.0))
            share = float(np.clip(
                rng.normal(profile.mean_nonvocal_share, profile.sd_nonvocal_share),
                0.02, 0.9,
            ))
            segment = AudioSegment(
                segment_id=segment_id,
                speaker_id=speaker_id,
                audio_path=f"audio/{segment_id}.wav",
                duration=duration,
                sample_rate=16000,
            )
            corpus.segments[segment_id] = segment
            corpus.ground_truths[segment_id] = GroundTruth(segment_id, text)
            base = SegmentFeatures(segment_id, words, duration, words / duration)
            features[segment_id] = base.with_nonvocal(share * duration)
    return corpus, features


def write_synth_corpus(
    spec: SynthCorpusSpec,
    directory: str | Path,
    sample_rate: int = 8000,
) -> Path:
    """Materialize a synthetic corpus on disk: WAV files plus manifest.

    Each segment's audio is one speech-like tone burst followed by one
    silence gap sized to hit the segment's non-vocal share; durations in
    the manifest match the written WAV headers exactly.
    """
    from .corpus import save_manifest  # local import to keep module load light

    directory = Path(directory)
    corpus, features = synth_corpus(spec)
    rng = np.random.default_rng(spec.seed + 1)

    rebuilt = Corpus(speakers=dict(corpus.speakers))
    for segment_id in corpus.segment_ids():
        segment = corpus.segments[segment_id]
        feats = features[segment_id]
        share = feats.nonvocal_share or 0.0
        vocal = max(0.05, (1.0 - share) * segment.duration)
        silent = max(0.05, share * segment.duration)
        level = float(rng.uniform(-14.0, -8.0))
        samples = synth_fixture(
            [
                SynthPart("tone", vocal, level, frequency_hz=float(rng.uniform(180, 320))),
                SynthPart("silence", silent),
            ],
            sample_rate=sample_rate,
            seed=spec.seed,
        )
        wav_path = directory / segment.audio_path
        audio.write_wav(wav_path, samples, sample_rate)
        true_duration = len(samples) / sample_rate
        rebuilt.segments[segment_id] = AudioSegment(
            segment_id, segment.speaker_id, segment.audio_path, true_duration, sample_rate
        )
        rebuilt.ground_truths[segment_id] = corpus.ground_truths[segment_id]

    manifest_path = directory / "manifest.jsonl"
    save_manifest(rebuilt, manifest_path)
    return manifest_path
