"""Shared test fixtures and builders."""

from __future__ import annotations

import json
from pathlib import Path

import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """One FAIL line per acceptance criterion (PASS lines print inline)."""
    outcome = yield
    report = outcome.get_result()
    if (
        report.when == "call"
        and report.failed
        and item.module.__name__ == "test_acceptance"
    ):
        print(f"\nACCEPTANCE {item.name}: FAIL")

from sttaudit import audio
from sttaudit.corpus import AudioSegment, Corpus, GroundTruth, SegmentFeatures, Speaker
from sttaudit.vad import SynthPart, synth_fixture


def make_speaker(speaker_id="spk1", group="control", **kwargs) -> Speaker:
    defaults = dict(
        gender="female",
        age=60,
        race="white",
        years_education=14,
        english_first_language=True,
        vision_normal=True,
        hearing_normal=True,
    )
    defaults.update(kwargs)
    return Speaker(speaker_id=speaker_id, group=group, **defaults)


def make_segment(segment_id="seg1", speaker_id="spk1", duration=5.0, **kwargs) -> AudioSegment:
    defaults = dict(audio_path=f"audio/{segment_id}.wav", sample_rate=16000)
    defaults.update(kwargs)
    return AudioSegment(segment_id=segment_id, speaker_id=speaker_id, duration=duration, **defaults)


def make_features(segment_id, word_count, duration, nonvocal_share=None) -> SegmentFeatures:
    feats = SegmentFeatures(segment_id, word_count, duration, word_count / duration)
    if nonvocal_share is not None:
        feats = feats.with_nonvocal(nonvocal_share * duration)
    return feats


def build_corpus(entries) -> Corpus:
    """entries: list of (speaker, [(segment_id, duration, text), ...])."""
    corpus = Corpus()
    for speaker, segments in entries:
        corpus.speakers[speaker.speaker_id] = speaker
        for segment_id, duration, text in segments:
            corpus.segments[segment_id] = make_segment(segment_id, speaker.speaker_id, duration)
            corpus.ground_truths[segment_id] = GroundTruth(segment_id, text)
    return corpus


@pytest.fixture
def tiny_corpus() -> Corpus:
    return build_corpus(
        [
            (make_speaker("a1", "aphasia"), [("seg-a1", 10.0, "the dog ran home"),
                                             ("seg-a2", 8.0, "she saw the bird")]),
            (make_speaker("c1", "control"), [("seg-c1", 5.0, "he opened the door slowly"),
                                             ("seg-c2", 4.0, "they walked to the park")]),
        ]
    )


def write_manifest(path: Path, records: list[dict]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return path


def write_tone_wav(path: Path, duration: float = 1.0, sample_rate: int = 16000,
                   silence: float = 0.0) -> Path:
    parts = [SynthPart("tone", duration, -10.0)]
    if silence > 0:
        parts.append(SynthPart("silence", silence))
    samples = synth_fixture(parts, sample_rate)
    audio.write_wav(path, samples, sample_rate)
    return path


def manifest_records_for(corpus_dir: Path, n_speakers=2, n_segments=4):
    """Two speakers (1 aphasia, 1 control), four 1 s segments with WAVs."""
    records = [
        {"kind": "speaker", "speaker_id": "s-a", "group": "aphasia", "gender": "male",
         "age": 61, "race": "white", "years_education": 12,
         "english_first_language": True, "vision_normal": True, "hearing_normal": True},
        {"kind": "speaker", "speaker_id": "s-c", "group": "control", "gender": "female",
         "age": 58, "race": "other", "years_education": 16,
         "english_first_language": True, "vision_normal": True, "hearing_normal": True},
    ]
    for i in range(n_segments):
        seg_id = f"seg{i}"
        write_tone_wav(corpus_dir / "audio" / f"{seg_id}.wav", duration=1.0)
        records.append(
            {"kind": "segment", "segment_id": seg_id,
             "speaker_id": "s-a" if i % 2 == 0 else "s-c",
             "audio_path": f"audio/{seg_id}.wav", "duration": 1.0,
             "sample_rate": 16000, "text": f"sample utterance number {i} spoken aloud"}
        )
    return records
