"""Deterministic energy-based voice activity detection.

Frames are classified by RMS energy in dBFS against an (optionally
adaptive) threshold, with hangover smoothing so intra-word micro-pauses do
not count as non-vocal time. Two named profiles ("strict" and "lenient")
exist so analyses can check that their conclusions survive a change of VAD
parameterization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# dBFS assigned to digitally silent frames (RMS of zero)
SILENCE_FLOOR_DB = -100.0

# adaptive threshold sits this far above the estimated noise floor
ADAPTIVE_MARGIN_DB = 10.0

# noise floor = this percentile of per-frame energies
NOISE_FLOOR_PERCENTILE = 10.0

# below this peak-to-floor range the signal is homogeneous (all speech or
# all silence) and the noise-floor estimate is meaningless; fall back to
# the absolute threshold
MIN_DYNAMIC_RANGE_DB = 15.0


@dataclass(frozen=True)
class VadConfig:
    frame_ms: int = 30
    energy_threshold_db: float = -35.0
    adaptive: bool = True
    hangover_frames: int = 5
    profile_name: str = "strict"

    def __post_init__(self) -> None:
        if not 10 <= self.frame_ms <= 50:
            raise ValueError(f"frame_ms {self.frame_ms} outside [10, 50]")
        if self.hangover_frames < 0:
            raise ValueError("hangover_frames must be >= 0")


# Both profiles keep the adaptive noise-floor rule; they differ in frame
# granularity, threshold floor, and hangover so rank-order conclusions can
# be checked against a genuinely different parameterization.
PROFILES: dict[str, VadConfig] = {
    "strict": VadConfig(frame_ms=30, energy_threshold_db=-35.0, adaptive=True,
                        hangover_frames=5, profile_name="strict"),
    "lenient": VadConfig(frame_ms=20, energy_threshold_db=-45.0, adaptive=True,
                         hangover_frames=3, profile_name="lenient"),
}


@dataclass(frozen=True)
class VadProfile:
    segment_id: str
    total_duration: float
    nonvocal_duration: float
    nonvocal_share: float
    vocal_intervals: tuple[tuple[float, float], ...]


def _frame_db(samples: np.ndarray, frame_len: int) -> np.ndarray:
    """Per-frame RMS energy in dBFS; DC offset removed per frame."""
    n = len(samples)
    n_frames = math.ceil(n / frame_len)
    dbs = np.empty(n_frames)
    for k in range(n_frames):
        frame = samples[k * frame_len : min((k + 1) * frame_len, n)]
        ac = frame - frame.mean()
        rms = math.sqrt(float(np.mean(ac * ac)))
        dbs[k] = max(SILENCE_FLOOR_DB, 20.0 * math.log10(rms)) if rms > 0 else SILENCE_FLOOR_DB
    return dbs


def _classify_frames(
    samples: np.ndarray, sample_rate: int, cfg: VadConfig
) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-frame energies and vocal flags (after hangover smoothing)."""
    frame_len = int(round(sample_rate * cfg.frame_ms / 1000.0))
    if len(samples) < frame_len:
        raise ValueError("audio shorter than one VAD frame")

    dbs = _frame_db(samples, frame_len)
    threshold = cfg.energy_threshold_db
    if cfg.adaptive:
        noise_floor = float(np.percentile(dbs, NOISE_FLOOR_PERCENTILE))
        if float(dbs.max()) - noise_floor >= MIN_DYNAMIC_RANGE_DB:
            threshold = max(threshold, noise_floor + ADAPTIVE_MARGIN_DB)

    vocal = dbs > threshold
    if cfg.hangover_frames > 0 and vocal.any():
        extended = vocal.copy()
        run_end = None
        for k in range(len(vocal)):
            if vocal[k]:
                run_end = k
            elif run_end is not None and k - run_end <= cfg.hangover_frames:
                extended[k] = True
        vocal = extended
    return dbs, vocal, frame_len


@dataclass(frozen=True)
class FrameDecision:
    index: int
    start_s: float
    energy_db: float
    vocal: bool


def frame_decisions(
    samples: np.ndarray, sample_rate: int, cfg: VadConfig
) -> list[FrameDecision]:
    """Per-frame classification, for CSV debugging dumps."""
    samples = np.asarray(samples, dtype=np.float64)
    dbs, vocal, frame_len = _classify_frames(samples, sample_rate, cfg)
    return [
        FrameDecision(k, k * frame_len / sample_rate, float(dbs[k]), bool(vocal[k]))
        for k in range(len(dbs))
    ]


def vad_profile(
    samples: np.ndarray,
    sample_rate: int,
    cfg: VadConfig,
    segment_id: str = "",
) -> VadProfile:
    """Classify audio into vocal/non-vocal time.

    A frame is vocal iff its RMS energy exceeds the threshold; with
    cfg.adaptive the threshold is max(cfg.energy_threshold_db, noise floor
    + 10 dB). Vocal runs are extended by hangover_frames before intervals
    are merged. Requires at least one full frame of audio.
    """
    samples = np.asarray(samples, dtype=np.float64)
    dbs, vocal, frame_len = _classify_frames(samples, sample_rate, cfg)

    n = len(samples)
    total_duration = n / sample_rate
    intervals: list[tuple[float, float]] = []
    start = None
    for k, is_vocal in enumerate(vocal):
        if is_vocal and start is None:
            start = k
        elif not is_vocal and start is not None:
            intervals.append((start * frame_len / sample_rate,
                              min(k * frame_len, n) / sample_rate))
            start = None
    if start is not None:
        intervals.append((start * frame_len / sample_rate, total_duration))

    vocal_duration = sum(e - s for s, e in intervals)
    nonvocal_duration = max(0.0, total_duration - vocal_duration)
    return VadProfile(
        segment_id=segment_id,
        total_duration=total_duration,
        nonvocal_duration=nonvocal_duration,
        nonvocal_share=nonvocal_duration / total_duration,
        vocal_intervals=tuple(intervals),
    )


@dataclass(frozen=True)
class SynthPart:
    """One building block for synthetic audio: silence, tone, or noise.

    level_db is the target RMS level in dBFS (a sinusoid's peak sits
    3.01 dB above its RMS). Ignored for silence.
    """

    kind: str  # "silence" | "tone" | "noise"
    duration: float
    level_db: float = -10.0
    frequency_hz: float = 440.0

    def __post_init__(self) -> None:
        if self.kind not in ("silence", "tone", "noise"):
            raise ValueError(f"unknown part kind {self.kind!r}")
        if self.duration <= 0:
            raise ValueError("part duration must be > 0")


def synth_fixture(
    parts: list[SynthPart], sample_rate: int = 16000, seed: int = 0
) -> np.ndarray:
    """Deterministically synthesize audio from a list of parts.

    Noise parts draw from a generator seeded by `seed` plus the part index,
    so the same spec always produces identical samples.
    """
    if not parts:
        raise ValueError("at least one part required")
    chunks: list[np.ndarray] = []
    for idx, part in enumerate(parts):
        n = int(round(part.duration * sample_rate))
        if part.kind == "silence":
            chunks.append(np.zeros(n))
            continue
        target_rms = 10.0 ** (part.level_db / 20.0)
        if part.kind == "tone":
            t = np.arange(n) / sample_rate
            amplitude = target_rms * math.sqrt(2.0)
            chunk = amplitude * np.sin(2.0 * math.pi * part.frequency_hz * t)
        else:  # noise
            rng = np.random.default_rng((seed, idx))
            chunk = rng.standard_normal(n)
            chunk *= target_rms / math.sqrt(float(np.mean(chunk * chunk)))
        chunks.append(np.clip(chunk, -1.0, 1.0))
    return np.concatenate(chunks)


def profile_for_name(name: str) -> VadConfig:
    if name not in PROFILES:
        raise ValueError(f"unknown VAD profile {name!r}; expected one of {sorted(PROFILES)}")
    return PROFILES[name]
