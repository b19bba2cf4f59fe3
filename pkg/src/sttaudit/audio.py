"""WAV file reading and writing (PCM 16-bit, mono or stereo).

One canonical in-memory representation: float64 samples in [-1, 1], mono.
Stereo inputs are downmixed by per-sample channel averaging.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ACCEPTED_SAMPLE_RATES = (8000, 16000, 44100)

_PCM16_SCALE = 32768.0


class AudioError(Exception):
    """Unreadable, malformed, or unsupported audio file."""


@dataclass(frozen=True)
class WavInfo:
    sample_rate: int
    n_frames: int
    n_channels: int

    @property
    def duration(self) -> float:
        return self.n_frames / self.sample_rate


def read_wav_info(path: str | Path) -> WavInfo:
    """Read header fields only; raises AudioError on anything unexpected."""
    try:
        with wave.open(str(path), "rb") as wf:
            info = WavInfo(wf.getframerate(), wf.getnframes(), wf.getnchannels())
            sampwidth = wf.getsampwidth()
    except (wave.Error, EOFError, OSError) as exc:
        raise AudioError(f"{path}: unreadable WAV header ({exc})") from exc
    if sampwidth != 2:
        raise AudioError(f"{path}: expected 16-bit PCM, got {8 * sampwidth}-bit")
    if info.n_channels not in (1, 2):
        raise AudioError(f"{path}: expected mono or stereo, got {info.n_channels} channels")
    if info.sample_rate not in ACCEPTED_SAMPLE_RATES:
        raise AudioError(
            f"{path}: sample rate {info.sample_rate} not in {ACCEPTED_SAMPLE_RATES}"
        )
    return info


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a WAV file into mono float samples in [-1, 1].

    Returns (samples, sample_rate). Stereo is downmixed by averaging.
    """
    info = read_wav_info(path)
    with wave.open(str(path), "rb") as wf:
        raw = wf.readframes(info.n_frames)
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / _PCM16_SCALE
    if info.n_channels == 2:
        data = data.reshape(-1, 2).mean(axis=1)
    return data, info.sample_rate


def write_wav(path: str | Path, samples: np.ndarray, sample_rate: int) -> None:
    """Write mono float samples in [-1, 1] as 16-bit PCM."""
    if sample_rate not in ACCEPTED_SAMPLE_RATES:
        raise AudioError(f"sample rate {sample_rate} not in {ACCEPTED_SAMPLE_RATES}")
    clipped = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 32767.0 / _PCM16_SCALE)
    pcm = np.round(clipped * _PCM16_SCALE).astype("<i2")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())
