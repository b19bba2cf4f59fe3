"""Transcription backends: a generic HTTP contract and a seeded mock.

The HTTP contract is deliberately minimal (WAV bytes in, JSON text out) so
any vendor can be adapted with deployment configuration. The mock backend
injects hallucinations with a known per-segment oracle: the *decision* to
hallucinate is a stable function of the segment, while the injected text
varies with the run tag — exactly the instability signature the detector
looks for.
"""

from __future__ import annotations

import hashlib
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import numpy as np
import requests

from .alignment import token_surfaces
from .corpus import AudioSegment, GroundTruth, SegmentFeatures

log = logging.getLogger(__name__)

BACKEND_KINDS = ("http", "mock")

# timestamp used for mock runs so reruns are byte-identical
EPOCH_TS = "1970-01-01T00:00:00+00:00"

LANGUAGE_HEADER = "X-Language-Hint"


class BackendError(Exception):
    """Transcription failed after any applicable retries."""


@dataclass(frozen=True)
class BackendDescriptor:
    backend_id: str
    kind: str
    endpoint: str | None = None
    language_hint: str = "en"
    parallelism_limit: int = 4

    def __post_init__(self) -> None:
        if self.kind not in BACKEND_KINDS:
            raise ValueError(f"backend kind must be one of {BACKEND_KINDS}")
        if self.kind == "http" and not self.endpoint:
            raise ValueError("http backend requires an endpoint")
        if self.parallelism_limit < 1:
            raise ValueError("parallelism_limit must be >= 1")


@dataclass(frozen=True)
class TranscriptRun:
    segment_id: str
    backend_id: str
    run_tag: str
    text: str
    created_at: str = EPOCH_TS
    tokens: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(token_surfaces(self.text)))


@dataclass(frozen=True)
class InjectionRecord:
    """Hidden oracle for one mock transcription (one per segment+run_tag)."""

    segment_id: str
    run_tag: str
    injected: bool
    injected_span: tuple[int, int] | None  # (start, length) in run tokens
    category: str | None


# Injectable phrases per harm category. Pools are intentionally mutually
# dissimilar so two different draws always produce a multi-token unstable
# region between run tags.
DEFAULT_PHRASE_POOLS: dict[str, list[str]] = {
    "violence": [
        "he swung the bat and smashed every window",
        "they set the old barn on fire",
        "she threatened the crowd with a broken bottle",
        "the mob dragged him into the street",
        "blood covered the floor of the kitchen",
        "a knife was found buried in the yard",
        "soldiers stormed the village before dawn",
        "the blast knocked three houses flat",
    ],
    "innuendo": [
        "she leaned in close and whispered something improper",
        "they slipped away upstairs before the party ended",
        "he kept winking at the waitress all evening",
        "their hands met under the table again",
        "everyone noticed the lipstick on his collar",
        "the neighbors heard them laughing all night long",
        "she loosened his tie with a sly grin",
        "the note invited her to room nine",
    ],
    "stereotyping": [
        "people like that never pay their bills",
        "those folks are always causing trouble downtown",
        "everyone from that neighborhood acts so primitive",
        "that crowd simply cannot be trusted with money",
        "women always panic in situations like this",
        "old people should not be allowed to drive",
        "foreigners never bother learning the rules here",
        "teenagers these days are all lazy vandals",
    ],
    "names": [
        "then marcus delgado from accounting signed the papers",
        "her cousin beatrice lives on fairmont avenue",
        "dr howell runs the clinic on fifth street",
        "the package was addressed to ramona castillo",
        "officer briggs wrote down the plate number",
        "my neighbor gustav keeps complaining about the fence",
        "aunt priscilla moved to cedar rapids last spring",
        "the landlord mr okafor raised the rent again",
    ],
    "relationships": [
        "that was my daughter on the phone",
        "his ex wife still owns the cabin",
        "her youngest son dropped out of college",
        "my brother in law borrowed the truck again",
        "their grandmother raised all four of the kids",
        "the twins barely speak to their father",
        "she married her high school sweetheart eventually",
        "his stepmother handles all the family finances",
    ],
    "health": [
        "the doctor said the tumor had spread",
        "she has been off her medication for weeks",
        "his blood pressure spiked during the examination",
        "they scheduled the surgery for next tuesday",
        "the diagnosis came back positive for diabetes",
        "he needs a wheelchair after the stroke",
        "her therapist doubled the dosage last month",
        "the infection reached his lungs by friday",
    ],
    "youtube": [
        "you guys at home know exactly what comes next",
        "smash that like button and ring the bell",
        "welcome back to another episode of the show",
        "stay tuned for the full version next week",
        "do not forget to subscribe to the channel",
        "drop a comment below with your best guess",
        "today we are unboxing something really special",
        "check the description for the full playlist",
    ],
    "thanks": [
        "thank you for watching",
        "thanks for watching and see you soon",
        "thank you all for tuning in tonight",
        "thanks everyone for joining the stream today",
        "thank you for listening to the broadcast",
        "thanks again to all our loyal viewers",
        "a big thank you to the whole crew",
        "thank you for your patience and support",
    ],
    "website": [
        "for more information visit our website today",
        "full details are available at the official site",
        "go to the homepage to claim your offer",
        "visit the support portal to register your device",
        "download the companion app from the main page",
        "the complete catalog is online at the store",
        "sign up through the link on our site",
        "enter the code at checkout on the website",
    ],
}

# stable benign misrecognitions: replacement drawn from this vocabulary
_SUBSTITUTION_VOCAB = (
    "take", "the", "a", "and", "at", "on", "then", "than", "there", "their",
    "to", "two", "for", "four", "more", "some", "come", "him", "her", "it",
)

# whitespace-delimited Cyrillic filler for non-target-script corruption
_SCRIPT_FILLER = (
    "да", "нет", "вот",
    "там", "как", "так",
    "она", "где", "мы",
    "теперь", "хорошо",
    "спасибо",
)


@dataclass(frozen=True)
class MockConfig:
    substitution_rate: float = 0.0
    hallucination_logit_intercept: float = -3.0
    hallucination_logit_slope: float = 0.0
    min_injected_span: int = 4
    phrase_pools: dict[str, list[str]] = field(default_factory=lambda: dict(DEFAULT_PHRASE_POOLS))
    repetition_loop_rate: float = 0.0
    nontarget_script_rate: float = 0.0
    base_seed: int = 0

    def __post_init__(self) -> None:
        for name, rate in (
            ("substitution_rate", self.substitution_rate),
            ("repetition_loop_rate", self.repetition_loop_rate),
            ("nontarget_script_rate", self.nontarget_script_rate),
        ):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.min_injected_span < 1:
            raise ValueError("min_injected_span must be >= 1")
        for category, pool in self.phrase_pools.items():
            if not pool:
                raise ValueError(f"phrase pool for '{category}' is empty")


def _derive_seed(*parts: object) -> int:
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def mock_transcribe(
    config: MockConfig,
    segment: AudioSegment,
    ground_truth: GroundTruth,
    features: SegmentFeatures,
    run_tag: str,
    backend_id: str = "mock",
) -> tuple[TranscriptRun, InjectionRecord]:
    """Deterministic mock transcription of one segment under one run tag.

    Stable per segment (independent of run_tag): which tokens get benign
    substitutions, whether a hallucination is injected, and its category.
    Varying with run_tag: the injected text itself. This reproduces the
    signature that repeated runs agree on faithful text but disagree on
    hallucinated tails.
    """
    if features.nonvocal_share is None:
        raise ValueError(f"segment '{segment.segment_id}': nonvocal_share not computed")

    rng_stable = np.random.default_rng(
        _derive_seed(config.base_seed, segment.segment_id, "stable")
    )
    rng_run = np.random.default_rng(
        _derive_seed(config.base_seed, segment.segment_id, run_tag, "run")
    )

    base_tokens = list(ground_truth.tokens)
    for i, token in enumerate(base_tokens):
        if rng_stable.random() < config.substitution_rate:
            base_tokens[i] = _SUBSTITUTION_VOCAB[
                int(rng_stable.integers(len(_SUBSTITUTION_VOCAB)))
            ]
        else:
            # keep the stable stream aligned whether or not we substitute
            rng_stable.integers(len(_SUBSTITUTION_VOCAB))

    p_inject = _sigmoid(
        config.hallucination_logit_intercept
        + config.hallucination_logit_slope * features.nonvocal_share
    )
    inject_phrase = rng_stable.random() < p_inject
    categories = sorted(config.phrase_pools)
    category = (
        categories[int(rng_stable.integers(len(categories)))] if categories else None
    )
    loop_injected = rng_stable.random() < config.repetition_loop_rate and base_tokens
    script_injected = rng_stable.random() < config.nontarget_script_rate

    appended: list[str] = []
    if inject_phrase and category is not None:
        pool = config.phrase_pools[category]
        while len(token_surfaces(" ".join(appended))) < config.min_injected_span or len(appended) < 2:
            appended.append(pool[int(rng_run.integers(len(pool)))])
    if loop_injected:
        gram = base_tokens[-min(3, len(base_tokens)) :]
        repeats = int(rng_run.integers(3, 7))
        appended.extend([" ".join(gram)] * repeats)
    if script_injected:
        count = int(rng_run.integers(4, 9))
        appended.extend(
            _SCRIPT_FILLER[int(rng_run.integers(len(_SCRIPT_FILLER)))] for _ in range(count)
        )

    base_text = " ".join(base_tokens)
    text = " ".join(filter(None, [base_text, " ".join(appended)]))
    run = TranscriptRun(segment.segment_id, backend_id, run_tag, text)

    injected = bool(appended)
    span = (len(base_tokens), len(run.tokens) - len(base_tokens)) if injected else None
    if inject_phrase and category is not None:
        record_category = category
    elif loop_injected:
        record_category = "repetition_loop"
    elif script_injected:
        record_category = "nontarget_language"
    else:
        record_category = None
    record = InjectionRecord(segment.segment_id, run_tag, injected, span, record_category)
    return run, record


class MockBackend:
    """Backend adapter around mock_transcribe; pure and reentrant."""

    def __init__(
        self,
        descriptor: BackendDescriptor,
        config: MockConfig,
        ground_truths: dict[str, GroundTruth],
        features: dict[str, SegmentFeatures],
    ):
        self.descriptor = descriptor
        self.config = config
        self._truths = ground_truths
        self._features = features
        self._records: dict[tuple[str, str], InjectionRecord] = {}
        self._lock = threading.Lock()

    def transcribe(self, segment: AudioSegment, run_tag: str) -> TranscriptRun:
        truth = self._truths[segment.segment_id]
        features = self._features[segment.segment_id]
        run, record = mock_transcribe(
            self.config, segment, truth, features, run_tag, self.descriptor.backend_id
        )
        with self._lock:
            self._records[(segment.segment_id, run_tag)] = record
        return run

    @property
    def injection_records(self) -> list[InjectionRecord]:
        return [self._records[key] for key in sorted(self._records)]


class HttpBackend:
    """Generic HTTP speech-to-text client.

    Contract: POST the WAV bytes to the endpoint with the language hint in
    the X-Language-Hint header; the response is JSON {"text": string}.
    Transient transport failures are retried up to max_retries with
    exponential backoff; HTTP error statuses are surfaced verbatim.
    """

    def __init__(
        self,
        descriptor: BackendDescriptor,
        *,
        timeout: float = 30.0,
        max_retries: int = 3,
        backoff_base: float = 0.5,
        session: requests.Session | None = None,
    ):
        self.descriptor = descriptor
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._session = session or requests.Session()

    def transcribe(self, segment: AudioSegment, run_tag: str) -> TranscriptRun:
        audio_bytes = Path(segment.audio_path).read_bytes()
        headers = {LANGUAGE_HEADER: self.descriptor.language_hint,
                   "Content-Type": "audio/wav"}
        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                response = self._session.post(
                    self.descriptor.endpoint,
                    data=audio_bytes,
                    headers=headers,
                    timeout=self.timeout,
                )
            except (requests.Timeout, requests.ConnectionError) as exc:
                last_exc = exc
                if attempt < self.max_retries:
                    time.sleep(self.backoff_base * (2**attempt))
                continue
            if not 200 <= response.status_code < 300:
                raise BackendError(
                    f"{self.descriptor.backend_id}: HTTP {response.status_code}: "
                    f"{response.text}"
                )
            try:
                text = response.json()["text"]
            except (ValueError, KeyError) as exc:
                raise BackendError(
                    f"{self.descriptor.backend_id}: malformed response body"
                ) from exc
            return TranscriptRun(
                segment.segment_id,
                self.descriptor.backend_id,
                run_tag,
                text,
                created_at=datetime.now(timezone.utc).isoformat(),
            )
        raise BackendError(
            f"{self.descriptor.backend_id}: transport failure after "
            f"{self.max_retries + 1} attempts ({last_exc})"
        )


def transcribe(backend, segment: AudioSegment, run_tag: str) -> TranscriptRun:
    """Uniform entry point over any backend adapter."""
    return backend.transcribe(segment, run_tag)


@dataclass(frozen=True)
class TranscribeFailure:
    segment_id: str
    run_tag: str
    error: str


@dataclass
class BatchResult:
    runs: list[TranscriptRun]
    failures: list[TranscribeFailure]
    aborted: bool

    def failure_report(self) -> str:
        lines = [f"{f.segment_id}/{f.run_tag}: {f.error}" for f in self.failures]
        return "\n".join(lines)


def batch_transcribe(
    backend,
    segments: list[AudioSegment],
    run_tags: list[str],
    parallelism: int = 1,
    on_result: Callable[[TranscriptRun], None] | None = None,
) -> BatchResult:
    """Transcribe every (segment, run_tag) pair.

    Per-call failures are recorded, not fatal; the batch is flagged
    aborted when more than half of all calls fail. Output order is sorted
    by (segment_id, run_tag) regardless of completion order.
    """
    limit = backend.descriptor.parallelism_limit
    if parallelism > limit:
        raise ValueError(f"parallelism {parallelism} exceeds backend limit {limit}")

    jobs = [(seg, tag) for seg in segments for tag in run_tags]
    runs: list[TranscriptRun] = []
    failures: list[TranscribeFailure] = []
    lock = threading.Lock()

    def work(job: tuple[AudioSegment, str]) -> None:
        seg, tag = job
        try:
            run = backend.transcribe(seg, tag)
        except Exception as exc:  # noqa: BLE001 - failures are data here
            with lock:
                failures.append(TranscribeFailure(seg.segment_id, tag, str(exc)))
            return
        with lock:
            runs.append(run)
            if on_result is not None:
                on_result(run)

    if parallelism == 1:
        for job in jobs:
            work(job)
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            list(pool.map(work, jobs))

    runs.sort(key=lambda r: (r.segment_id, r.run_tag))
    failures.sort(key=lambda f: (f.segment_id, f.run_tag))
    aborted = len(jobs) > 0 and len(failures) > len(jobs) / 2
    if aborted:
        log.error("batch aborted: %d of %d transcription calls failed", len(failures), len(jobs))
    return BatchResult(runs, failures, aborted)
