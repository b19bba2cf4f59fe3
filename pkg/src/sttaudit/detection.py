"""Hallucination-candidate detection over paired transcription runs.

A segment becomes a candidate when two runs of the same audio disagree in
a multi-token region and at least one run is longer than the ground truth.
Candidates are never auto-confirmed: every one is routed to human
adjudication. Repetition loops and non-target-script output are detected
as additional signals on the candidate.
"""

from __future__ import annotations

import hashlib
import math
import unicodedata
from dataclasses import dataclass, field

from .alignment import (
    TokenSpan,
    align,
    insertion_spans,
    intersect_spans,
    unstable_regions,
)
from .backends import TranscriptRun
from .corpus import Corpus, GroundTruth

SIGNAL_CROSS_RUN = "cross_run_unstable"
SIGNAL_LONGER = "longer_than_truth"
SIGNAL_REPETITION = "repetition_loop"
SIGNAL_SCRIPT = "nontarget_script"

STATUSES = ("pending", "confirmed", "rejected")


@dataclass(frozen=True)
class DetectionConfig:
    min_unstable_span: int = 2
    require_longer_than_truth: bool = True
    min_excess_tokens: int = 1
    repetition_ngram_max: int = 8
    # default 3 deliberately does not flag a double: legitimate speech
    # repeats itself, looped output repeats more
    repetition_min_repeats: int = 3
    script_mismatch_threshold: float = 0.3
    expected_script: str = "latin"

    def __post_init__(self) -> None:
        for name in ("min_unstable_span", "min_excess_tokens",
                     "repetition_ngram_max", "repetition_min_repeats"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 < self.script_mismatch_threshold <= 1.0:
            raise ValueError("script_mismatch_threshold must be in (0, 1]")


@dataclass
class HallucinationCandidate:
    candidate_id: str
    segment_id: str
    backend_id: str
    run_pair: tuple[str, str]
    flagged_spans: dict[str, list[TokenSpan]]  # run_tag -> spans
    signals: frozenset[str]
    status: str = "pending"
    created_at: str = ""


def candidate_id_for(segment_id: str, backend_id: str, run_pair: tuple[str, str]) -> str:
    """Stable id so reruns over the same inputs produce the same candidates."""
    key = f"{segment_id}|{backend_id}|{run_pair[0]}|{run_pair[1]}"
    return "cand-" + hashlib.sha256(key.encode("utf-8")).hexdigest()[:12]


def detect_candidate(
    truth: GroundTruth,
    run_a: TranscriptRun,
    run_b: TranscriptRun,
    cfg: DetectionConfig,
) -> HallucinationCandidate | None:
    """Flag a candidate iff the two runs are mutually unstable and (when
    required) at least one run exceeds the ground-truth length.

    Flagged spans per run are the unstable regions intersected with that
    run's insertions against the ground truth, falling back to the raw
    unstable spans when the intersection is empty.
    """
    if run_a.segment_id != truth.segment_id or run_b.segment_id != truth.segment_id:
        raise ValueError(
            f"run segment ids ({run_a.segment_id}, {run_b.segment_id}) do not match "
            f"ground truth '{truth.segment_id}'"
        )
    if run_a.backend_id != run_b.backend_id:
        raise ValueError("paired runs must come from the same backend")

    regions = unstable_regions(run_a.tokens, run_b.tokens, cfg.min_unstable_span)
    if not regions:
        return None

    excess_a = len(run_a.tokens) - len(truth.tokens)
    excess_b = len(run_b.tokens) - len(truth.tokens)
    longer = max(excess_a, excess_b) >= cfg.min_excess_tokens
    if cfg.require_longer_than_truth and not longer:
        return None

    signals = {SIGNAL_CROSS_RUN}
    if longer:
        signals.add(SIGNAL_LONGER)

    flagged: dict[str, list[TokenSpan]] = {}
    for run, side in ((run_a, "a"), (run_b, "b")):
        raw = [
            span
            for region in regions
            if (span := region.span_a if side == "a" else region.span_b) is not None
        ]
        inserted = insertion_spans(align(truth.tokens, run.tokens), min_len=1)
        narrowed = intersect_spans(raw, inserted, run.tokens)
        flagged[run.run_tag] = narrowed if narrowed else raw

    for run in (run_a, run_b):
        if detect_repetition(list(run.tokens), list(truth.tokens), cfg) is not None:
            signals.add(SIGNAL_REPETITION)
        script = flag_nontarget_script(
            run.text, cfg.expected_script, cfg.script_mismatch_threshold
        )
        if script.flagged:
            signals.add(SIGNAL_SCRIPT)

    pair = (run_a.run_tag, run_b.run_tag)
    return HallucinationCandidate(
        candidate_id=candidate_id_for(truth.segment_id, run_a.backend_id, pair),
        segment_id=truth.segment_id,
        backend_id=run_a.backend_id,
        run_pair=pair,
        flagged_spans=flagged,
        signals=frozenset(signals),
    )


def _periodic_run_length(tokens: list[str], start: int, period: int) -> int:
    """Length of the maximal run starting at `start` with the given period."""
    end = start + period
    while end < len(tokens) and tokens[end] == tokens[end - period]:
        end += 1
    return end - start


def _max_repeats(tokens: list[str], gram: list[str], min_repeats: int) -> int:
    """Most consecutive repeats of `gram` anywhere in tokens (partial final
    repetition counts toward the total, matching _repetition_repeats)."""
    n = len(gram)
    best = 0
    for start in range(len(tokens) - n + 1):
        if tokens[start : start + n] == gram:
            length = _periodic_run_length(tokens, start, n)
            best = max(best, math.ceil(length / n))
            if best >= min_repeats:
                return best
    return best


def detect_repetition(
    tokens: list[str], truth_tokens: list[str], cfg: DetectionConfig
) -> TokenSpan | None:
    """Longest span where an n-gram repeats consecutively.

    A run counts `ceil(length / n)` repeats, so a truncated final
    repetition (the typical looped-output tail) still counts as a repeat.
    Runs whose base n-gram repeats just as much in the ground truth are
    not flagged. Returns the covering span of the best run, or None.
    """
    best: tuple[int, int, int] | None = None  # (-length, start, period)
    for period in range(1, min(cfg.repetition_ngram_max, len(tokens)) + 1):
        for start in range(len(tokens) - period):
            length = _periodic_run_length(tokens, start, period)
            repeats = math.ceil(length / period)
            if repeats < cfg.repetition_min_repeats:
                continue
            gram = tokens[start : start + period]
            if _max_repeats(truth_tokens, gram, cfg.repetition_min_repeats) >= cfg.repetition_min_repeats:
                continue
            key = (-length, start, period)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    length, start = -best[0], best[1]
    return TokenSpan(start, length, " ".join(tokens[start : start + length]))


_SCRIPT_PREFIXES = (
    ("LATIN", "latin"),
    ("CYRILLIC", "cyrillic"),
    ("GREEK", "greek"),
    ("CJK", "cjk"),
    ("HIRAGANA", "cjk"),
    ("KATAKANA", "cjk"),
    ("HANGUL", "hangul"),
    ("ARABIC", "arabic"),
    ("HEBREW", "hebrew"),
    ("DEVANAGARI", "devanagari"),
    ("THAI", "thai"),
)


def _script_of(ch: str) -> str:
    name = unicodedata.name(ch, "")
    for prefix, script in _SCRIPT_PREFIXES:
        if name.startswith(prefix):
            return script
    return "other"


@dataclass(frozen=True)
class ScriptFlag:
    flagged: bool
    share: float


def flag_nontarget_script(
    text: str, expected_script: str = "latin", threshold: float = 0.3
) -> ScriptFlag:
    """Share of letters outside the expected script; flag when it exceeds
    the threshold. Digits and punctuation are excluded from both counts."""
    letters = [ch for ch in text if ch.isalpha()]
    if not letters:
        return ScriptFlag(False, 0.0)
    outside = sum(1 for ch in letters if _script_of(ch) != expected_script)
    share = outside / len(letters)
    return ScriptFlag(share > threshold, share)


@dataclass(frozen=True)
class GroupStability:
    evaluated: int
    flagged_any: int
    persistent: int


@dataclass
class StabilityReport:
    n_pairs: int
    per_segment: dict[str, tuple[int, int]]  # segment -> (times flagged, pairs)
    persistent_ids: list[str]
    by_group: dict[str, GroupStability] = field(default_factory=dict)

    @property
    def summary(self) -> str:
        return f"{len(self.persistent_ids)}/{len(self.per_segment)} persistent"


def stability_report(
    evaluated: dict[tuple[str, str], set[str]],
    flagged: dict[tuple[str, str], set[str]],
    corpus: Corpus | None = None,
) -> StabilityReport:
    """Per-segment flag reliability across run pairs.

    Every run pair must have evaluated the same segment set; otherwise the
    asymmetric difference is reported. A segment is persistent when it was
    flagged in every pair.
    """
    if not evaluated:
        raise ValueError("no run pairs supplied")
    pairs = sorted(evaluated)
    base = evaluated[pairs[0]]
    for pair in pairs[1:]:
        if evaluated[pair] != base:
            only_first = sorted(base - evaluated[pair])
            only_other = sorted(evaluated[pair] - base)
            raise ValueError(
                f"inconsistent segment sets between {pairs[0]} and {pair}: "
                f"only in {pairs[0]}: {only_first}; only in {pair}: {only_other}"
            )

    n_pairs = len(pairs)
    per_segment = {
        seg: (sum(1 for pair in pairs if seg in flagged.get(pair, set())), n_pairs)
        for seg in sorted(base)
    }
    persistent = [seg for seg, (k, n) in per_segment.items() if k == n]

    by_group: dict[str, GroupStability] = {}
    if corpus is not None:
        groups: dict[str, list[str]] = {}
        for seg in sorted(base):
            groups.setdefault(corpus.group_of(seg), []).append(seg)
        for group, ids in sorted(groups.items()):
            by_group[group] = GroupStability(
                evaluated=len(ids),
                flagged_any=sum(1 for s in ids if per_segment[s][0] > 0),
                persistent=sum(1 for s in ids if per_segment[s][0] == n_pairs),
            )
    return StabilityReport(n_pairs, per_segment, persistent, by_group)
