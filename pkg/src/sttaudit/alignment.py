"""Tokenization, optimal edit-distance alignment, WER, and span extraction.

Everything here is pure and deterministic: given the same token lists, the
same alignment (and therefore the same spans) comes back on every platform.
Tie-breaking between equal-cost alignments is fixed so that downstream
consumers (detection, review UI) always see the same flagged regions.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Sequence

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"


@dataclass(frozen=True)
class Token:
    """One normalized token plus its character range in the original text."""

    surface: str
    start: int
    end: int  # exclusive


@dataclass(frozen=True)
class AlignOp:
    """A single alignment step; index fields are None when not consumed."""

    op: str
    ref_index: int | None
    hyp_index: int | None


@dataclass(frozen=True)
class TokenSpan:
    """A contiguous run of tokens (start index, token count, joined text)."""

    start: int
    length: int
    text: str

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class PairedSpan:
    """An unstable region reported on both sides of a two-run alignment.

    Either side may be None when the region is purely insertions/deletions
    relative to the other run.
    """

    span_a: TokenSpan | None
    span_b: TokenSpan | None


@dataclass(frozen=True)
class AlignmentResult:
    ref: tuple[str, ...]
    hyp: tuple[str, ...]
    ops: tuple[AlignOp, ...]
    edit_distance: int
    wer: float


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def normalize(text: str) -> list[Token]:
    """Split text into normalized tokens with source character ranges.

    Rules: split on whitespace; strip leading/trailing punctuation per
    token; lowercase the surface; drop tokens that are empty after
    stripping. Non-Latin scripts are segmented by whitespace only, so a
    contiguous CJK run stays one token. Character offsets always reference
    the original (unlowercased) string.
    """
    tokens: list[Token] = []
    i, n = 0, len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        start, end = i, j
        while start < end and _is_punct(text[start]):
            start += 1
        while end > start and _is_punct(text[end - 1]):
            end -= 1
        if end > start:
            tokens.append(Token(text[start:end].lower(), start, end))
        i = j
    return tokens


def token_surfaces(text: str) -> list[str]:
    """Normalized token surfaces only, for callers that ignore offsets."""
    return [t.surface for t in normalize(text)]


def align(ref: Sequence[str], hyp: Sequence[str]) -> AlignmentResult:
    """Optimal unit-cost alignment of two token sequences.

    Ties between equal-cost alignments resolve match > substitute >
    delete > insert, scanning left to right. WER uses a denominator of
    max(1, len(ref)) so empty references do not divide by zero.
    """
    ref = tuple(ref)
    hyp = tuple(hyp)
    m, n = len(ref), len(hyp)
    # dist[i][j] = edit distance between ref[i:] and hyp[j:]
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dist[i][n] = m - i
    for j in range(n + 1):
        dist[m][j] = n - j
    for i in range(m - 1, -1, -1):
        row = dist[i]
        below = dist[i + 1]
        for j in range(n - 1, -1, -1):
            if ref[i] == hyp[j]:
                row[j] = below[j + 1]
            else:
                row[j] = 1 + min(below[j + 1], below[j], row[j + 1])

    ops: list[AlignOp] = []
    i = j = 0
    while i < m or j < n:
        here = dist[i][j]
        if i < m and j < n and ref[i] == hyp[j] and dist[i + 1][j + 1] == here:
            ops.append(AlignOp(MATCH, i, j))
            i += 1
            j += 1
        elif i < m and j < n and dist[i + 1][j + 1] + 1 == here:
            ops.append(AlignOp(SUBSTITUTE, i, j))
            i += 1
            j += 1
        elif i < m and dist[i + 1][j] + 1 == here:
            ops.append(AlignOp(DELETE, i, None))
            i += 1
        else:
            ops.append(AlignOp(INSERT, None, j))
            j += 1

    distance = dist[0][0]
    return AlignmentResult(ref, hyp, tuple(ops), distance, distance / max(1, m))


def _span(tokens: Sequence[str], start: int, stop: int) -> TokenSpan:
    return TokenSpan(start, stop - start, " ".join(tokens[start:stop]))


def insertion_spans(alignment: AlignmentResult, min_len: int = 2) -> list[TokenSpan]:
    """Maximal runs of consecutive insert ops over the hypothesis.

    Substitutions do not join runs. Runs shorter than min_len tokens are
    dropped. Returned spans are sorted and disjoint.
    """
    spans: list[TokenSpan] = []
    run_start: int | None = None
    run_stop = 0
    for op in alignment.ops:
        if op.op == INSERT:
            if run_start is None:
                run_start = op.hyp_index
            run_stop = op.hyp_index + 1  # type: ignore[operator]
        else:
            if run_start is not None and run_stop - run_start >= min_len:
                spans.append(_span(alignment.hyp, run_start, run_stop))
            run_start = None
    if run_start is not None and run_stop - run_start >= min_len:
        spans.append(_span(alignment.hyp, run_start, run_stop))
    return spans


def unstable_regions(
    hyp_a: Sequence[str], hyp_b: Sequence[str], min_len: int = 2
) -> list[PairedSpan]:
    """Maximal non-matching regions between two hypothesis token lists.

    Aligns hyp_a against hyp_b and collects maximal runs of non-match ops.
    A run is kept when it covers at least min_len tokens on its longer
    side. Each region reports the covered span in both runs; a side with
    no tokens consumed comes back as None.
    """
    result = align(hyp_a, hyp_b)
    regions: list[PairedSpan] = []
    a_idx: list[int] = []
    b_idx: list[int] = []

    def flush() -> None:
        if not a_idx and not b_idx:
            return
        if max(len(a_idx), len(b_idx)) >= min_len:
            span_a = _span(result.ref, a_idx[0], a_idx[-1] + 1) if a_idx else None
            span_b = _span(result.hyp, b_idx[0], b_idx[-1] + 1) if b_idx else None
            regions.append(PairedSpan(span_a, span_b))
        a_idx.clear()
        b_idx.clear()

    for op in result.ops:
        if op.op == MATCH:
            flush()
            continue
        if op.ref_index is not None:
            a_idx.append(op.ref_index)
        if op.hyp_index is not None:
            b_idx.append(op.hyp_index)
    flush()
    return regions


def intersect_spans(
    spans_a: Sequence[TokenSpan], spans_b: Sequence[TokenSpan], tokens: Sequence[str]
) -> list[TokenSpan]:
    """Token-index intersection of two span lists, re-chunked to maximal runs."""
    covered_a = {i for s in spans_a for i in range(s.start, s.stop)}
    covered_b = {i for s in spans_b for i in range(s.start, s.stop)}
    common = sorted(covered_a & covered_b)
    spans: list[TokenSpan] = []
    run: list[int] = []
    for idx in common:
        if run and idx != run[-1] + 1:
            spans.append(_span(tokens, run[0], run[-1] + 1))
            run = []
        run.append(idx)
    if run:
        spans.append(_span(tokens, run[0], run[-1] + 1))
    return spans
