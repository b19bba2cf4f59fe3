// Highlight computation for transcript diffs. Character ranges are derived
// purely from the token offsets and flagged token spans the service
// provides; the client performs no re-detection of its own.

import type { FlaggedSpan, TokenInfo } from "./types.js";

export interface CharRange {
  start: number;
  end: number; // exclusive
}

export interface TextSegment {
  text: string;
  highlighted: boolean;
  start: number;
  end: number;
}

/** Character range covered by one flagged token span. */
export function spanCharRange(tokens: TokenInfo[], span: FlaggedSpan): CharRange | null {
  if (span.length < 1 || span.start < 0 || span.start + span.length > tokens.length) {
    return null; // malformed span: skip rather than mis-highlight
  }
  const first = tokens[span.start];
  const last = tokens[span.start + span.length - 1];
  return { start: first.start, end: last.end };
}

/** Sorted, merged character ranges for a run's flagged spans. */
export function highlightRanges(tokens: TokenInfo[], spans: FlaggedSpan[]): CharRange[] {
  const ranges = spans
    .map((span) => spanCharRange(tokens, span))
    .filter((r): r is CharRange => r !== null)
    .sort((a, b) => a.start - b.start);
  const merged: CharRange[] = [];
  for (const range of ranges) {
    const previous = merged[merged.length - 1];
    if (previous && range.start <= previous.end) {
      previous.end = Math.max(previous.end, range.end);
    } else {
      merged.push({ ...range });
    }
  }
  return merged;
}

/** Split run text into plain/highlighted segments covering the whole text. */
export function segmentText(
  text: string,
  tokens: TokenInfo[],
  spans: FlaggedSpan[],
): TextSegment[] {
  const segments: TextSegment[] = [];
  let cursor = 0;
  for (const range of highlightRanges(tokens, spans)) {
    if (range.start > cursor) {
      segments.push({
        text: text.slice(cursor, range.start),
        highlighted: false,
        start: cursor,
        end: range.start,
      });
    }
    segments.push({
      text: text.slice(range.start, range.end),
      highlighted: true,
      start: range.start,
      end: range.end,
    });
    cursor = range.end;
  }
  if (cursor < text.length) {
    segments.push({ text: text.slice(cursor), highlighted: false, start: cursor, end: text.length });
  }
  return segments;
}

export function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

/** HTML for one run: flagged text wrapped in <mark> (the bolding convention). */
export function renderRunHtml(text: string, tokens: TokenInfo[], spans: FlaggedSpan[]): string {
  return segmentText(text, tokens, spans)
    .map((segment) =>
      segment.highlighted
        ? `<mark class="hl">${escapeHtml(segment.text)}</mark>`
        : escapeHtml(segment.text),
    )
    .join("");
}
