// Queue state management for the adjudication console.
//
// The controller owns no authoritative data: every mutation is a POST to
// the service, and anything shown as committed has been acknowledged.
// Submissions advance optimistically and roll back if the service rejects.

import { ApiClient, ApiError } from "./api.js";
import type {
  CandidateDetail,
  CandidateSummary,
  LabelForm,
  Report,
  StatusCounts,
} from "./types.js";

export interface QueueState {
  queue: CandidateSummary[];
  counts: StatusCounts;
  current: CandidateDetail | null;
  report: Report | null;
  submitting: boolean;
  error: string | null;
  serviceDown: boolean;
}

const EMPTY_COUNTS: StatusCounts = { pending: 0, confirmed: 0, rejected: 0 };

export class QueueController {
  readonly state: QueueState = {
    queue: [],
    counts: { ...EMPTY_COUNTS },
    current: null,
    report: null,
    submitting: false,
    error: null,
    serviceDown: false,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (state: QueueState) => void = () => {},
  ) {}

  private emit(): void {
    this.onChange(this.state);
  }

  /** Full refresh: pending queue, counts, current selection, report. */
  async load(): Promise<void> {
    try {
      const page = await this.api.listCandidates("pending");
      this.state.queue = page.candidates;
      this.state.counts = page.counts;
      this.state.serviceDown = false;
      if (this.state.queue.length > 0) {
        const keep = this.state.current?.candidate_id;
        const target =
          (keep && this.state.queue.find((c) => c.candidate_id === keep)) ||
          this.state.queue[0];
        this.state.current = await this.api.candidateDetail(target.candidate_id);
      } else {
        this.state.current = null;
      }
      this.state.report = await this.api.report();
      this.state.error = null;
    } catch (err) {
      this.markFailure(err);
    }
    this.emit();
  }

  /** Poll tick: refresh counts and queue without dropping the selection. */
  async refresh(): Promise<void> {
    try {
      const page = await this.api.listCandidates("pending");
      this.state.queue = page.candidates;
      this.state.counts = page.counts;
      this.state.report = await this.api.report();
      this.state.serviceDown = false;
    } catch (err) {
      this.markFailure(err);
    }
    this.emit();
  }

  async select(candidateId: string): Promise<void> {
    try {
      this.state.current = await this.api.candidateDetail(candidateId);
      this.state.serviceDown = false;
      this.state.error = null;
    } catch (err) {
      this.markFailure(err);
    }
    this.emit();
  }

  async selectOffset(offset: number): Promise<void> {
    if (!this.state.current || this.state.queue.length === 0) return;
    const index = this.state.queue.findIndex(
      (c) => c.candidate_id === this.state.current?.candidate_id,
    );
    const next = this.state.queue[index + offset];
    if (next) await this.select(next.candidate_id);
  }

  /**
   * Submit a label for the current candidate: optimistic advance with
   * rollback on rejection. Returns true when the service acknowledged.
   * A second call while one is in flight is a no-op.
   */
  async adjudicate(form: LabelForm): Promise<boolean> {
    if (this.state.submitting || !this.state.current) return false;
    const candidate = this.state.current;
    const index = this.state.queue.findIndex(
      (c) => c.candidate_id === candidate.candidate_id,
    );
    if (index < 0) return false;

    // optimistic: drop from the pending queue and advance
    const removed = this.state.queue.splice(index, 1)[0];
    const previousCounts = { ...this.state.counts };
    this.state.counts.pending -= 1;
    this.state.counts[form.confirmed ? "confirmed" : "rejected"] += 1;
    this.state.submitting = true;
    this.state.error = null;
    this.emit();

    try {
      await this.api.submitLabel(candidate.candidate_id, form);
    } catch (err) {
      // rollback: restore the queue entry, counts, and selection
      this.state.queue.splice(index, 0, removed);
      this.state.counts = previousCounts;
      this.state.submitting = false;
      this.markFailure(err);
      this.emit();
      return false;
    }

    this.state.submitting = false;
    const next = this.state.queue[Math.min(index, this.state.queue.length - 1)];
    if (next) {
      try {
        this.state.current = await this.api.candidateDetail(next.candidate_id);
      } catch (err) {
        this.markFailure(err);
      }
    } else {
      this.state.current = null;
    }
    // one refresh cycle: the served report reflects the acknowledged label
    try {
      this.state.report = await this.api.report();
    } catch (err) {
      this.markFailure(err);
    }
    this.emit();
    return true;
  }

  private markFailure(err: unknown): void {
    if (err instanceof ApiError && err.status === 0) {
      this.state.serviceDown = true; // retry banner; no data loss
      this.state.error = err.message;
    } else if (err instanceof Error) {
      this.state.error = err.message;
    } else {
      this.state.error = String(err);
    }
  }
}
