/** Review-session state: the pending queue, decision tally, and optimistic
 * updates. A decision removes its row immediately; a server conflict puts the
 * refreshed row back (marked) so nothing is silently dropped. The server is
 * always the authority — no decision state lives only in the client. */

import { ApiClient, ApiError } from './api';
import type { CandidateRow, DecisionRequest } from './types';

export interface DecisionOutcome {
  ok: boolean;
  conflict: boolean;
  /** server-side record after the call (fresh state on conflict) */
  record?: CandidateRow;
  message?: string;
}

export type SessionListener = () => void;

function byStart(a: CandidateRow, b: CandidateRow): number {
  return a.start < b.start ? -1 : a.start > b.start ? 1 : a.id < b.id ? -1 : 1;
}

export class ReviewSession {
  rows: CandidateRow[] = [];
  total = 0;
  tally = { validated: 0, rejected: 0 };
  /** candidate ids whose last decision hit a conflict, with the server row */
  conflicts = new Map<string, CandidateRow>();
  lastError: string | null = null;

  private listeners: SessionListener[] = [];

  constructor(
    readonly api: ApiClient,
    readonly campaignId: string,
    readonly expert: string = 'reviewer',
  ) {}

  subscribe(listener: SessionListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async load(): Promise<void> {
    const payload = await this.api.candidates(this.campaignId, 'pending');
    this.rows = [...payload.candidates].sort(byStart);
    this.total = payload.total;
    this.lastError = null;
    this.notify();
  }

  row(candidateId: string): CandidateRow | undefined {
    return this.rows.find((r) => r.id === candidateId);
  }

  /** Client-side guard mirroring the server rule. */
  validateInput(body: DecisionRequest): string | null {
    if (body.verdict === 'validated' && !(body.label ?? '').trim()) {
      return 'a validated storm needs a descriptive label';
    }
    return null;
  }

  async decide(candidateId: string, body: DecisionRequest): Promise<DecisionOutcome> {
    const clientError = this.validateInput(body);
    if (clientError) {
      return { ok: false, conflict: false, message: clientError };
    }
    const index = this.rows.findIndex((r) => r.id === candidateId);
    const stashed = index >= 0 ? this.rows[index] : undefined;
    if (stashed) {
      this.rows = this.rows.filter((r) => r.id !== candidateId);
      this.total = Math.max(0, this.total - 1);
      this.notify();
    }
    try {
      const record = await this.api.decide(candidateId, { expert: this.expert, ...body });
      this.tally[body.verdict] += 1;
      this.conflicts.delete(candidateId);
      this.lastError = null;
      this.notify();
      return { ok: true, conflict: false, record };
    } catch (err) {
      if (err instanceof ApiError && err.isConflict) {
        // decided elsewhere: reconcile with the server's state of the row
        const server = await this.refreshRow(candidateId);
        if (server) this.conflicts.set(candidateId, server);
        this.notify();
        return { ok: false, conflict: true, record: server, message: err.message };
      }
      // transport or validation failure: restore the row untouched
      if (stashed) {
        this.rows = [...this.rows, stashed].sort(byStart);
        this.total += 1;
      }
      this.lastError = err instanceof Error ? err.message : String(err);
      this.notify();
      return { ok: false, conflict: false, message: this.lastError ?? undefined };
    }
  }

  private async refreshRow(candidateId: string): Promise<CandidateRow | undefined> {
    try {
      const payload = await this.api.candidates(this.campaignId, 'all');
      const server = payload.candidates.find((r) => r.id === candidateId);
      // the queue keeps only pending rows; a decided row stays out of it
      this.rows = payload.candidates.filter((r) => r.status === 'pending').sort(byStart);
      this.total = this.rows.length;
      return server;
    } catch {
      return undefined;
    }
  }
}
