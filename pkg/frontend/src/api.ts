/** Thin typed client over the review API. Every non-2xx response becomes an
 * ApiError carrying the server's {code, message, detail} body. */

import type {
  ArticleMeta,
  CampaignSummary,
  CandidateDetail,
  CandidateRow,
  DecisionRequest,
  QueuePayload,
  RunStatusPayload,
  StormsPayload,
} from './types';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = 'ApiError';
  }

  get isConflict(): boolean {
    return this.status === 409;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, 'network', `API unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      let body: { code?: string; message?: string; detail?: unknown } = {};
      try {
        body = await response.json();
      } catch {
        // non-JSON error body; fall through to defaults
      }
      throw new ApiError(
        response.status,
        body.code ?? 'error',
        body.message ?? `HTTP ${response.status}`,
        body.detail,
      );
    }
    return (await response.json()) as T;
  }

  listCampaigns(): Promise<CampaignSummary[]> {
    return this.request('/campaigns');
  }

  candidates(campaignId: string, status = 'pending'): Promise<QueuePayload> {
    const query = status ? `?status=${encodeURIComponent(status)}` : '';
    return this.request(`/campaigns/${encodeURIComponent(campaignId)}/candidates${query}`);
  }

  candidateDetail(candidateId: string): Promise<CandidateDetail> {
    return this.request(`/candidates/${encodeURIComponent(candidateId)}`);
  }

  candidateArticles(candidateId: string, date?: string): Promise<{ articles: ArticleMeta[] }> {
    const query = date ? `?date=${encodeURIComponent(date)}` : '';
    return this.request(`/candidates/${encodeURIComponent(candidateId)}/articles${query}`);
  }

  decide(candidateId: string, body: DecisionRequest): Promise<CandidateRow> {
    return this.request(`/candidates/${encodeURIComponent(candidateId)}/decision`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  triggerIteration(campaignId: string): Promise<RunStatusPayload> {
    return this.request(`/campaigns/${encodeURIComponent(campaignId)}/iterations`, {
      method: 'POST',
    });
  }

  runStatus(runId: string): Promise<RunStatusPayload> {
    return this.request(`/runs/${encodeURIComponent(runId)}`);
  }

  storms(params: { from?: string; to?: string; campaign?: string } = {}): Promise<StormsPayload> {
    const parts = Object.entries(params)
      .filter(([, v]) => v)
      .map(([k, v]) => `${k}=${encodeURIComponent(v as string)}`);
    return this.request(`/storms${parts.length ? '?' + parts.join('&') : ''}`);
  }
}
