import { BatchResponse, Progress, Verdict, VerdictAck } from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin client for the review service; fetch is injectable for tests. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
    private readonly reviewer: string = 'reviewer',
  ) {}

  async fetchBatch(cursor = 0, limit = 50): Promise<BatchResponse> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/batch?cursor=${cursor}&limit=${limit}`);
    if (!resp.ok) {
      throw new Error(`batch fetch failed: ${resp.status}`);
    }
    return (await resp.json()) as BatchResponse;
  }

  /** Fetch the whole batch, following the cursor. */
  async fetchAllItems(limit = 50): Promise<BatchResponse['items']> {
    const items: BatchResponse['items'] = [];
    let cursor: number | null = 0;
    while (cursor !== null) {
      const page: BatchResponse = await this.fetchBatch(cursor, limit);
      items.push(...page.items);
      cursor = page.cursor;
    }
    return items;
  }

  imageUrl(imageId: string): string {
    return `${this.baseUrl}/api/image/${encodeURIComponent(imageId)}`;
  }

  async postVerdict(verdict: Verdict): Promise<VerdictAck> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/verdict`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json', 'X-Reviewer': this.reviewer },
      body: JSON.stringify(verdict),
    });
    if (!resp.ok) {
      throw new Error(`verdict rejected: ${resp.status}`);
    }
    return (await resp.json()) as VerdictAck;
  }

  async fetchProgress(): Promise<Progress> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/progress`);
    if (!resp.ok) {
      throw new Error(`progress fetch failed: ${resp.status}`);
    }
    return (await resp.json()) as Progress;
  }

  async fetchExport(): Promise<unknown> {
    const resp = await this.fetchImpl(`${this.baseUrl}/api/export`);
    if (!resp.ok) {
      throw new Error(`export fetch failed: ${resp.status}`);
    }
    return resp.json();
  }
}
