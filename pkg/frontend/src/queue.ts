import { Verdict, VerdictAck } from './types.js';

/** Minimal persistence surface (localStorage in the browser, a map in tests). */
export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const STORAGE_KEY = 'hoiforge.verdict-queue';

export type PostFn = (verdict: Verdict) => Promise<VerdictAck>;

/**
 * FIFO queue of unacknowledged verdicts.
 *
 * A verdict stays queued (and persisted) until the server acknowledges it, so
 * nothing is lost on reload or while offline.  Re-deciding an annotation that
 * is still queued replaces the queued verdict instead of duplicating it, and
 * only one drain runs at a time, so each verdict is delivered once.
 */
export class VerdictQueue {
  private queue: Verdict[] = [];
  private draining = false;

  constructor(private readonly store: KeyValueStore | null = null) {
    this.restore();
  }

  get length(): number {
    return this.queue.length;
  }

  pending(): Verdict[] {
    return [...this.queue];
  }

  enqueue(verdict: Verdict): void {
    this.queue = this.queue.filter((v) => v.annotation_id !== verdict.annotation_id);
    this.queue.push(verdict);
    this.persist();
  }

  /**
   * Send queued verdicts in order; stops at the first network failure and
   * keeps everything unacknowledged.  Returns the number delivered.
   */
  async drain(post: PostFn): Promise<number> {
    if (this.draining) {
      return 0;
    }
    this.draining = true;
    let delivered = 0;
    try {
      while (this.queue.length > 0) {
        const head = this.queue[0];
        try {
          await post(head);
        } catch {
          break; // offline or server error: retry on the next drain
        }
        this.queue.shift();
        this.persist();
        delivered += 1;
      }
    } finally {
      this.draining = false;
    }
    return delivered;
  }

  private persist(): void {
    if (!this.store) {
      return;
    }
    if (this.queue.length === 0) {
      this.store.removeItem(STORAGE_KEY);
    } else {
      this.store.setItem(STORAGE_KEY, JSON.stringify(this.queue));
    }
  }

  private restore(): void {
    if (!this.store) {
      return;
    }
    const raw = this.store.getItem(STORAGE_KEY);
    if (!raw) {
      return;
    }
    try {
      this.queue = JSON.parse(raw) as Verdict[];
    } catch {
      this.store.removeItem(STORAGE_KEY);
    }
  }
}
