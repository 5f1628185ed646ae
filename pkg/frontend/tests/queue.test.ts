import { describe, expect, it } from 'vitest';

import { KeyValueStore, VerdictQueue } from '../src/queue.js';
import { Verdict, VerdictAck } from '../src/types.js';

class MemoryStore implements KeyValueStore {
  private map = new Map<string, string>();
  getItem(key: string): string | null {
    return this.map.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }
  removeItem(key: string): void {
    this.map.delete(key);
  }
}

function verdict(id: string, decision: Verdict['decision'] = 'accept'): Verdict {
  return { annotation_id: id, decision, timestamp: 1 };
}

const ack = (v: Verdict): VerdictAck => ({
  acknowledged: true,
  annotation_id: v.annotation_id,
  status: 'accepted',
});

describe('VerdictQueue', () => {
  it('drains in FIFO order', async () => {
    const q = new VerdictQueue();
    const sent: string[] = [];
    q.enqueue(verdict('a#0'));
    q.enqueue(verdict('b#0'));
    q.enqueue(verdict('c#0'));
    const n = await q.drain(async (v) => {
      sent.push(v.annotation_id);
      return ack(v);
    });
    expect(n).toBe(3);
    expect(sent).toEqual(['a#0', 'b#0', 'c#0']);
    expect(q.length).toBe(0);
  });

  it('re-deciding replaces the queued verdict instead of duplicating', () => {
    const q = new VerdictQueue();
    q.enqueue(verdict('a#0', 'accept'));
    q.enqueue(verdict('a#0', 'reject'));
    expect(q.length).toBe(1);
    expect(q.pending()[0].decision).toBe('reject');
  });

  it('keeps verdicts on network failure and delivers exactly once after reconnect', async () => {
    const q = new VerdictQueue();
    q.enqueue(verdict('a#0'));
    q.enqueue(verdict('b#0'));

    let online = false;
    const deliveries: string[] = [];
    const post = async (v: Verdict): Promise<VerdictAck> => {
      if (!online) {
        throw new Error('offline');
      }
      deliveries.push(v.annotation_id);
      return ack(v);
    };

    expect(await q.drain(post)).toBe(0); // offline: nothing lost, nothing sent
    expect(q.length).toBe(2);
    online = true;
    expect(await q.drain(post)).toBe(2);
    expect(await q.drain(post)).toBe(0); // nothing left to resend
    expect(deliveries).toEqual(['a#0', 'b#0']);
  });

  it('only one drain runs at a time', async () => {
    const q = new VerdictQueue();
    q.enqueue(verdict('a#0'));
    let resolveFirst: (() => void) | null = null;
    const slowPost = (v: Verdict) =>
      new Promise<VerdictAck>((resolve) => {
        resolveFirst = () => resolve(ack(v));
      });
    const first = q.drain(slowPost);
    const second = await q.drain(slowPost); // concurrent call is a no-op
    expect(second).toBe(0);
    resolveFirst!();
    expect(await first).toBe(1);
  });

  it('persists across reloads until acknowledged', async () => {
    const store = new MemoryStore();
    const q1 = new VerdictQueue(store);
    q1.enqueue(verdict('a#0'));
    q1.enqueue(verdict('b#0'));

    // simulated reload: a fresh queue restores the unsent verdicts
    const q2 = new VerdictQueue(store);
    expect(q2.length).toBe(2);
    await q2.drain(async (v) => ack(v));
    expect(new VerdictQueue(store).length).toBe(0);
  });

  it('drops corrupt persisted state instead of crashing', () => {
    const store = new MemoryStore();
    store.setItem('hoiforge.verdict-queue', '{nope');
    expect(new VerdictQueue(store).length).toBe(0);
  });
});
