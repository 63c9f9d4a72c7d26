import { ApiClient, ApiError, NetworkError } from "./api";
import type { Submission } from "./types";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export class MemoryStorage implements StorageLike {
  private data = new Map<string, string>();
  getItem(key: string): string | null {
    return this.data.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

const KEY = "sevlab_pending_annotations_v1";

export interface FlushResult {
  delivered: number;
  rejected: Submission[];
  remaining: number;
}

/**
 * Holds submissions that could not reach the service. Flushing retries
 * them in order; the server deduplicates on the (doc_id, annotator_id,
 * submitted_at) identity, so a retry that raced an earlier delivery is
 * acknowledged as "duplicate" and comes off the queue without being
 * applied twice.
 */
export class OfflineQueue {
  constructor(private storage: StorageLike = new MemoryStorage()) {}

  list(): Submission[] {
    const raw = this.storage.getItem(KEY);
    if (!raw) return [];
    try {
      return JSON.parse(raw) as Submission[];
    } catch {
      return [];
    }
  }

  private save(items: Submission[]): void {
    this.storage.setItem(KEY, JSON.stringify(items));
  }

  get size(): number {
    return this.list().length;
  }

  enqueue(submission: Submission): void {
    const items = this.list();
    const exists = items.some(
      (s) =>
        s.doc_id === submission.doc_id &&
        s.annotator_id === submission.annotator_id &&
        s.submitted_at === submission.submitted_at,
    );
    if (!exists) {
      items.push(submission);
      this.save(items);
    }
  }

  /**
   * Try to deliver everything. Stops at the first network failure
   * (still offline); server-side rejections (4xx) are dropped from the
   * queue and reported, since retrying them can never succeed.
   */
  async flush(api: ApiClient): Promise<FlushResult> {
    const items = this.list();
    const rejected: Submission[] = [];
    let delivered = 0;
    let index = 0;
    while (index < items.length) {
      const item = items[index];
      try {
        await api.submit(item); // "ok" and "duplicate" both count as delivered
        delivered += 1;
        items.splice(index, 1);
        this.save(items);
      } catch (err) {
        if (err instanceof NetworkError) {
          break; // still offline; keep the rest queued
        }
        if (err instanceof ApiError) {
          rejected.push(item);
          items.splice(index, 1);
          this.save(items);
          continue;
        }
        throw err;
      }
    }
    return { delivered, rejected, remaining: this.list().length };
  }
}
