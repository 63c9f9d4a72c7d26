import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { MemoryStorage, OfflineQueue } from "../src/queue";
import type { Submission } from "../src/types";
import { FakeServer } from "./fakeserver";

function submission(docId: string, at = 1, label = "Mild"): Submission {
  return {
    doc_id: docId,
    annotator_id: "expert-1",
    label,
    submitted_at: at,
    blind_mode: true,
  };
}

const DOCS = [
  { doc_id: "d1", text: "one", language: "en" },
  { doc_id: "d2", text: "two", language: "en" },
];

describe("OfflineQueue", () => {
  it("persists submissions through its storage", () => {
    const storage = new MemoryStorage();
    const queue = new OfflineQueue(storage);
    queue.enqueue(submission("d1"));
    expect(new OfflineQueue(storage).size).toBe(1);
  });

  it("deduplicates identical identities locally", () => {
    const queue = new OfflineQueue();
    queue.enqueue(submission("d1", 5));
    queue.enqueue(submission("d1", 5));
    queue.enqueue(submission("d1", 6)); // different identity, kept
    expect(queue.size).toBe(2);
  });

  it("flush delivers everything to a reachable server", async () => {
    const server = new FakeServer(DOCS);
    const api = new ApiClient("http://fake", server.fetchImpl);
    const queue = new OfflineQueue();
    queue.enqueue(submission("d1", 1));
    queue.enqueue(submission("d2", 2));
    const result = await queue.flush(api);
    expect(result.delivered).toBe(2);
    expect(result.remaining).toBe(0);
    expect(server.annotations.size).toBe(2);
  });

  it("flush stops on network failure and keeps the rest", async () => {
    const server = new FakeServer(DOCS);
    server.offline = true;
    const api = new ApiClient("http://fake", server.fetchImpl);
    const queue = new OfflineQueue();
    queue.enqueue(submission("d1", 1));
    const result = await queue.flush(api);
    expect(result.delivered).toBe(0);
    expect(result.remaining).toBe(1);
  });

  it("redelivery after a raced first delivery applies exactly once", async () => {
    const server = new FakeServer(DOCS);
    const api = new ApiClient("http://fake", server.fetchImpl);
    // first delivery succeeded server-side...
    await api.submit(submission("d1", 9));
    expect(server.submitCount).toBe(1);
    // ...but the client thought it failed and queued a retry
    const queue = new OfflineQueue();
    queue.enqueue(submission("d1", 9));
    const result = await queue.flush(api);
    expect(result.delivered).toBe(1); // acknowledged as duplicate
    expect(result.remaining).toBe(0);
    expect(server.submitCount).toBe(1); // not applied twice
  });

  it("server-rejected submissions leave the queue and are reported", async () => {
    const server = new FakeServer(DOCS);
    const api = new ApiClient("http://fake", server.fetchImpl);
    const queue = new OfflineQueue();
    queue.enqueue({ ...submission("d1", 1), label: "Bogus" });
    queue.enqueue(submission("d2", 2));
    const result = await queue.flush(api);
    expect(result.rejected).toHaveLength(1);
    expect(result.delivered).toBe(1);
    expect(result.remaining).toBe(0);
  });
});
