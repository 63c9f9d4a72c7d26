import { ApiClient, ApiError, NetworkError } from "./api";
import { OfflineQueue } from "./queue";
import type { SessionState, SeverityLabel, Submission, Task } from "./types";
import { SEVERITY_LABELS } from "./types";

export interface SessionOptions {
  annotatorId: string;
  blindMode?: boolean;
  now?: () => number;
}

type Listener = (state: SessionState) => void;

/**
 * Drives the annotation workflow. The controller never invents labels:
 * every displayed value comes from the service, and every submit ends
 * acknowledged, inline-rejected, or visibly queued for retry.
 */
export class SessionController {
  private state: SessionState;
  private listeners: Listener[] = [];
  private now: () => number;

  constructor(
    private api: ApiClient,
    private queue: OfflineQueue,
    options: SessionOptions,
  ) {
    this.now = options.now ?? (() => Date.now());
    this.state = {
      annotatorId: options.annotatorId,
      blindMode: options.blindMode ?? true,
      tasks: [],
      cursor: 0,
      current: null,
      selectedLabel: null,
      progress: null,
      pendingCount: this.queue.size,
      banner: null,
      inlineError: null,
      allLabeled: false,
    };
  }

  getState(): SessionState {
    return { ...this.state, tasks: [...this.state.tasks] };
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.getState());
    }
  }

  /** Fetch the task queue and progress counters from the service. */
  async loadQueue(status: string = "unlabeled"): Promise<void> {
    try {
      const tasks = await this.api.tasks(status, 200, this.state.blindMode);
      const progress = await this.api.progress();
      this.update({
        tasks,
        cursor: 0,
        current: tasks[0] ?? null,
        progress,
        banner: null,
        inlineError: null,
        allLabeled: tasks.length === 0,
      });
    } catch (err) {
      if (err instanceof NetworkError) {
        this.update({ banner: "service unreachable - will retry" });
        return;
      }
      throw err;
    }
  }

  select(label: SeverityLabel): void {
    this.update({ selectedLabel: label, inlineError: null });
  }

  selectByIndex(index: number): void {
    const label = SEVERITY_LABELS[index];
    if (label) this.select(label);
  }

  /**
   * Submit a label for the current task. Success and offline both
   * advance (optimistic UI); a server-side rejection shows inline and
   * stays on the task.
   */
  async submit(label?: SeverityLabel): Promise<"acked" | "queued" | "rejected"> {
    const chosen = label ?? this.state.selectedLabel;
    const task = this.state.current;
    if (!task || !chosen) {
      this.update({ inlineError: "pick a label first" });
      return "rejected";
    }
    const submission: Submission = {
      doc_id: task.doc_id,
      annotator_id: this.state.annotatorId,
      label: chosen,
      submitted_at: this.now(),
      blind_mode: this.state.blindMode,
    };
    try {
      await this.api.submit(submission);
    } catch (err) {
      if (err instanceof NetworkError) {
        this.queue.enqueue(submission);
        this.update({ pendingCount: this.queue.size });
        this.advance();
        return "queued";
      }
      if (err instanceof ApiError) {
        const detail = err.detail as { detail?: { error?: string } | string } | null;
        const inner = detail && typeof detail === "object" ? detail.detail : undefined;
        const message =
          typeof inner === "string"
            ? inner
            : (inner?.error ?? `server rejected the annotation (${err.status})`);
        this.update({ inlineError: message });
        return "rejected";
      }
      throw err;
    }
    await this.refreshProgress();
    this.advance();
    return "acked";
  }

  /** Move to the next task; entering the empty state shows the summary. */
  private advance(): void {
    const tasks = this.state.tasks.filter((t) => t.doc_id !== this.state.current?.doc_id);
    const cursor = Math.min(this.state.cursor, Math.max(tasks.length - 1, 0));
    this.update({
      tasks,
      cursor,
      current: tasks[cursor] ?? null,
      selectedLabel: null,
      inlineError: null,
      allLabeled: tasks.length === 0,
    });
  }

  async refreshProgress(): Promise<void> {
    try {
      const progress = await this.api.progress();
      this.update({ progress });
    } catch (err) {
      if (!(err instanceof NetworkError)) throw err;
    }
  }

  /**
   * Blind off -> on hides votes without refetching; on -> off fetches
   * the current task's votes from the service (single source of truth).
   */
  async toggleBlindMode(): Promise<void> {
    const blindMode = !this.state.blindMode;
    if (blindMode) {
      const tasks = this.state.tasks.map((t) => {
        const { machine_votes: _dropped, ...rest } = t;
        return rest as Task;
      });
      const current = this.state.current
        ? tasks.find((t) => t.doc_id === this.state.current?.doc_id) ?? null
        : null;
      this.update({ blindMode, tasks, current });
      return;
    }
    this.update({ blindMode });
    const task = this.state.current;
    if (task) {
      try {
        const fresh = await this.api.task(task.doc_id, false);
        const tasks = this.state.tasks.map((t) => (t.doc_id === fresh.doc_id ? fresh : t));
        this.update({ tasks, current: fresh });
      } catch (err) {
        if (!(err instanceof NetworkError)) throw err;
        this.update({ banner: "service unreachable - will retry" });
      }
    }
  }

  /** Deliver queued submissions; safe to call repeatedly. */
  async sync(): Promise<number> {
    const result = await this.queue.flush(this.api);
    this.update({ pendingCount: result.remaining });
    if (result.delivered > 0) {
      await this.refreshProgress();
    }
    if (result.rejected.length > 0) {
      this.update({
        inlineError: `${result.rejected.length} queued submission(s) were rejected by the server`,
      });
    }
    return result.delivered;
  }
}
