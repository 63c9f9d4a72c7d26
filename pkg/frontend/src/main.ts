import { ApiClient } from "./api";
import { actionForKey } from "./keyboard";
import { OfflineQueue, type StorageLike } from "./queue";
import { renderApp } from "./render";
import { SessionController } from "./session";
import type { Band } from "./types";

function browserStorage(): StorageLike {
  try {
    window.localStorage.setItem("__probe", "1");
    return window.localStorage;
  } catch {
    return { getItem: () => null, setItem: () => undefined };
  }
}

export async function boot(root: HTMLElement): Promise<SessionController> {
  const api = new ApiClient("");
  const storage = browserStorage();
  const annotatorId =
    storage.getItem("sevlab_annotator_id") ??
    window.prompt("annotator id", "expert-1") ??
    "expert-1";
  storage.setItem("sevlab_annotator_id", annotatorId);

  const queue = new OfflineQueue(storage);
  const session = new SessionController(api, queue, { annotatorId, blindMode: true });

  let bands: Band[] = [];
  try {
    bands = await api.bands();
  } catch {
    /* reference panel is optional when offline */
  }

  const rerender = () => {
    root.innerHTML = renderApp(session.getState(), bands);
    for (const button of root.querySelectorAll<HTMLButtonElement>("[data-role=label-button]")) {
      button.addEventListener("click", () => {
        session.select(button.dataset.label as never);
        void session.submit();
      });
    }
  };
  session.subscribe(rerender);

  document.addEventListener("keydown", (event) => {
    const action = actionForKey(event.key);
    if (!action) return;
    event.preventDefault();
    if (action.type === "select") session.select(action.label);
    else if (action.type === "submit") void session.submit();
    else if (action.type === "toggle-blind") void session.toggleBlindMode();
    else if (action.type === "sync") void session.sync();
  });

  window.addEventListener("online", () => void session.sync());
  setInterval(() => {
    if (session.getState().banner) void session.loadQueue();
    if (session.getState().pendingCount > 0) void session.sync();
  }, 4000);

  await session.loadQueue();
  rerender();
  return session;
}

declare global {
  interface Window {
    sevlabBoot: typeof boot;
  }
}

if (typeof window !== "undefined") {
  window.sevlabBoot = boot;
}
