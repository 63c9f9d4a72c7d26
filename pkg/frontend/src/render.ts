import type { Band, SessionState } from "./types";
import { SEVERITY_LABELS } from "./types";

function esc(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderProgress(state: SessionState): string {
  const p = state.progress;
  if (!p) return `<div data-role="progress">progress unknown</div>`;
  return (
    `<div data-role="progress">labeled ${p.labeled}/${p.total}` +
    ` &middot; fused ${p.fused} &middot; pending ${p.pending}</div>`
  );
}

export function renderPending(state: SessionState): string {
  if (state.pendingCount === 0) return "";
  return (
    `<div data-role="pending-sync" class="pending">` +
    `pending sync: ${state.pendingCount} annotation(s) queued offline</div>`
  );
}

export function renderBanner(state: SessionState): string {
  if (!state.banner) return "";
  return `<div data-role="banner" class="banner">${esc(state.banner)}</div>`;
}

export function renderBands(bands: Band[]): string {
  let lower = 0;
  const rows = bands
    .map((band) => {
      const row =
        `<tr><td>${lower}&ndash;${band.upper_bound}</td>` +
        `<td>${esc(band.label)}</td></tr>`;
      lower = band.upper_bound + 1;
      return row;
    })
    .join("");
  return (
    `<table data-role="band-reference"><caption>score bands</caption>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderLabelButtons(state: SessionState): string {
  const buttons = SEVERITY_LABELS.map((label, i) => {
    const selected = state.selectedLabel === label ? " selected" : "";
    return (
      `<button data-role="label-button" data-label="${label}"` +
      ` class="label${selected}">${i + 1}&nbsp;${label}</button>`
    );
  }).join("");
  return `<div data-role="label-buttons">${buttons}</div>`;
}

export function renderTask(state: SessionState): string {
  const task = state.current;
  if (!task) {
    const p = state.progress;
    const summary = p ? `labeled ${p.labeled} of ${p.total}` : "";
    return `<div data-role="all-labeled">all labeled &mdash; ${summary}</div>`;
  }
  const votes =
    !state.blindMode && task.machine_votes
      ? `<dl data-role="machine-votes">` +
        `<dt>keyword</dt><dd>${esc(task.machine_votes.keyword ?? "n/a")}</dd>` +
        `<dt>zeroshot</dt><dd>${esc(task.machine_votes.zeroshot ?? "n/a")}</dd></dl>`
      : "";
  const expert = task.expert_label
    ? `<div data-role="expert-label">current label: ${esc(task.expert_label)}</div>`
    : "";
  const error = state.inlineError
    ? `<div data-role="inline-error" class="error">${esc(state.inlineError)}</div>`
    : "";
  return (
    `<article data-role="task" data-doc-id="${esc(task.doc_id)}">` +
    `<header>${esc(task.doc_id)} <span class="lang">[${esc(task.language)}]</span>` +
    ` <span class="status">${task.status}</span></header>` +
    `<p data-role="task-text">${esc(task.text)}</p>` +
    votes +
    expert +
    error +
    `</article>`
  );
}

export function renderQueue(state: SessionState): string {
  const items = state.tasks
    .map((task, i) => {
      const mark = i === state.cursor ? " current" : "";
      return `<li class="queue-item${mark}">${esc(task.doc_id)}</li>`;
    })
    .join("");
  return `<ol data-role="queue">${items}</ol>`;
}

export function renderApp(state: SessionState, bands: Band[]): string {
  const blind = state.blindMode ? "on" : "off";
  return (
    `<main>` +
    renderBanner(state) +
    renderPending(state) +
    `<div data-role="blind-mode" data-blind="${blind}">blind mode: ${blind} (b toggles)</div>` +
    renderProgress(state) +
    renderTask(state) +
    renderLabelButtons(state) +
    renderQueue(state) +
    renderBands(bands) +
    `</main>`
  );
}
