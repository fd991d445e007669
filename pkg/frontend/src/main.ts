/** DOM glue. All logic lives in api/session/viewmodel; this file only wires
 * events to those pure pieces and paints the result. */

import { ApiClient, ApiError, ConflictError, type Phase } from "./api.js";
import {
  isComplete,
  newSession,
  selectItem,
  type SessionState,
} from "./session.js";
import {
  aggregateText,
  phaseTitle,
  summaryText,
  toCards,
} from "./viewmodel.js";

const api = new ApiClient("");

let session: SessionState | null = null;
// the action behind the error banner's retry button
let lastAction: (() => Promise<void>) | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element: #${id}`);
  return node as T;
}

function setBanner(message: string | null): void {
  const banner = el<HTMLDivElement>("banner");
  banner.hidden = message === null;
  el<HTMLSpanElement>("banner-text").textContent = message ?? "";
}

function setConflict(message: string | null): void {
  const note = el<HTMLDivElement>("conflict");
  note.hidden = message === null;
  note.textContent = message ?? "";
}

async function guarded(action: () => Promise<void>): Promise<void> {
  lastAction = action;
  try {
    await action();
    setBanner(null);
  } catch (err) {
    if (err instanceof ConflictError) {
      setConflict(err.message);
      return;
    }
    const detail = err instanceof ApiError ? err.message : String(err);
    setBanner(`request failed: ${detail}`);
  }
}

function renderCards(state: SessionState): void {
  const host = el<HTMLDivElement>("cards");
  host.textContent = "";
  if (isComplete(state)) return;
  const phase = state.phase as Phase;
  el<HTMLHeadingElement>("phase-title").textContent = phaseTitle(phase);
  for (const card of toCards(state.recommendations, phase)) {
    const box = document.createElement("article");
    box.className = "card";

    const title = document.createElement("h3");
    title.textContent = card.item;
    box.appendChild(title);

    if (card.forText) {
      const p = document.createElement("p");
      p.className = "reason-for";
      p.textContent = card.forText;
      box.appendChild(p);
    }
    if (card.againstText) {
      const p = document.createElement("p");
      p.className = "reason-against";
      p.textContent = card.againstText;
      box.appendChild(p);
    }
    if (card.note) {
      const p = document.createElement("p");
      p.className = "no-against";
      p.textContent = card.note;
      box.appendChild(p);
    }

    const pick = document.createElement("button");
    pick.textContent = `Choose ${card.item}`;
    pick.addEventListener("click", () => void guarded(() => choose(card.item)));
    box.appendChild(pick);

    host.appendChild(box);
  }
}

async function renderSummary(state: SessionState): Promise<void> {
  el<HTMLHeadingElement>("phase-title").textContent = "Session complete";
  const stats = await api.stats();
  const summary = el<HTMLDivElement>("summary");
  summary.hidden = false;
  el<HTMLParagraphElement>("summary-choice").textContent = summaryText(state);
  el<HTMLParagraphElement>("summary-aggregate").textContent =
    aggregateText(stats);
}

async function choose(item: string): Promise<void> {
  if (!session) return;
  setConflict(null);
  const { state, event } = selectItem(session, item);
  await api.submitChoice(event);
  session = state;
  renderCards(session);
  if (isComplete(session)) {
    await renderSummary(session);
  }
}

async function start(): Promise<void> {
  const anchor = el<HTMLInputElement>("anchor-input").value.trim();
  if (!anchor) {
    setBanner("enter an anchor entity to get recommendations for");
    return;
  }
  setConflict(null);
  el<HTMLDivElement>("summary").hidden = true;
  const response = await api.recommend(anchor, 4, "s3");
  session = newSession(crypto.randomUUID(), response.items);
  renderCards(session);
}

function init(): void {
  el<HTMLButtonElement>("start-button").addEventListener("click", () =>
    void guarded(start),
  );
  el<HTMLButtonElement>("banner-retry").addEventListener("click", () => {
    if (lastAction) void guarded(lastAction);
  });
}

init();
