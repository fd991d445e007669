/** Pure session state machine for the two-phase choice experiment.
 *
 * Phase 1 shows each recommendation with its reason for only; after the
 * subject picks an item, phase 2 repeats the list with reasons against
 * added and asks again.  The second phase is unreachable until a phase-1
 * selection exists, mirroring the server's ordering rule, and states are
 * frozen so accidental mutation fails loudly.
 */

import type { ChoiceEvent, Phase, RecommendedItem } from "./api.js";

export type SessionPhase = Phase | "done";

export interface SessionState {
  readonly sessionId: string;
  readonly phase: SessionPhase;
  readonly recommendations: readonly RecommendedItem[];
  readonly selections: Readonly<Partial<Record<Phase, string>>>;
}

export interface Transition {
  readonly state: SessionState;
  readonly event: ChoiceEvent;
}

function freeze(state: SessionState): SessionState {
  Object.freeze(state.selections);
  return Object.freeze(state);
}

export function newSession(
  sessionId: string,
  recommendations: readonly RecommendedItem[],
): SessionState {
  if (!sessionId) {
    throw new Error("session id must be non-empty");
  }
  if (recommendations.length === 0) {
    throw new Error("cannot start a session without recommendations");
  }
  return freeze({
    sessionId,
    phase: "for-only",
    recommendations,
    selections: {},
  });
}

export function displayedItems(state: SessionState): string[] {
  return state.recommendations.map((r) => r.item);
}

/** Record the subject's pick for the current phase.
 *
 * Returns the advanced state plus the choice event to post; the caller
 * submits the event and only adopts the new state once the server accepts
 * it, so a rejected post leaves the session where it was.
 */
export function selectItem(state: SessionState, item: string): Transition {
  if (state.phase === "done") {
    throw new Error("session is already complete");
  }
  if (!displayedItems(state).includes(item)) {
    throw new Error(`item is not on display: ${item}`);
  }
  const event: ChoiceEvent = {
    session_id: state.sessionId,
    phase: state.phase,
    chosen_item: item,
  };
  const next: SessionState = freeze({
    sessionId: state.sessionId,
    phase: state.phase === "for-only" ? "for-and-against" : "done",
    recommendations: state.recommendations,
    selections: { ...state.selections, [state.phase]: item },
  });
  return { state: next, event };
}

export function isComplete(state: SessionState): boolean {
  return state.phase === "done";
}

/** Did the second choice differ from the first?  Only defined once done. */
export function choiceChanged(state: SessionState): boolean {
  const first = state.selections["for-only"];
  const second = state.selections["for-and-against"];
  if (!isComplete(state) || first === undefined || second === undefined) {
    throw new Error("the session has not completed both phases");
  }
  return first !== second;
}
