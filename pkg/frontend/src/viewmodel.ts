/** View models: pure projections from state to renderable text.
 *
 * Rendering the same state twice yields deeply equal models, which is what
 * keeps the DOM output deterministic.
 */

import type { Phase, RecommendedItem, StatsResponse } from "./api.js";
import { choiceChanged, type SessionState } from "./session.js";

export const NO_AGAINST_NOTE = "no reason against found";

export interface Card {
  item: string;
  score: number;
  forText: string | null;
  againstText: string | null;
  favored: string | null;
  note: string | null;
}

export function toCards(
  items: readonly RecommendedItem[],
  phase: Phase,
): Card[] {
  return items.map((entry) => {
    const withAgainst = phase === "for-and-against";
    const against = withAgainst ? entry.reason_against : null;
    return {
      item: entry.item,
      score: entry.score,
      forText: entry.reason_for ? entry.reason_for.text : null,
      againstText: against ? against.text : null,
      favored: against?.favored ?? null,
      note: withAgainst && !entry.reason_against ? NO_AGAINST_NOTE : null,
    };
  });
}

export function phaseTitle(phase: Phase): string {
  return phase === "for-only"
    ? "Step 1 of 2: pick an item (reasons for shown)"
    : "Step 2 of 2: pick again (reasons against added)";
}

export function summaryText(state: SessionState): string {
  return choiceChanged(state) ? "choice changed" : "choice unchanged";
}

/** The running aggregate from the server, shown verbatim after phase 2. */
export function aggregateText(stats: StatsResponse): string {
  if (stats.change_rate === "n/a") {
    return "no completed sessions yet";
  }
  const percent = (stats.change_rate * 100).toFixed(1);
  return `${stats.changed} of ${stats.completed} completed sessions changed their choice (${percent}%)`;
}
