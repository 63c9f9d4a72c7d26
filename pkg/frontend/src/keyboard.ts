import { SEVERITY_LABELS, type SeverityLabel } from "./types";

export type Action =
  | { type: "select"; label: SeverityLabel }
  | { type: "submit" }
  | { type: "toggle-blind" }
  | { type: "sync" };

/**
 * Keyboard-first flow: digits 1-6 pick one of the six labels in band
 * order, Enter submits, b toggles blind mode, s forces a sync.
 */
export function actionForKey(key: string): Action | null {
  if (key >= "1" && key <= "6") {
    const label = SEVERITY_LABELS[Number(key) - 1];
    return { type: "select", label };
  }
  if (key === "Enter") return { type: "submit" };
  if (key === "b" || key === "B") return { type: "toggle-blind" };
  if (key === "s" || key === "S") return { type: "sync" };
  return null;
}
