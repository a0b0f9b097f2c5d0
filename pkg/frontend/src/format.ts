// Display helpers shared by the queue and detail panes.

/** Scores render with two decimals everywhere. */
export function formatScore(score: number): string {
  return score.toFixed(2);
}

/**
 * Color scale anchored at the 0.5 decision threshold: green below, amber at
 * the boundary, red above, so reviewer attention tracks the decision rule.
 */
export function scoreColor(score: number): string {
  const clamped = Math.min(1, Math.max(0, score));
  const hue = Math.round(120 * (1 - clamped)); // 0.0 -> 120 (green), 0.5 -> 60, 1.0 -> 0 (red)
  return `hsl(${hue}, 70%, 42%)`;
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export function statusChip(status: string): string {
  return `<span class="chip chip-${escapeHtml(status)}" data-status="${escapeHtml(status)}">${escapeHtml(status)}</span>`;
}
