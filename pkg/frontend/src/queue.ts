// Queue pane: flagged claims exactly in API order (the server sorts by
// score descending; the client must not reorder).

import { escapeHtml, formatScore, scoreColor, statusChip } from "./format";
import type { ItemSummary } from "./types";

export interface QueueCallbacks {
  onSelect: (itemId: string) => void;
}

export function renderQueue(
  container: HTMLElement,
  items: ItemSummary[],
  selectedId: string | null,
  callbacks: QueueCallbacks,
): void {
  if (items.length === 0) {
    container.innerHTML = `<p class="empty">No flagged claims match the current filters.</p>`;
    return;
  }
  const rows = items
    .map((item) => {
      const selected = item.item_id === selectedId ? " selected" : "";
      return `
        <li class="queue-row${selected}" data-item-id="${escapeHtml(item.item_id)}" data-score="${item.score}">
          <span class="queue-score" style="color: ${scoreColor(item.score)}">${formatScore(item.score)}</span>
          <span class="queue-claim">${escapeHtml(item.claim_text)}</span>
          ${statusChip(item.status)}
        </li>`;
    })
    .join("");
  container.innerHTML = `<ul class="queue-list">${rows}</ul>`;
  for (const row of Array.from(container.querySelectorAll<HTMLElement>(".queue-row"))) {
    row.addEventListener("click", () => callbacks.onSelect(row.dataset.itemId ?? ""));
  }
}
