// Verdict submission with at-least-once delivery: network failures park the
// verdict as a local draft and retry later; the server's conflict detection
// makes the overall flow effectively exactly-once.

import { ApiClient, ConflictError } from "./api";
import type { ItemDetail, ItemSummary, VerdictDecision } from "./types";

export interface Draft {
  item_id: string;
  decision: VerdictDecision;
  note: string;
}

export type VerdictOutcome =
  | { kind: "applied"; item: ItemSummary }
  | { kind: "conflict"; detail: ItemDetail }
  | { kind: "draft"; draft: Draft };

export class VerdictFlow {
  private drafts = new Map<string, Draft>();

  constructor(private api: ApiClient) {}

  get draftItems(): Draft[] {
    return Array.from(this.drafts.values());
  }

  hasDraft(itemId: string): boolean {
    return this.drafts.has(itemId);
  }

  /**
   * Submit a verdict. On conflict the server state wins and is returned for
   * display; on network failure the verdict is preserved as a draft.
   */
  async submit(itemId: string, decision: VerdictDecision, note: string): Promise<VerdictOutcome> {
    try {
      const item = await this.api.submitVerdict({ item_id: itemId, decision, note });
      this.drafts.delete(itemId);
      return { kind: "applied", item };
    } catch (error) {
      if (error instanceof ConflictError) {
        this.drafts.delete(itemId);
        const detail = await this.api.item(itemId);
        return { kind: "conflict", detail };
      }
      if (error instanceof TypeError) {
        // fetch network failure: keep the verdict locally and retry later
        const draft: Draft = { item_id: itemId, decision, note };
        this.drafts.set(itemId, draft);
        return { kind: "draft", draft };
      }
      throw error;
    }
  }

  /** Re-submit parked drafts (e.g. on reconnect). Returns the outcomes. */
  async retryDrafts(): Promise<VerdictOutcome[]> {
    const outcomes: VerdictOutcome[] = [];
    for (const draft of this.draftItems) {
      outcomes.push(await this.submit(draft.item_id, draft.decision, draft.note));
    }
    return outcomes;
  }
}
