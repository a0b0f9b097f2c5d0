// Top-level controller: single-user session state, all mutation through the
// API, optimistic-free rendering (server state is always refetched or taken
// from the server's response).

import { ApiClient } from "./api";
import { renderEvidencePanel, renderItemDetail, renderLoadError } from "./detail";
import { renderQueue } from "./queue";
import type { EvidenceItem, ItemStatus, ItemSummary, SystemName } from "./types";
import { VerdictFlow } from "./verdicts";

export interface AppElements {
  queue: HTMLElement;
  detail: HTMLElement;
  sidePanel: HTMLElement;
  statusLine: HTMLElement;
  minScoreInput: HTMLInputElement;
  statusFilter: HTMLSelectElement;
  refreshButton: HTMLElement;
  retryDraftsButton: HTMLElement;
  analyzeForm: HTMLFormElement | null;
}

export class App {
  items: ItemSummary[] = [];
  selectedId: string | null = null;
  readonly verdicts: VerdictFlow;

  constructor(
    private elements: AppElements,
    private api: ApiClient,
  ) {
    this.verdicts = new VerdictFlow(api);
    elements.refreshButton.addEventListener("click", () => void this.refreshQueue());
    elements.minScoreInput.addEventListener("change", () => void this.refreshQueue());
    elements.statusFilter.addEventListener("change", () => void this.refreshQueue());
    elements.retryDraftsButton.addEventListener("click", () => void this.retryDrafts());
    if (typeof window !== "undefined") {
      window.addEventListener("online", () => void this.retryDrafts());
    }
    if (elements.analyzeForm) {
      elements.analyzeForm.addEventListener("submit", (event) => {
        event.preventDefault();
        void this.analyzeFromForm();
      });
    }
  }

  private setStatus(message: string): void {
    this.elements.statusLine.textContent = message;
  }

  private filters(): { minScore: number; status?: ItemStatus } {
    const minScore = Number(this.elements.minScoreInput.value || "0");
    const raw = this.elements.statusFilter.value;
    return raw === "all"
      ? { minScore }
      : { minScore, status: raw as ItemStatus };
  }

  async refreshQueue(): Promise<void> {
    const { minScore, status } = this.filters();
    try {
      this.items = await this.api.queue(minScore, status);
    } catch (error) {
      this.setStatus(`queue load failed: ${(error as Error).message}`);
      return;
    }
    renderQueue(this.elements.queue, this.items, this.selectedId, {
      onSelect: (itemId) => void this.select(itemId),
    });
    this.setStatus(`${this.items.length} item(s) in queue`);
  }

  async select(itemId: string): Promise<void> {
    this.selectedId = itemId;
    try {
      const detail = await this.api.item(itemId);
      renderItemDetail(
        this.elements.detail,
        detail,
        {
          onVerdict: (decision, note) => void this.submitVerdict(decision, note),
          onEvidenceOpen: (evidence) => this.openEvidence(evidence),
        },
        this.verdicts.hasDraft(itemId),
      );
    } catch (error) {
      renderLoadError(this.elements.detail, (error as Error).message, () => void this.select(itemId));
      return;
    }
    renderQueue(this.elements.queue, this.items, this.selectedId, {
      onSelect: (id) => void this.select(id),
    });
  }

  openEvidence(evidence: EvidenceItem): void {
    renderEvidencePanel(this.elements.sidePanel, evidence);
  }

  async submitVerdict(decision: "accept" | "reject", note: string): Promise<void> {
    if (!this.selectedId) return;
    const itemId = this.selectedId;
    const outcome = await this.verdicts.submit(itemId, decision, note);
    if (outcome.kind === "applied") {
      this.setStatus(`verdict recorded: ${outcome.item.status}`);
      await this.refreshQueue();
      const next = this.items.find((item) => item.status === "pending");
      await this.select(next ? next.item_id : itemId);
    } else if (outcome.kind === "conflict") {
      // the server already has a terminal status; show it as-is
      this.setStatus("verdict conflicted; showing server state");
      await this.refreshQueue();
      await this.select(itemId);
    } else {
      this.setStatus("offline: verdict saved as a draft, will retry");
      await this.select(itemId); // re-render with the draft badge
    }
  }

  async retryDrafts(): Promise<void> {
    const outcomes = await this.verdicts.retryDrafts();
    if (outcomes.length > 0) {
      this.setStatus(`retried ${outcomes.length} draft verdict(s)`);
      await this.refreshQueue();
      if (this.selectedId) await this.select(this.selectedId);
    }
  }

  private async analyzeFromForm(): Promise<void> {
    const form = this.elements.analyzeForm;
    if (!form) return;
    const data = new FormData(form);
    const jobId = await this.api.analyze({
      title: String(data.get("title") ?? ""),
      text: String(data.get("text") ?? ""),
      system: String(data.get("system") ?? "retrieve_verify") as SystemName,
      score_floor: Number(data.get("score_floor") ?? "0.5"),
    });
    this.setStatus(`analysis job ${jobId} submitted`);
    await this.pollJob(jobId);
    await this.refreshQueue();
  }

  async pollJob(jobId: string, intervalMs = 250, maxWaitMs = 60_000): Promise<void> {
    const deadline = Date.now() + maxWaitMs;
    for (;;) {
      const job = await this.api.job(jobId);
      if (job.status === "completed") {
        this.setStatus(`job ${jobId} completed with ${job.item_ids.length} item(s)`);
        return;
      }
      if (job.status === "failed") {
        this.setStatus(`job ${jobId} failed at ${job.error?.stage}: ${job.error?.message}`);
        return;
      }
      if (Date.now() > deadline) {
        this.setStatus(`job ${jobId} still running`);
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }
}

/** Wire the app into the standard index.html skeleton. */
export function mountApp(root: Document, baseUrl = "", reviewerId = "anonymous"): App {
  const byId = <T extends HTMLElement>(id: string): T => {
    const element = root.getElementById(id);
    if (!element) throw new Error(`missing #${id} in page skeleton`);
    return element as T;
  };
  const app = new App(
    {
      queue: byId("queue"),
      detail: byId("detail"),
      sidePanel: byId("side-panel"),
      statusLine: byId("status-line"),
      minScoreInput: byId<HTMLInputElement>("min-score"),
      statusFilter: byId<HTMLSelectElement>("status-filter"),
      refreshButton: byId("refresh"),
      retryDraftsButton: byId("retry-drafts"),
      analyzeForm: root.getElementById("analyze-form") as HTMLFormElement | null,
    },
    new ApiClient(baseUrl, reviewerId),
  );
  void app.refreshQueue();
  return app;
}
