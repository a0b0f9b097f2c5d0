// Detail pane: the claim in page context with its highlight, evidence cards
// in rank order, clarifications, the two-sided report, and the agent trace
// (collapsed by default). Evidence opens in a side panel, never a navigation.

import { escapeHtml, formatScore, scoreColor, statusChip } from "./format";
import type { AgentTrace, EvidenceItem, ItemDetail, TwoSidedReport } from "./types";

export interface DetailCallbacks {
  onVerdict: (decision: "accept" | "reject", note: string) => void;
  onEvidenceOpen?: (evidence: EvidenceItem) => void;
}

function renderHighlightedContext(detail: ItemDetail): string {
  if (!detail.highlight) {
    return `
      <p class="notice">Could not locate this claim in the submitted page text.</p>
      <blockquote class="claim-only">${escapeHtml(detail.fact.claim_text)}</blockquote>`;
  }
  const [start, end] = detail.highlight;
  const before = detail.page_text.slice(0, start);
  const marked = detail.page_text.slice(start, end);
  const after = detail.page_text.slice(end);
  return `
    <blockquote class="page-context">${escapeHtml(before)}<mark>${escapeHtml(marked)}</mark>${escapeHtml(after)}</blockquote>`;
}

function renderEvidence(evidence: EvidenceItem[]): string {
  if (evidence.length === 0) {
    return `<p class="empty">No evidence passages were retrieved.</p>`;
  }
  const cards = evidence
    .map(
      (item) => `
      <article class="evidence-card" data-block-id="${escapeHtml(item.block_id)}" data-rank="${item.rank}">
        <header>
          <span class="evidence-rank">#${item.rank}</span>
          <a href="#" class="evidence-title" data-block-id="${escapeHtml(item.block_id)}">${escapeHtml(item.doc_title)}</a>
          <span class="evidence-sim">${item.similarity.toFixed(3)}</span>
        </header>
        <p class="evidence-text">${escapeHtml(item.text)}</p>
      </article>`,
    )
    .join("");
  return `<div class="evidence-list">${cards}</div>`;
}

function renderClarifications(clarifications: string[]): string {
  if (clarifications.length === 0) return "";
  const entries = clarifications
    .map((text, i) => `<li class="clarification">[${i + 1}] ${escapeHtml(text)}</li>`)
    .join("");
  return `
    <section class="clarifications">
      <h3>Clarifications</h3>
      <ul>${entries}</ul>
    </section>`;
}

function renderReportSide(label: string, body: string | null): string {
  const content = body === null
    ? `<p class="unavailable">This side of the report is unavailable.</p>`
    : `<p>${escapeHtml(body)}</p>`;
  return `
    <div class="report-side">
      <h4>${escapeHtml(label)}</h4>
      ${content}
    </div>`;
}

function renderReport(report: TwoSidedReport): string {
  return `
    <section class="report">
      <h3>Two-sided analysis</h3>
      <div class="report-columns">
        ${renderReportSide("Case for inconsistency", report.pro_inconsistent)}
        ${renderReportSide("Case for consistency", report.pro_consistent)}
      </div>
    </section>`;
}

function renderTrace(trace: AgentTrace | null): string {
  if (!trace || trace.steps.length === 0) return "";
  const steps = trace.steps
    .map(
      (step, i) => `
      <li class="trace-step">
        <p class="trace-thought">${i + 1}. ${escapeHtml(step.thought)}</p>
        <code>${escapeHtml(step.action.kind)}(${escapeHtml(step.action.argument)})</code>
        <pre class="trace-observation">${escapeHtml(step.observation)}</pre>
      </li>`,
    )
    .join("");
  return `
    <details class="trace">
      <summary>Agent trace (${trace.steps.length} steps, budget ${trace.budget})</summary>
      <ol>${steps}</ol>
    </details>`;
}

export function renderItemDetail(
  container: HTMLElement,
  detail: ItemDetail,
  callbacks: DetailCallbacks,
  pendingDraft = false,
): void {
  const verdictDisabled = detail.status !== "pending" ? "disabled" : "";
  container.innerHTML = `
    <article class="item-detail" data-item-id="${escapeHtml(detail.item_id)}">
      <header class="detail-header">
        <span class="detail-score" style="color: ${scoreColor(detail.result.score)}">${formatScore(detail.result.score)}</span>
        <h2 class="detail-claim">${escapeHtml(detail.fact.claim_text)}</h2>
        ${statusChip(detail.status)}
        ${pendingDraft ? `<span class="chip chip-draft" data-status="draft">draft pending</span>` : ""}
      </header>
      <p class="detail-source">From: ${escapeHtml(detail.fact.context_title)} (page: ${escapeHtml(detail.page_title)})</p>
      <section class="context">
        <h3>In context</h3>
        ${renderHighlightedContext(detail)}
      </section>
      <section class="evidence">
        <h3>Evidence</h3>
        ${renderEvidence(detail.result.evidence)}
      </section>
      ${renderClarifications(detail.result.clarifications)}
      ${renderReport(detail.report)}
      ${renderTrace(detail.result.trace ?? detail.report.trace)}
      <footer class="verdict-bar">
        <input type="text" class="verdict-note" placeholder="note (optional)" ${verdictDisabled} />
        <button class="verdict-accept" ${verdictDisabled}>Accept: inconsistent</button>
        <button class="verdict-reject" ${verdictDisabled}>Reject: consistent</button>
      </footer>
    </article>`;

  const note = () =>
    (container.querySelector<HTMLInputElement>(".verdict-note")?.value ?? "").trim();
  container
    .querySelector<HTMLButtonElement>(".verdict-accept")
    ?.addEventListener("click", () => callbacks.onVerdict("accept", note()));
  container
    .querySelector<HTMLButtonElement>(".verdict-reject")
    ?.addEventListener("click", () => callbacks.onVerdict("reject", note()));
  for (const link of Array.from(
    container.querySelectorAll<HTMLAnchorElement>(".evidence-title"),
  )) {
    link.addEventListener("click", (event) => {
      event.preventDefault();
      const blockId = link.dataset.blockId;
      const evidence = detail.result.evidence.find((e) => e.block_id === blockId);
      if (evidence && callbacks.onEvidenceOpen) callbacks.onEvidenceOpen(evidence);
    });
  }
}

/** Side panel for a single evidence block; keeps the reviewer on the page. */
export function renderEvidencePanel(container: HTMLElement, evidence: EvidenceItem): void {
  container.innerHTML = `
    <aside class="evidence-panel" data-block-id="${escapeHtml(evidence.block_id)}">
      <header>
        <h3>${escapeHtml(evidence.doc_title)}</h3>
        <button class="panel-close">close</button>
      </header>
      <p>${escapeHtml(evidence.text)}</p>
      <p class="evidence-meta">block ${escapeHtml(evidence.block_id)}, retrieval rank ${evidence.rank}</p>
    </aside>`;
  container
    .querySelector<HTMLButtonElement>(".panel-close")
    ?.addEventListener("click", () => {
      container.innerHTML = "";
    });
}

export function renderLoadError(container: HTMLElement, message: string, onRetry: () => void): void {
  container.innerHTML = `
    <div class="load-error">
      <p>Could not load this item: ${escapeHtml(message)}</p>
      <button class="retry">Retry</button>
    </div>`;
  container.querySelector<HTMLButtonElement>(".retry")?.addEventListener("click", onRetry);
}
