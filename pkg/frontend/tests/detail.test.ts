// Detail rendering: highlights, evidence order, trace collapse, degraded modes.

import { beforeEach, describe, expect, it, vi } from "vitest";

import { renderEvidencePanel, renderItemDetail, renderLoadError } from "../src/detail";
import type { ItemDetail } from "../src/types";
import { makeFixtureItem } from "./fixtureServer";

function container(): HTMLElement {
  document.body.innerHTML = `<section id="detail"></section><div id="side-panel"></div>`;
  return document.getElementById("detail")!;
}

function fixtureDetail(): ItemDetail {
  return makeFixtureItem("i-1", 0.87, "the bridge opened in 1901").detail;
}

describe("renderItemDetail", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("highlights the claim span inside the page context", () => {
    const element = container();
    const detail = fixtureDetail();
    renderItemDetail(element, detail, { onVerdict: () => {} });
    const mark = element.querySelector("mark")!;
    const [start, end] = detail.highlight!;
    expect(mark.textContent).toBe(detail.page_text.slice(start, end));
  });

  it("shows a notice instead of a highlight when offsets are missing", () => {
    const element = container();
    const detail = { ...fixtureDetail(), highlight: null };
    renderItemDetail(element, detail, { onVerdict: () => {} });
    expect(element.querySelector("mark")).toBeNull();
    expect(element.querySelector(".notice")!.textContent).toContain("Could not locate");
    expect(element.querySelector(".claim-only")!.textContent).toContain(detail.fact.claim_text);
  });

  it("renders evidence cards in rank order with source titles", () => {
    const element = container();
    renderItemDetail(element, fixtureDetail(), { onVerdict: () => {} });
    const cards = Array.from(element.querySelectorAll<HTMLElement>(".evidence-card"));
    expect(cards).toHaveLength(3);
    expect(cards.map((card) => card.dataset.rank)).toEqual(["1", "2", "3"]);
    expect(cards[0]!.querySelector(".evidence-title")!.textContent).toBe("Evidence Doc 1");
  });

  it("hides the trace section when the trace is empty", () => {
    const element = container();
    renderItemDetail(element, fixtureDetail(), { onVerdict: () => {} });
    expect(element.querySelector(".trace")).toBeNull();
  });

  it("collapses a non-empty trace by default", () => {
    const element = container();
    const detail = fixtureDetail();
    detail.result.trace = {
      budget: 10,
      steps: [
        {
          thought: "check the chronicle",
          action: { kind: "search", argument: "bridge opening year" },
          observation: "[abc123] Title: Chronicle\nsome text",
        },
      ],
    };
    renderItemDetail(element, detail, { onVerdict: () => {} });
    const trace = element.querySelector<HTMLDetailsElement>("details.trace")!;
    expect(trace.open).toBe(false);
    expect(trace.textContent).toContain("search");
  });

  it("labels both report sides and marks a missing side unavailable", () => {
    const element = container();
    const detail = fixtureDetail();
    detail.report.pro_consistent = null;
    detail.report.unavailable = ["pro_consistent"];
    renderItemDetail(element, detail, { onVerdict: () => {} });
    const sides = Array.from(element.querySelectorAll(".report-side h4")).map(
      (h) => h.textContent,
    );
    expect(sides).toEqual(["Case for inconsistency", "Case for consistency"]);
    expect(element.querySelector(".unavailable")!.textContent).toContain("unavailable");
  });

  it("shows clarifications when present", () => {
    const element = container();
    renderItemDetail(element, fixtureDetail(), { onVerdict: () => {} });
    expect(element.querySelector(".clarifications")!.textContent).toContain("clarification about");
  });

  it("fires the verdict callback with the note text", () => {
    const element = container();
    const onVerdict = vi.fn();
    renderItemDetail(element, fixtureDetail(), { onVerdict });
    element.querySelector<HTMLInputElement>(".verdict-note")!.value = "checked the source";
    element.querySelector<HTMLButtonElement>(".verdict-accept")!.click();
    expect(onVerdict).toHaveBeenCalledWith("accept", "checked the source");
  });

  it("disables verdict controls for settled items", () => {
    const element = container();
    const detail = { ...fixtureDetail(), status: "accepted" as const };
    renderItemDetail(element, detail, { onVerdict: () => {} });
    expect(element.querySelector<HTMLButtonElement>(".verdict-accept")!.disabled).toBe(true);
  });

  it("opens evidence in the side panel without navigation", () => {
    const element = container();
    const sidePanel = document.getElementById("side-panel")!;
    const detail = fixtureDetail();
    renderItemDetail(element, detail, {
      onVerdict: () => {},
      onEvidenceOpen: (evidence) => renderEvidencePanel(sidePanel, evidence),
    });
    element.querySelector<HTMLAnchorElement>(".evidence-title")!.click();
    expect(sidePanel.querySelector(".evidence-panel")!.getAttribute("data-block-id")).toBe(
      "ev-i-1-1",
    );
    sidePanel.querySelector<HTMLButtonElement>(".panel-close")!.click();
    expect(sidePanel.innerHTML).toBe("");
  });
});

describe("renderLoadError", () => {
  it("renders a retry affordance, never a blank panel", () => {
    document.body.innerHTML = `<section id="detail"></section>`;
    const element = document.getElementById("detail")!;
    const onRetry = vi.fn();
    renderLoadError(element, "boom", onRetry);
    expect(element.textContent).toContain("Could not load");
    element.querySelector<HTMLButtonElement>(".retry")!.click();
    expect(onRetry).toHaveBeenCalled();
  });
});
