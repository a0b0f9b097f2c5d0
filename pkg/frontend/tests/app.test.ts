// Round-trip against the fixture-backed service: queue in API score order,
// accept flips server and client status, conflicts reconcile to server state.

import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api";
import { App, type AppElements } from "../src/app";
import {
  freshState,
  installFixtureServer,
  makeFixtureItem,
  settleServerSide,
  type FixtureState,
} from "./fixtureServer";

const SKELETON = `
  <div>
    <input id="min-score" value="0" />
    <select id="status-filter">
      <option value="all" selected>all</option>
      <option value="pending">pending</option>
      <option value="accepted">accepted</option>
      <option value="rejected">rejected</option>
    </select>
    <button id="refresh"></button>
    <button id="retry-drafts"></button>
    <span id="status-line"></span>
    <nav id="queue"></nav>
    <section id="detail"></section>
    <div id="side-panel"></div>
  </div>`;

function elements(): AppElements {
  document.body.innerHTML = SKELETON;
  const byId = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;
  return {
    queue: byId("queue"),
    detail: byId("detail"),
    sidePanel: byId("side-panel"),
    statusLine: byId("status-line"),
    minScoreInput: byId<HTMLInputElement>("min-score"),
    statusFilter: byId<HTMLSelectElement>("status-filter"),
    refreshButton: byId("refresh"),
    retryDraftsButton: byId("retry-drafts"),
    analyzeForm: null,
  };
}

let state: FixtureState;
let app: App;

beforeEach(() => {
  state = freshState([
    makeFixtureItem("i-low", 0.55, "the low-scoring claim"),
    makeFixtureItem("i-top", 0.91, "the top claim"),
    makeFixtureItem("i-mid", 0.62, "the middle claim"),
  ]);
  installFixtureServer(state);
  app = new App(elements(), new ApiClient("", "reviewer-1"));
});

function queueRows(): HTMLElement[] {
  return Array.from(document.querySelectorAll<HTMLElement>(".queue-row"));
}

function detailChipStatus(): string | undefined {
  return document.querySelector<HTMLElement>(".detail-header .chip")?.dataset.status;
}

describe("review round-trip against the fixture service", () => {
  it("renders the queue in the API's score order", async () => {
    await app.refreshQueue();
    const ids = queueRows().map((row) => row.dataset.itemId);
    expect(ids).toEqual(["i-top", "i-mid", "i-low"]);
    const scores = queueRows().map((row) => row.querySelector(".queue-score")!.textContent);
    expect(scores).toEqual(["0.91", "0.62", "0.55"]);
  });

  it("accepting a claim flips both server and client status", async () => {
    await app.refreshQueue();
    await app.select("i-top");
    expect(detailChipStatus()).toBe("pending");
    await app.submitVerdict("accept", "verified against the chronicle");
    // server flipped
    expect(state.items.get("i-top")!.summary.status).toBe("accepted");
    // client reflects server state in the queue chip
    await vi.waitFor(() => {
      const row = document.querySelector<HTMLElement>('[data-item-id="i-top"] .chip');
      expect(row?.dataset.status).toBe("accepted");
    });
    // focus advanced to the next pending item
    expect(document.querySelector<HTMLElement>(".item-detail")?.dataset.itemId).toBe("i-mid");
  });

  it("a conflict response reconciles the client to server state", async () => {
    await app.refreshQueue();
    await app.select("i-mid");
    expect(detailChipStatus()).toBe("pending");
    // another reviewer settles the item out from under us
    settleServerSide(state, "i-mid", "rejected");
    await app.submitVerdict("accept", "");
    expect(detailChipStatus()).toBe("rejected");
    expect(state.items.get("i-mid")!.summary.status).toBe("rejected");
  });

  it("clicking a queue row loads its detail pane", async () => {
    await app.refreshQueue();
    queueRows()[1]!.click();
    await vi.waitFor(() => {
      expect(document.querySelector<HTMLElement>(".item-detail")?.dataset.itemId).toBe("i-mid");
    });
    expect(document.querySelector(".detail-claim")!.textContent).toBe("the middle claim");
  });

  it("offline verdicts show a draft badge and apply on retry", async () => {
    await app.refreshQueue();
    await app.select("i-low");
    state.failNextRequests = 1;
    await app.submitVerdict("accept", "");
    expect(document.querySelector(".chip-draft")).not.toBeNull();
    expect(state.items.get("i-low")!.summary.status).toBe("pending");
    await app.retryDrafts();
    expect(state.items.get("i-low")!.summary.status).toBe("accepted");
    await vi.waitFor(() => {
      expect(document.querySelector(".chip-draft")).toBeNull();
    });
  });

  it("filters are passed through to the API", async () => {
    await app.refreshQueue();
    (document.getElementById("min-score") as HTMLInputElement).value = "0.6";
    await app.refreshQueue();
    expect(queueRows().map((row) => row.dataset.itemId)).toEqual(["i-top", "i-mid"]);
    expect(state.requests.at(-1)).toContain("GET /queue");
  });

  it("poll-completes an analysis job", async () => {
    await app.pollJob("job-fixture-000");
    expect(document.getElementById("status-line")!.textContent).toContain("completed");
  });
});
